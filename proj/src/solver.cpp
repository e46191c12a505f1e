#include "histcad/constraints.hpp"

#include "histcad/error.hpp"
#include "histcad/numfmt.hpp"

#include <Eigen/SparseCholesky>

#include <map>
#include <numeric>

namespace histcad {

std::string_view solve_status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NoConvergence: return "NO_CONVERGENCE";
    case SolveStatus::Infeasible: return "INFEASIBLE";
    }
    return "unknown";
}

namespace {

// Union-find whose edges carry a parity bit: 0 = same orientation class,
// 1 = rotated by 90 degrees.
class ParityUnion {
public:
    explicit ParityUnion(std::size_t n) : parent_(n), parity_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::pair<std::size_t, int> find(std::size_t x) {
        int p = 0;
        std::size_t r = x;
        while (parent_[r] != r) {
            p ^= parity_[r];
            r = parent_[r];
        }
        // Path compression with parity bookkeeping.
        std::size_t cur = x;
        int cur_p = p;
        while (parent_[cur] != cur) {
            const std::size_t next = parent_[cur];
            const int next_p = cur_p ^ parity_[cur];
            parent_[cur] = r;
            parity_[cur] = cur_p;
            cur = next;
            cur_p = next_p;
        }
        return {r, p};
    }

    // False when the relation contradicts what is already known.
    bool unite(std::size_t a, std::size_t b, int parity) {
        const auto [ra, pa] = find(a);
        const auto [rb, pb] = find(b);
        if (ra == rb) {
            return (pa ^ pb) == parity;
        }
        parent_[ra] = rb;
        parity_[ra] = pa ^ pb ^ parity;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<int> parity_;
};

std::string describe(const Constraint& c) {
    std::string s(constraint_kind_name(c.kind));
    s += "(";
    for (std::size_t i = 0; i < c.refs.size(); ++i) {
        s += (i ? ", " : "") + c.refs[i].str();
    }
    return s + ")";
}

// Parameter name held by each component of a Fix constraint, if it maps onto
// stored parameters.
std::vector<std::string> fix_param_names(const Primitive& prim, Anchor anchor) {
    const auto& names = curve_param_names(prim.kind());
    switch (anchor) {
    case Anchor::Whole: return names;
    case Anchor::Start: return {names[0], names[1]};
    case Anchor::End:
        return prim.kind() == PrimitiveKind::Line ? std::vector<std::string>{names[2], names[3]}
                                                  : std::vector<std::string>{names[4], names[5]};
    case Anchor::Center:
        if (prim.kind() == PrimitiveKind::Circle) return {names[0], names[1]};
        return {};
    }
    return {};
}

}  // namespace

std::vector<std::string> detect_conflicts(const Sketch& sketch, const std::vector<Pin>& pins) {
    std::vector<std::string> out;
    std::map<std::string, std::size_t, std::less<>> line_node;
    for (const auto& p : sketch.primitives) {
        if (p.kind() == PrimitiveKind::Line) {
            line_node.emplace(p.id, line_node.size() + 1);  // node 0 = horizontal reference
        }
    }
    ParityUnion uf(line_node.size() + 1);
    const auto node = [&](const Ref& r) -> std::optional<std::size_t> {
        const auto it = line_node.find(r.id);
        if (it == line_node.end() || r.anchor != Anchor::Whole) return std::nullopt;
        return it->second;
    };
    for (const auto& c : sketch.constraints) {
        std::optional<std::size_t> a, b;
        int parity = 0;
        switch (c.kind) {
        case ConstraintKind::Horizontal: a = node(c.refs.at(0)); b = 0; parity = 0; break;
        case ConstraintKind::Vertical: a = node(c.refs.at(0)); b = 0; parity = 1; break;
        case ConstraintKind::Parallel: a = node(c.refs.at(0)); b = node(c.refs.at(1)); parity = 0; break;
        case ConstraintKind::Perpendicular: a = node(c.refs.at(0)); b = node(c.refs.at(1)); parity = 1; break;
        default: continue;
        }
        if (!a || !b) continue;
        if (!uf.unite(*a, *b, parity)) {
            out.push_back("orientation contradiction at " + describe(c));
        }
    }

    const double eps = geom_eps(std::max(sketch_extent(sketch), 1.0));
    std::map<std::string, double, std::less<>> pinned;
    for (const auto& pin : pins) {
        const auto [it, inserted] = pinned.emplace(pin.variable, pin.value);
        if (!inserted && std::abs(it->second - pin.value) > eps) {
            out.push_back("pin " + pin.variable + " given both " + format_number(it->second) + " and " +
                          format_number(pin.value));
        }
    }
    for (const auto& c : sketch.constraints) {
        if (c.kind != ConstraintKind::Fix || c.refs.size() != 1) continue;
        const Primitive* prim = sketch.find(c.refs[0].id);
        if (prim == nullptr) continue;
        const auto names = fix_param_names(*prim, c.refs[0].anchor);
        const std::vector<double> values = c.values.size() == names.size()
                                               ? c.values
                                               : fix_values_for(prim->curve, c.refs[0].anchor);
        for (std::size_t k = 0; k < names.size() && k < values.size(); ++k) {
            const auto it = pinned.find(prim->id + "." + names[k]);
            if (it != pinned.end() && std::abs(it->second - values[k]) > eps) {
                out.push_back("pin " + it->first + " = " + format_number(it->second) + " contradicts " + describe(c));
            }
        }
    }
    return out;
}

SolveResult solve(const Sketch& sketch, const std::vector<Pin>& pins, const SolveOptions& options) {
    SolveResult result{sketch, {}};
    SolveReport& report = result.report;

    const auto conflicts = detect_conflicts(sketch, pins);
    if (!conflicts.empty()) {
        report.status = SolveStatus::Infeasible;
        report.notes = conflicts;
        return result;
    }

    const ResidualSystem sys = ResidualSystem::build(sketch, pins);
    report.variables = sys.variable_count();
    report.residuals = sys.residual_count();
    report.notes = sys.branch_notes();

    double extent = sketch_extent(sketch);
    if (!(extent > 0.0)) extent = 1.0;
    const double target = options.tolerance * extent;
    const double polish = 1e-13 * extent;

    const Eigen::VectorXd x0 = sys.initial();
    const Eigen::Index n = x0.size();
    const double w2 = options.regularization * options.regularization;

    const auto cost_of = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& x) {
        return r.squaredNorm() + w2 * (x - x0).squaredNorm();
    };

    Eigen::VectorXd x = x0;
    Eigen::VectorXd r = sys.residuals(x);
    const auto max_abs = [](const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
    report.initial_max_residual = max_abs(r);
    double cost = cost_of(r, x);
    double lambda = options.initial_damping;

    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

    int iter = 0;
    while (iter < options.max_iterations && max_abs(r) > polish && n > 0) {
        ++iter;
        const Eigen::SparseMatrix<double> J = sys.jacobian(x);
        const Eigen::SparseMatrix<double> JtJ = (J.transpose() * J).pruned();
        const Eigen::VectorXd g = J.transpose() * r + w2 * (x - x0);
        bool accepted = false;
        while (!accepted && lambda < 1e12) {
            // Damping scaled by the diagonal (Marquardt) plus a uniform floor.
            Eigen::SparseMatrix<double> A = JtJ + (w2 + lambda) * identity;
            for (Eigen::Index i = 0; i < n; ++i) {
                A.coeffRef(i, i) += lambda * JtJ.coeff(i, i);
            }
            ldlt.compute(A);
            if (ldlt.info() != Eigen::Success) {
                lambda *= 10.0;
                continue;
            }
            const Eigen::VectorXd step = ldlt.solve(-g);
            const Eigen::VectorXd xn = x + step;
            Eigen::VectorXd rn;
            try {
                rn = sys.residuals(xn);
            } catch (const Error&) {
                lambda *= 10.0;
                continue;
            }
            const double cn = cost_of(rn, xn);
            if (std::isfinite(cn) && cn < cost) {
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) break;  // stagnated at a (local) minimum
    }

    report.iterations = iter;
    report.max_residual = max_abs(r);
    report.status = report.max_residual <= target ? SolveStatus::Converged : SolveStatus::NoConvergence;
    result.sketch = sys.sketch_at(x);
    return result;
}

}  // namespace histcad
