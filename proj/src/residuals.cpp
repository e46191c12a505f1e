#include "histcad/constraints.hpp"

#include "histcad/error.hpp"

#include <array>
#include <map>

namespace histcad {

namespace {

// Forward-mode dual number over the (at most 12) parameters of the two
// primitives a constraint touches.
constexpr int kMaxLocal = 12;

struct Jet {
    double v = 0.0;
    std::array<double, kMaxLocal> d{};

    Jet() = default;
    Jet(double value) : v(value) {}  // NOLINT: implicit constants
};

Jet operator+(Jet a, const Jet& b) {
    a.v += b.v;
    for (int i = 0; i < kMaxLocal; ++i) a.d[i] += b.d[i];
    return a;
}
Jet operator-(Jet a, const Jet& b) {
    a.v -= b.v;
    for (int i = 0; i < kMaxLocal; ++i) a.d[i] -= b.d[i];
    return a;
}
Jet operator-(Jet a) {
    a.v = -a.v;
    for (auto& x : a.d) x = -x;
    return a;
}
Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v * b.v;
    for (int i = 0; i < kMaxLocal; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
Jet operator/(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v / b.v;
    const double inv = 1.0 / b.v;
    for (int i = 0; i < kMaxLocal; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
}

double value_of(double x) { return x; }
double value_of(const Jet& x) { return x.v; }

// sqrt with a zero derivative at the origin (distance residuals at
// coincidence).
double safe_sqrt(double x) { return std::sqrt(x); }
Jet safe_sqrt(const Jet& x) {
    Jet r;
    r.v = std::sqrt(x.v);
    if (r.v > 0.0) {
        const double s = 0.5 / r.v;
        for (int i = 0; i < kMaxLocal; ++i) r.d[i] = x.d[i] * s;
    }
    return r;
}

template <class T>
T abs_of(const T& x) {
    return value_of(x) < 0.0 ? T(-x) : x;
}

template <class T>
struct P2 {
    T x, y;
};

template <class T>
P2<T> sub(const P2<T>& a, const P2<T>& b) {
    return {a.x - b.x, a.y - b.y};
}
template <class T>
T dot(const P2<T>& a, const P2<T>& b) {
    return a.x * b.x + a.y * b.y;
}
template <class T>
T cross(const P2<T>& a, const P2<T>& b) {
    return a.x * b.y - a.y * b.x;
}
template <class T>
T norm(const P2<T>& a) {
    return safe_sqrt(dot(a, a));
}

[[noreturn]] void undefined(const std::string& msg) { throw Error(ErrorCode::UndefinedResidual, msg); }

// View of one primitive's parameters as scalars of type T.
template <class T>
struct PrimView {
    PrimitiveKind kind;
    const T* p;
    const std::string* id;

    P2<T> pt(int i) const { return {p[2 * i], p[2 * i + 1]}; }

    P2<T> line_dir_unit() const {
        const P2<T> d = sub(pt(1), pt(0));
        const T len = norm(d);
        const double scale = 1.0 + std::max({std::abs(value_of(p[0])), std::abs(value_of(p[1])),
                                             std::abs(value_of(p[2])), std::abs(value_of(p[3]))});
        if (!(value_of(len) > 1e-14 * scale)) {
            undefined("line " + *id + " has zero length");
        }
        return {d.x / len, d.y / len};
    }

    T line_length() const { return norm(sub(pt(1), pt(0))); }

    P2<T> center() const {
        if (kind == PrimitiveKind::Circle) {
            return pt(0);
        }
        // Circumcenter of start/mid/end, relative to start for precision.
        const P2<T> a = pt(0);
        const P2<T> b = sub(pt(1), a);
        const P2<T> c = sub(pt(2), a);
        const T den = T(2.0) * cross(b, c);
        const double scale = std::max(value_of(dot(b, b)), value_of(dot(c, c)));
        if (!(std::abs(value_of(den)) > 1e-14 * scale) || scale == 0.0) {
            undefined("arc " + *id + " has collinear points");
        }
        const T b2 = dot(b, b);
        const T c2 = dot(c, c);
        return {a.x + (c.y * b2 - b.y * c2) / den, a.y + (b.x * c2 - c.x * b2) / den};
    }

    T radius() const {
        if (kind == PrimitiveKind::Circle) {
            return p[2];
        }
        return norm(sub(pt(0), center()));
    }

    P2<T> anchor(Anchor a) const {
        switch (a) {
        case Anchor::Start: return pt(0);
        case Anchor::End: return kind == PrimitiveKind::Line ? pt(1) : pt(2);
        case Anchor::Center: return center();
        case Anchor::Whole: break;
        }
        undefined("anchor is not a point");
    }
};

template <class T>
void eval_block(const ResidualSystem::Block& b, const PrimView<T>& a, const PrimView<T>* other, T* out,
                TangentBranch* chosen = nullptr) {
    switch (b.kind) {
    case ConstraintKind::Coincident: {
        const P2<T> d = sub(a.anchor(b.anchor[0]), other->anchor(b.anchor[1]));
        out[0] = d.x;
        out[1] = d.y;
        return;
    }
    case ConstraintKind::Parallel: out[0] = cross(a.line_dir_unit(), other->line_dir_unit()); return;
    case ConstraintKind::Perpendicular: out[0] = dot(a.line_dir_unit(), other->line_dir_unit()); return;
    case ConstraintKind::Horizontal: out[0] = a.line_dir_unit().y; return;
    case ConstraintKind::Vertical: out[0] = a.line_dir_unit().x; return;
    case ConstraintKind::Tangent: {
        if (a.kind == PrimitiveKind::Line || other->kind == PrimitiveKind::Line) {
            const PrimView<T>& line = a.kind == PrimitiveKind::Line ? a : *other;
            const PrimView<T>& curve = a.kind == PrimitiveKind::Line ? *other : a;
            const P2<T> u = line.line_dir_unit();
            const T dist = abs_of(cross(u, sub(curve.center(), line.pt(0))));
            out[0] = dist - curve.radius();
            return;
        }
        const T dist = norm(sub(a.center(), other->center()));
        const T r1 = a.radius();
        const T r2 = other->radius();
        const T ext = dist - (r1 + r2);
        const T in = dist - abs_of(T(r1 - r2));
        TangentBranch branch = b.branch;
        if (chosen != nullptr) {
            branch = std::abs(value_of(in)) < std::abs(value_of(ext)) ? TangentBranch::Internal
                                                                      : TangentBranch::External;
            *chosen = branch;
        }
        out[0] = branch == TangentBranch::External ? ext : in;
        return;
    }
    case ConstraintKind::Equal:
        out[0] = a.kind == PrimitiveKind::Line ? T(a.line_length() - other->line_length())
                                               : T(a.radius() - other->radius());
        return;
    case ConstraintKind::Concentric: out[0] = norm(sub(a.center(), other->center())); return;
    case ConstraintKind::Fix: {
        if (b.anchor[0] == Anchor::Whole) {
            for (std::size_t i = 0; i < b.values.size(); ++i) out[i] = a.p[i] - T(b.values[i]);
        } else {
            const P2<T> q = a.anchor(b.anchor[0]);
            out[0] = q.x - T(b.values[0]);
            out[1] = q.y - T(b.values[1]);
        }
        return;
    }
    case ConstraintKind::Normal: {
        const PrimView<T>& line = a.kind == PrimitiveKind::Line ? a : *other;
        const PrimView<T>& curve = a.kind == PrimitiveKind::Line ? *other : a;
        const P2<T> u = line.line_dir_unit();
        const P2<T> c = curve.center();
        const P2<T> e0 = sub(line.pt(0), c);
        const P2<T> e1 = sub(line.pt(1), c);
        const P2<T> e = value_of(dot(e0, e0)) <= value_of(dot(e1, e1)) ? e0 : e1;
        const T len = norm(e);
        if (!(value_of(len) > 0.0)) {
            undefined("normal constraint contact point coincides with the center");
        }
        const P2<T> w{e.x / len, e.y / len};
        const P2<T> tangent{-w.y, w.x};
        out[0] = dot(u, tangent);
        return;
    }
    }
}

std::size_t rows_for(const ResidualSystem::Block& b) {
    if (b.kind == ConstraintKind::Coincident) return 2;
    if (b.kind == ConstraintKind::Fix) return b.values.size();
    return 1;
}

std::size_t param_count(PrimitiveKind k) { return curve_param_names(k).size(); }

// Resolves a constraint's refs against a sketch into a block (rows unset).
ResidualSystem::Block make_block(const Constraint& c, std::size_t index, const Sketch& sketch,
                                 const std::map<std::string, int, std::less<>>& ids) {
    ResidualSystem::Block b;
    b.kind = c.kind;
    b.constraint_index = index;
    b.values = c.values;
    const std::string label(constraint_kind_name(c.kind));
    if (c.refs.size() != constraint_arity(c.kind)) {
        throw Error(ErrorCode::InvalidArgument, label + " constraint has wrong arity");
    }
    std::vector<RefShape> shapes;
    for (std::size_t i = 0; i < c.refs.size(); ++i) {
        const auto it = ids.find(c.refs[i].id);
        if (it == ids.end()) {
            throw Error(ErrorCode::InvalidArgument, label + " references missing primitive " + c.refs[i].id);
        }
        b.prim[i] = it->second;
        b.anchor[i] = c.refs[i].anchor;
        shapes.push_back({sketch.primitives[it->second].kind(), c.refs[i].anchor});
    }
    if (!constraint_shape_legal(c.kind, shapes)) {
        throw Error(ErrorCode::InvalidArgument, label + " constraint has illegal references");
    }
    if (c.kind == ConstraintKind::Fix) {
        const auto expect = fix_values_for(sketch.primitives[b.prim[0]].curve, b.anchor[0]).size();
        if (b.values.size() != expect) {
            b.values = fix_values_for(sketch.primitives[b.prim[0]].curve, b.anchor[0]);
        }
    }
    b.rows = rows_for(b);
    return b;
}

std::map<std::string, int, std::less<>> id_index(const Sketch& sketch) {
    std::map<std::string, int, std::less<>> ids;
    for (std::size_t i = 0; i < sketch.primitives.size(); ++i) {
        ids.emplace(sketch.primitives[i].id, static_cast<int>(i));
    }
    return ids;
}

std::vector<double> eval_double(const ResidualSystem::Block& b, const Sketch& sketch,
                                TangentBranch* chosen = nullptr) {
    std::vector<double> pa = curve_params(sketch.primitives[b.prim[0]].curve);
    std::vector<double> pb;
    PrimView<double> va{sketch.primitives[b.prim[0]].kind(), pa.data(), &sketch.primitives[b.prim[0]].id};
    PrimView<double> vb{};
    if (b.prim[1] >= 0) {
        pb = curve_params(sketch.primitives[b.prim[1]].curve);
        vb = {sketch.primitives[b.prim[1]].kind(), pb.data(), &sketch.primitives[b.prim[1]].id};
    }
    std::vector<double> out(b.rows);
    eval_block<double>(b, va, b.prim[1] >= 0 ? &vb : nullptr, out.data(), chosen);
    return out;
}

}  // namespace

std::vector<double> residual(const Constraint& c, const Sketch& sketch) {
    const auto b = make_block(c, 0, sketch, id_index(sketch));
    TangentBranch chosen{};
    return eval_double(b, sketch, &chosen);
}

bool SatisfactionReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.pass; });
}

double SatisfactionReport::max_residual() const {
    double m = 0.0;
    for (const auto& c : checks) {
        m = std::max(m, c.max_abs);
    }
    return m;
}

SatisfactionReport check_satisfied(const Sketch& sketch, double tol) {
    SatisfactionReport report;
    for (std::size_t i = 0; i < sketch.constraints.size(); ++i) {
        ConstraintCheck check;
        check.index = i;
        try {
            check.values = residual(sketch.constraints[i], sketch);
            for (const double v : check.values) {
                check.max_abs = std::max(check.max_abs, std::abs(v));
            }
            check.pass = check.max_abs <= tol;
        } catch (const Error& e) {
            check.error = e.what();
            check.max_abs = std::numeric_limits<double>::infinity();
            check.pass = false;
        }
        report.checks.push_back(std::move(check));
    }
    return report;
}

// ---------------------------------------------------------------------------

ResidualSystem ResidualSystem::build(const Sketch& sketch, const std::vector<Pin>& pins) {
    ResidualSystem sys;
    sys.sketch_ = sketch;
    std::size_t offset = 0;
    for (const auto& prim : sketch.primitives) {
        sys.param_offset_.push_back(offset);
        for (const double v : curve_params(prim.curve)) {
            sys.base_.push_back(v);
        }
        offset += param_count(prim.kind());
    }
    sys.free_index_.assign(offset, 0);

    const auto ids = id_index(sketch);
    for (const auto& pin : pins) {
        bool found = false;
        for (std::size_t i = 0; i < sketch.primitives.size() && !found; ++i) {
            const auto& prim = sketch.primitives[i];
            const auto& names = curve_param_names(prim.kind());
            for (std::size_t k = 0; k < names.size(); ++k) {
                if (pin.variable == prim.id + "." + names[k]) {
                    sys.base_[sys.param_offset_[i] + k] = pin.value;
                    sys.free_index_[sys.param_offset_[i] + k] = -1;
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            throw Error(ErrorCode::InvalidArgument, "unknown pin variable '" + pin.variable + "'");
        }
    }

    std::size_t row = 0;
    for (std::size_t ci = 0; ci < sketch.constraints.size(); ++ci) {
        Block b = make_block(sketch.constraints[ci], ci, sketch, ids);
        b.row = row;
        row += b.rows;
        if (b.kind == ConstraintKind::Tangent &&
            sketch.primitives[b.prim[0]].kind() != PrimitiveKind::Line &&
            sketch.primitives[b.prim[1]].kind() != PrimitiveKind::Line) {
            TangentBranch chosen{};
            eval_double(b, sketch, &chosen);
            b.branch = chosen;
        }
        // Fix holds its parameters: point anchors of lines/arcs and circle
        // centers map straight onto stored parameters.
        if (b.kind == ConstraintKind::Fix) {
            const std::size_t off = sys.param_offset_[b.prim[0]];
            const auto kind = sketch.primitives[b.prim[0]].kind();
            std::vector<std::size_t> held;
            if (b.anchor[0] == Anchor::Whole) {
                for (std::size_t k = 0; k < b.values.size(); ++k) held.push_back(k);
            } else if (b.anchor[0] == Anchor::Start || (b.anchor[0] == Anchor::Center && kind == PrimitiveKind::Circle)) {
                held = {0, 1};
            } else if (b.anchor[0] == Anchor::End) {
                held = kind == PrimitiveKind::Line ? std::vector<std::size_t>{2, 3} : std::vector<std::size_t>{4, 5};
            }
            // Arc centers are derived; they stay as residual rows.
            for (std::size_t k = 0; k < held.size(); ++k) {
                sys.base_[off + held[k]] = b.values[k];
                sys.free_index_[off + held[k]] = -1;
            }
        }
        sys.blocks_.push_back(std::move(b));
    }
    sys.residual_count_ = row;

    int next = 0;
    for (std::size_t p = 0; p < sys.free_index_.size(); ++p) {
        if (sys.free_index_[p] >= 0) {
            sys.free_index_[p] = next++;
            sys.free_params_.push_back(p);
        }
    }
    return sys;
}

Eigen::VectorXd ResidualSystem::initial() const {
    Eigen::VectorXd x(free_params_.size());
    for (std::size_t i = 0; i < free_params_.size(); ++i) {
        x[static_cast<Eigen::Index>(i)] = base_[free_params_[i]];
    }
    return x;
}

std::vector<double> ResidualSystem::full_params(const Eigen::VectorXd& x) const {
    std::vector<double> p = base_;
    for (std::size_t i = 0; i < free_params_.size(); ++i) {
        p[free_params_[i]] = x[static_cast<Eigen::Index>(i)];
    }
    return p;
}

Eigen::VectorXd ResidualSystem::residuals(const Eigen::VectorXd& x) const {
    const std::vector<double> p = full_params(x);
    Eigen::VectorXd r(static_cast<Eigen::Index>(residual_count_));
    std::vector<double> out;
    for (const auto& b : blocks_) {
        PrimView<double> va{sketch_.primitives[b.prim[0]].kind(), p.data() + param_offset_[b.prim[0]],
                            &sketch_.primitives[b.prim[0]].id};
        PrimView<double> vb{};
        if (b.prim[1] >= 0) {
            vb = {sketch_.primitives[b.prim[1]].kind(), p.data() + param_offset_[b.prim[1]],
                  &sketch_.primitives[b.prim[1]].id};
        }
        out.assign(b.rows, 0.0);
        eval_block<double>(b, va, b.prim[1] >= 0 ? &vb : nullptr, out.data());
        for (std::size_t k = 0; k < b.rows; ++k) {
            r[static_cast<Eigen::Index>(b.row + k)] = out[k];
        }
    }
    return r;
}

Eigen::SparseMatrix<double> ResidualSystem::jacobian(const Eigen::VectorXd& x) const {
    const std::vector<double> p = full_params(x);
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<Jet> local(kMaxLocal);
    std::vector<Jet> out;
    for (const auto& b : blocks_) {
        // Seed local parameters: first primitive then second (if distinct).
        std::vector<std::size_t> global;
        const int prims[2] = {b.prim[0], b.prim[1] == b.prim[0] ? -1 : b.prim[1]};
        std::size_t base_of[2] = {0, 0};
        for (int s = 0; s < 2; ++s) {
            if (prims[s] < 0) {
                base_of[s] = base_of[0];
                continue;
            }
            base_of[s] = global.size();
            const std::size_t n = param_count(sketch_.primitives[prims[s]].kind());
            for (std::size_t k = 0; k < n; ++k) {
                global.push_back(param_offset_[prims[s]] + k);
            }
        }
        for (std::size_t k = 0; k < global.size(); ++k) {
            local[k] = Jet(p[global[k]]);
            local[k].d.fill(0.0);
            local[k].d[k] = 1.0;
        }
        PrimView<Jet> va{sketch_.primitives[b.prim[0]].kind(), local.data() + base_of[0],
                         &sketch_.primitives[b.prim[0]].id};
        PrimView<Jet> vb{};
        if (b.prim[1] >= 0) {
            vb = {sketch_.primitives[b.prim[1]].kind(), local.data() + base_of[1], &sketch_.primitives[b.prim[1]].id};
        }
        out.assign(b.rows, Jet());
        eval_block<Jet>(b, va, b.prim[1] >= 0 ? &vb : nullptr, out.data());
        for (std::size_t r = 0; r < b.rows; ++r) {
            for (std::size_t k = 0; k < global.size(); ++k) {
                const int col = free_index_[global[k]];
                if (col >= 0 && out[r].d[k] != 0.0) {
                    trips.emplace_back(static_cast<int>(b.row + r), col, out[r].d[k]);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(residual_count_),
                                  static_cast<Eigen::Index>(free_params_.size()));
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
}

Sketch ResidualSystem::sketch_at(const Eigen::VectorXd& x) const {
    const std::vector<double> p = full_params(x);
    Sketch out = sketch_;
    for (std::size_t i = 0; i < out.primitives.size(); ++i) {
        auto& prim = out.primitives[i];
        const std::size_t n = param_count(prim.kind());
        std::vector<double> vals(p.begin() + static_cast<std::ptrdiff_t>(param_offset_[i]),
                                 p.begin() + static_cast<std::ptrdiff_t>(param_offset_[i] + n));
        prim.curve = curve_with_params(prim.curve, vals);
    }
    return out;
}

std::string ResidualSystem::variable_name(std::size_t i) const {
    const std::size_t param = free_params_.at(i);
    for (std::size_t k = param_offset_.size(); k-- > 0;) {
        if (param_offset_[k] <= param) {
            const auto& prim = sketch_.primitives[k];
            return prim.id + "." + curve_param_names(prim.kind())[param - param_offset_[k]];
        }
    }
    return {};
}

std::vector<std::vector<int>> ResidualSystem::dependencies() const {
    std::vector<std::vector<int>> deps;
    for (const auto& b : blocks_) {
        std::vector<int> cols;
        for (const int prim : b.prim) {
            if (prim < 0) continue;
            const std::size_t n = param_count(sketch_.primitives[prim].kind());
            for (std::size_t k = 0; k < n; ++k) {
                const int col = free_index_[param_offset_[prim] + k];
                if (col >= 0 && std::find(cols.begin(), cols.end(), col) == cols.end()) {
                    cols.push_back(col);
                }
            }
        }
        deps.push_back(std::move(cols));
    }
    return deps;
}

std::vector<std::string> ResidualSystem::branch_notes() const {
    std::vector<std::string> notes;
    for (const auto& b : blocks_) {
        if (b.kind == ConstraintKind::Tangent && sketch_.primitives[b.prim[0]].kind() != PrimitiveKind::Line &&
            sketch_.primitives[b.prim[1]].kind() != PrimitiveKind::Line) {
            notes.push_back("tangent " + sketch_.primitives[b.prim[0]].id + "/" + sketch_.primitives[b.prim[1]].id +
                            ": " + (b.branch == TangentBranch::External ? "external" : "internal"));
        }
    }
    return notes;
}

Eigen::SparseMatrix<double> jacobian(const ResidualSystem& system, const Eigen::VectorXd& x) {
    return system.jacobian(x);
}

}  // namespace histcad
