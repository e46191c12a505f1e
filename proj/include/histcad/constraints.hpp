#pragma once

#include "histcad/model.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace histcad {

/// Residual values of one constraint on the sketch's current geometry.
/// Units: sketch-plane lengths for positional kinds, unit-vector components
/// (dimensionless) for directional kinds.
///
///   Coincident     anchor point difference (2 values)
///   Parallel       cross(d1, d2) of unit directions
///   Perpendicular  dot(d1, d2)
///   Horizontal     y component of the unit direction
///   Vertical       x component of the unit direction
///   Tangent        line/curve: distance(center, line) - r
///                  curve/curve: |c1 - c2| - (r1 + r2) or |c1 - c2| - |r1 - r2|,
///                  whichever branch is smaller in magnitude
///   Equal          length or radius difference
///   Concentric     center distance
///   Fix            parameter deltas from the pinned values
///   Normal         dot of the line direction with the curve tangent at the
///                  contact point nearest the line's closer endpoint
///
/// Throws UndefinedResidual for zero-length lines or collinear arcs and
/// InvalidArgument for dangling references or illegal anchors.
std::vector<double> residual(const Constraint& c, const Sketch& sketch);

struct ConstraintCheck {
    std::size_t index = 0;
    bool pass = false;
    double max_abs = 0.0;
    std::vector<double> values;
    std::string error;  // non-empty when the residual is undefined
};

struct SatisfactionReport {
    std::vector<ConstraintCheck> checks;

    bool all_pass() const;
    double max_residual() const;
};

SatisfactionReport check_satisfied(const Sketch& sketch, double tol);

/// Scalar edit target, e.g. {"C1.radius", 2.0} or {"L1.start.x", 0.5}.
struct Pin {
    std::string variable;
    double value = 0.0;
};

enum class TangentBranch { External, Internal };

/// Stacked residuals of every constraint of a sketch over its free
/// parameters. Parameters pinned by edits or by Fix constraints are held at
/// their target values and excluded from the variable vector.
class ResidualSystem {
public:
    static ResidualSystem build(const Sketch& sketch, const std::vector<Pin>& pins = {});

    std::size_t variable_count() const { return free_params_.size(); }
    std::size_t residual_count() const { return residual_count_; }

    Eigen::VectorXd initial() const;
    Eigen::VectorXd residuals(const Eigen::VectorXd& x) const;
    /// Exact partial derivatives via forward-mode dual numbers.
    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) const;
    Sketch sketch_at(const Eigen::VectorXd& x) const;

    std::string variable_name(std::size_t i) const;
    /// Variable indices each constraint depends on.
    std::vector<std::vector<int>> dependencies() const;
    /// One entry per curve/curve tangent constraint: "<refs>: external".
    std::vector<std::string> branch_notes() const;

    struct Block {
        ConstraintKind kind;
        std::size_t constraint_index;
        int prim[2] = {-1, -1};
        Anchor anchor[2] = {Anchor::Whole, Anchor::Whole};
        TangentBranch branch = TangentBranch::External;
        std::vector<double> values;
        std::size_t row = 0;
        std::size_t rows = 0;
    };

private:
    Sketch sketch_;
    std::vector<std::size_t> param_offset_;  // per primitive
    std::vector<double> base_;               // all params, pins applied
    std::vector<int> free_index_;            // per param, -1 when held
    std::vector<std::size_t> free_params_;
    std::vector<Block> blocks_;
    std::size_t residual_count_ = 0;

    std::vector<double> full_params(const Eigen::VectorXd& x) const;
};

Eigen::SparseMatrix<double> jacobian(const ResidualSystem& system, const Eigen::VectorXd& x);

enum class SolveStatus { Converged, NoConvergence, Infeasible };

std::string_view solve_status_name(SolveStatus s);  // "converged", "NO_CONVERGENCE", "INFEASIBLE"

struct SolveOptions {
    int max_iterations = 200;
    /// Converged when max |residual| <= tolerance * sketch extent.
    double tolerance = 1e-8;
    /// Weight of the pull toward initial values for otherwise free variables.
    double regularization = 1e-6;
    double initial_damping = 1e-3;
};

struct SolveReport {
    SolveStatus status = SolveStatus::Converged;
    int iterations = 0;
    double initial_max_residual = 0.0;
    double max_residual = 0.0;
    std::size_t variables = 0;
    std::size_t residuals = 0;
    std::vector<std::string> notes;
};

struct SolveResult {
    Sketch sketch;
    SolveReport report;
};

/// Levenberg-Marquardt edit propagation: pins are applied, then every
/// constraint residual is driven to zero while unpinned geometry moves as
/// little as possible. Contradictions proven by the conflict detector yield
/// status Infeasible with the sketch unchanged; NoConvergence returns the
/// best iterate.
SolveResult solve(const Sketch& sketch, const std::vector<Pin>& pins = {}, const SolveOptions& options = {});

/// Rule-based contradiction finder: orientation parity over Parallel /
/// Perpendicular / Horizontal / Vertical, and pins that disagree with Fix
/// constraints or with each other. Returns one message per contradiction.
std::vector<std::string> detect_conflicts(const Sketch& sketch, const std::vector<Pin>& pins = {});

}  // namespace histcad
