#pragma once

// Independent reference computations used by property and acceptance tests.
// Nothing here calls into the code under test beyond plain data types.

#include "histcad/constraints.hpp"
#include "histcad/flatten.hpp"
#include "histcad/topology.hpp"
#include "support/generators.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace histcad::testing {

// ---------------------------------------------------------------------------
// Flatten parity

/// Unit grid edge: horizontal (x,y)-(x+1,y) when dir is 0, vertical
/// (x,y)-(x,y+1) when dir is 1.
using UnitEdge = std::tuple<int, int, int>;

struct GridParity {
    std::map<UnitEdge, int> edges;             // odd-count unit edges
    std::map<std::pair<int, int>, int> circles;  // odd-count circle cells
};

/// Counts every unit edge of every rectangle and every circle cell, face by
/// face then across faces, keeping odd counts.
GridParity grid_parity(const GridSketch& gs);

/// Checks that the flat primitives tile exactly the odd unit edges and odd
/// circles. Returns an empty string on success, otherwise a reason.
std::string compare_with_grid(const Sketch& flat, const GridSketch& gs);

/// Keys with odd multiplicity, computed face by face and then across faces by
/// linear scans over plain key lists.
std::vector<SegmentKey> brute_force_parity(const std::vector<DecomposedFace>& faces, double eps_key);

// ---------------------------------------------------------------------------
// Planar geometry

double shoelace_area(const std::vector<Vec2>& poly);  // signed
Vec2 polygon_centroid(const std::vector<Vec2>& poly);
/// Winding-number test; false within `eps` of the boundary.
bool inside_polygon(const std::vector<Vec2>& poly, const Vec2& p, double eps);
double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);
/// True when segments ab and cd share a point (within eps).
bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps);
/// Non-adjacent edges of the closed polyline touch.
bool polyline_self_intersects(const std::vector<Vec2>& poly, double eps);

/// Closed polyline through a loop's edges: line endpoints, arcs and circles
/// sampled at `per_turn` points per revolution (circumcenter computed here).
std::vector<Vec2> sample_loop(const std::vector<LoopEdge>& edges, int per_turn = 128);

/// Checks loop inference and outer/hole grouping against the generated
/// nesting: closure, simplicity, strict hole containment, area ordering and
/// outer/hole membership. Empty on success, otherwise a reason.
std::string check_arrangement(const Arrangement& arrangement, const LoopResult& loops, const LoopDict& dict);

/// Volume of revolving a region of area `area` with centroid distance
/// `radius` from the axis through `sweep` radians.
double pappus_volume(double area, double radius, double sweep);

// ---------------------------------------------------------------------------
// OBB overlap by sampling

double box_signed_distance(const OBB& box, const Vec3& p);

struct OverlapBound {
    /// Bracket on min over points of a of the signed distance to b.
    double lower = 0.0;
    double upper = 0.0;
    int evaluations = 0;
};

/// Branch and bound over a's volume with the 1-Lipschitz bound
/// f(center) - |half extents| per cell. Stops once the bracket lies outside
/// [-band, band] or the budget runs out.
OverlapBound min_signed_distance(const OBB& a, const OBB& b, double band, int budget = 200000);

enum class SampledRelation { Overlap, Apart, Undecided };

SampledRelation sampled_relation(const OBB& a, const OBB& b, double band, int budget = 200000);

// ---------------------------------------------------------------------------
// Constraints

/// Central differences of the stacked residuals with step h per variable.
Eigen::MatrixXd finite_difference_jacobian(const ResidualSystem& system, const Eigen::VectorXd& x, double h);

/// Largest entrywise |analytic - fd| / max(1, |analytic|, |fd|) at the
/// sketch's current geometry, with step 1e-6 times the sketch extent.
double jacobian_discrepancy(const Sketch& sketch);

// ---------------------------------------------------------------------------
// Metrics

double brute_force_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
double mean(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace histcad::testing
