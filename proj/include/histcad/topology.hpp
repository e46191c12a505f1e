#pragma once

#include "histcad/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace histcad {

struct LoopEdge {
    std::string id;
    /// Traversal runs end->start of the stored primitive.
    bool reversed = false;
    /// Geometry in traversal order.
    Curve curve;
};

struct Loop {
    std::vector<LoopEdge> edges;
    double area = 0.0;  // signed; positive (counter-clockwise) after normalization
    double perimeter = 0.0;
    Box2 bounds;

    std::vector<std::string> ids() const;
};

/// Exact signed area of a closed edge sequence (Green's theorem; arcs and
/// circles contribute their exact circular terms).
double loop_signed_area(const std::vector<LoopEdge>& edges);

/// Fills area, perimeter and bounds, reversing the loop when its area is
/// negative.
Loop make_loop(std::vector<LoopEdge> edges);

/// Closed polyline through the loop with arcs and circles sampled at
/// `segments_per_turn` chords per full revolution (at least 2 per arc).
std::vector<Vec2> loop_polyline(const Loop& loop, int segments_per_turn = 64);

struct LoopResult {
    /// Sorted by area descending, then bounds, perimeter and ids.
    std::vector<Loop> loops;
    /// Primitives on no closed cycle.
    std::vector<std::string> dangling;
};

/// Infers loops from connectivity. Circles are standalone loops; the line/arc
/// graph is traced face by face, continuing at branch vertices along the
/// smallest turn. Throws AmbiguousTopology when edges cross or a vertex keeps
/// an odd degree above one.
LoopResult compute_loops(const Sketch& sketch);

/// `inner` lies strictly inside `outer`: every polyline vertex of inner is
/// inside outer's polygon and no polyline edges cross.
bool loop_inside(const Loop& inner, const Loop& outer, double eps);

struct NamedLoop {
    std::string name;
    Loop loop;
};

struct OuterLoop {
    std::string name;  // outer_k
    Loop loop;
    std::vector<NamedLoop> holes;  // hole_k_j
};

struct LoopDict {
    std::vector<OuterLoop> outers;

    std::size_t hole_count() const;
};

/// Sorts by area descending; each loop becomes a hole of the first outer
/// that contains it, otherwise a new outer.
LoopDict build_loop_dict(const std::vector<Loop>& loops);

struct OBB {
    Vec3 center = Vec3::Zero();
    std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    Vec3 half_extents = Vec3::Zero();

    std::array<Vec3, 8> corners() const;
    double volume() const { return 8.0 * half_extents.prod(); }
    double diagonal() const { return 2.0 * half_extents.norm(); }
    /// Coordinates of p in the box frame, relative to the center.
    Vec3 local(const Vec3& p) const;
    bool contains(const Vec3& p, double slack) const;
};

/// Principal axes (columns, right-handed) of a point cloud.
Mat3 pca_frame(const std::vector<Vec3>& points);

/// Smallest box over the candidate frames (columns are axes), each refined by
/// rotations about each of its axes in 1 degree steps over [0, 90). Earlier
/// candidates win ties. With no candidates the PCA frame is used.
OBB compute_obb_points(const std::vector<Vec3>& points, const std::vector<Mat3>& candidate_frames = {});

/// Box over the executed mesh of a single part (before Boolean combination).
/// Candidate frames: the sketch plane frame, PCA, world. Throws DegenerateModel
/// for zero extent.
OBB compute_obb(const Part& part);

}  // namespace histcad
