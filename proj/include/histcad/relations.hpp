#pragma once

#include "histcad/topology.hpp"

#include <string_view>
#include <vector>

namespace histcad {

enum class RelType { Separate, Touch, Intersect, Contain, Contained };

std::string_view rel_type_name(RelType t);  // "separate", "touch", ...

/// World-frame directions, named "+X", "-X", ...
enum class Direction { PosX, NegX, PosY, NegY, PosZ, NegZ };

std::string_view direction_name(Direction d);
Direction opposite(Direction d);

/// 1e-6 times the mean diagonal of the two boxes.
double touch_epsilon(const OBB& a, const OBB& b);

struct SepAxis {
    Vec3 axis;
    double gap = 0.0;  // positive when the projections are disjoint
};

struct SatResult {
    bool collides = true;
    /// Every tested axis whose gap is at least -epsilon.
    std::vector<SepAxis> sep_axes;
};

/// Tests the 15 candidate axes (face normals of both boxes and their cross
/// products; near-parallel crosses with norm below 1e-9 are skipped).
SatResult sat_test(const OBB& a, const OBB& b);

/// Relation of `a` to `b`, e.g. Contained when a lies inside b.
RelType classify_relation(const OBB& a, const OBB& b);

inline constexpr double kDirectionThreshold = 0.25;

/// Where b's center lies relative to a's: a label per world axis whose
/// center offset exceeds theta times the largest projected half-extent sum
/// over the three axes.
std::vector<Direction> directional_labels(const OBB& a, const OBB& b, double theta = kDirectionThreshold);

struct Relation {
    std::size_t i = 0;
    std::size_t j = 0;
    RelType type = RelType::Separate;
    std::vector<Direction> labels;
};

struct RelationTable {
    /// Ordered pairs (i, j), i != j, sorted by (i, j).
    std::vector<Relation> entries;

    const Relation* find(std::size_t i, std::size_t j) const;
};

/// Each unordered pair is classified once; the reverse entry is its dual.
RelationTable build_relation_table(const std::vector<OBB>& boxes);

}  // namespace histcad
