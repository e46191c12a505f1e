#pragma once

#include "histcad/format.hpp"
#include "histcad/model.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace histcad {

/// Quantization of the matching tolerance for duplicate edges, relative to
/// the sketch extent.
inline constexpr double kKeyEpsRelative = 1e-6;

/// Direction-independent identity of a curve fragment: quantized sorted
/// endpoints (lines), sorted endpoints plus angular midpoint (arcs), center
/// and radius (circles).
struct SegmentKey {
    PrimitiveKind kind = PrimitiveKind::Line;
    std::array<std::int64_t, 6> q{};

    auto operator<=>(const SegmentKey&) const = default;
    bool operator==(const SegmentKey&) const = default;
};

SegmentKey segment_key(const Curve& c, double eps_key);

/// Lines and arcs oriented so the lexicographically smaller endpoint comes
/// first; circles unchanged.
Curve canonical_orientation(const Curve& c);

struct MinimalSegment {
    /// Fragment geometry in loop traversal order.
    Curve curve;
    std::string source_id;
    /// Position along the source curve's own direction.
    std::size_t fragment = 0;
    std::size_t fragment_count = 1;
    /// Traversal runs against the source curve's direction.
    bool reversed = false;

    /// Fragment geometry in the source curve's direction.
    Curve source_directed() const { return reversed ? reversed_curve(curve) : curve; }
};

struct MultisetEntry {
    Curve representative;  // canonical orientation
    int multiplicity = 0;
    std::vector<MinimalSegment> members;
};

struct Multiset {
    double eps_key = 0.0;
    double eps_geom = 0.0;
    std::map<SegmentKey, MultisetEntry> entries;

    void add(const MinimalSegment& seg);
    std::size_t size() const { return entries.size(); }
};

using DecomposedLoop = std::vector<MinimalSegment>;
using DecomposedFace = std::vector<DecomposedLoop>;

/// Splits collinear overlapping lines and co-circular overlapping arcs at
/// each other's endpoints so that any two fragments are identical or
/// interior-disjoint. Throws DegenerateSegment for fragments no longer than
/// the geometric tolerance.
std::vector<DecomposedFace> decompose(const HierarchicalSketch& sketch);

/// Keys whose total multiplicity is odd, each with multiplicity 1. Throws
/// NonMinimalOperands when segments under distinct keys partially overlap.
Multiset symmetric_difference(const std::vector<Multiset>& operands);

struct Fragment {
    std::string id;  // flat primitive id
    std::size_t index = 0;
    std::size_t count = 1;
    /// The flat primitive runs against the source curve's direction.
    bool reversed = false;
};

/// Source curve id -> surviving fragments.
using Provenance = std::map<std::string, std::vector<Fragment>>;

struct FlattenResult {
    Sketch sketch;
    Provenance provenance;
};

/// Symmetric difference over faces of the symmetric difference over each
/// face's loops. Output ids are L1.., C1.., A1.. in key order.
FlattenResult flatten_with_provenance(const HierarchicalSketch& sketch);

/// Flat primitive set without constraints.
Sketch flatten_sketch(const HierarchicalSketch& sketch);

/// Re-expresses source constraints on every surviving fragment; constraints
/// whose referents vanished are dropped. Fix values are left empty for the
/// caller to fill from the flat geometry.
std::vector<Constraint> migrate_constraints(const std::vector<Constraint>& source, const Provenance& provenance);

/// Continuity relations between sibling fragments of a split source curve:
/// Coincident at junctions, Parallel between line siblings, Equal between
/// arc siblings. Returns additions only.
std::vector<Constraint> add_auxiliary_constraints(const Sketch& sketch, const Provenance& provenance);

struct PruneLogEntry {
    Constraint constraint;
    std::string reason;
};

struct PruneResult {
    Sketch sketch;
    std::vector<PruneLogEntry> log;
};

/// Rule table:
///   duplicate                          drop later copy
///   Horizontal(a) + Vertical(a)        drop the one with larger residual
///                                      (Vertical on ties)
///   Parallel(a,b) + Perpendicular(a,b) drop the one with larger residual
///                                      (Perpendicular on ties)
///   Parallel(a,b), both H or both V    drop Parallel
///   Perpendicular(a,b), one H one V    drop Perpendicular
/// Everything else is kept.
PruneResult prune_constraints(const Sketch& sketch);

/// Order-insensitive identity used for duplicate detection.
Constraint canonical_constraint(const Constraint& c);

struct FlattenedPart {
    Sketch sketch;
    Provenance provenance;
    std::vector<PruneLogEntry> prune_log;
};

/// flatten, migrate, auxiliary constraints, prune.
FlattenedPart flatten_part(const HierarchicalSketch& sketch);

Document flatten_import(const HierarchicalImport& data, std::vector<PruneLogEntry>* prune_log = nullptr);

}  // namespace histcad
