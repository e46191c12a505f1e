#pragma once

#include "histcad/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace histcad {

inline constexpr int kFormatVersion = 1;

struct ParseOptions {
    /// Reject unknown fields. In lenient mode they are reported as warnings.
    bool strict = true;
};

/// Parses canonical `.hcad` text. Throws ParseError with code SyntaxError
/// (line/column set), SchemaError (field path set) or DuplicateId.
Document parse_document(std::string_view text, const ParseOptions& options = {},
                        std::vector<std::string>* warnings = nullptr);

struct SerializeOptions {
    /// When set, every coordinate and length is rounded to this grid at
    /// export time. The in-memory document is never quantized.
    std::optional<double> quantize_step;
};

/// Default export grid: 1/255 of the model extent (8-bit style).
double default_quantize_step(const Document& doc);

/// Canonical `.hcad` text: primitives and constraints sorted, fixed key order,
/// shortest round-trip numbers. Byte-stable for structurally equal documents.
std::string serialize_document(const Document& doc, const SerializeOptions& options = {});

/// Sorts primitives by (kind, parameter tuple, id) and constraints by
/// (kind, sorted reference strings); wraps plane angles into (-pi, pi].
Document canonicalize(const Document& doc);

// ---------------------------------------------------------------------------
// Legacy hierarchical face-loop sketches (`.hier`)

struct LoopSegment {
    std::string id;
    Curve curve;
    /// Traversal runs end->start when set.
    bool reversed = false;

    Curve traversed() const { return reversed ? reversed_curve(curve) : curve; }
};

struct HierLoop {
    std::vector<LoopSegment> segments;
};

/// First loop is the outer boundary.
struct HierFace {
    std::vector<HierLoop> loops;
};

struct HierarchicalSketch {
    SketchPlane plane;
    std::vector<HierFace> faces;
    /// Constraints over the source curve ids, carried into the flat sketch by
    /// constraint migration.
    std::vector<Constraint> constraints;
};

struct HierarchicalImport {
    std::vector<HierarchicalSketch> sketches;
    std::vector<Extrusion> extrusions;
    std::vector<BooleanKind> booleans;
    std::string source;
};

/// Parses `.hier` text. Throws ParseError (SyntaxError, SchemaError,
/// DuplicateId), or Error with OpenLoop / UnsupportedCurve.
HierarchicalImport import_hierarchical(std::string_view text);

std::string export_hierarchical(const HierarchicalImport& data);

/// Bounding-box longest edge of all curves of a hierarchical sketch.
double hierarchical_extent(const HierarchicalSketch& sketch);

}  // namespace histcad
