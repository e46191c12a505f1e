#pragma once

#include "histcad/geometry.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace histcad {

/// Sketch plane placement. Euler angles use the intrinsic X-Y-Z convention:
/// R = Rx(a) * Ry(b) * Rz(c). Local sketch coordinates (u, v) map to
/// translation + R * (u, v, 0); the plane normal is R * e_z.
struct SketchPlane {
    Vec3 translation = Vec3::Zero();
    Vec3 euler = Vec3::Zero();

    Mat3 rotation() const;
    Vec3 normal() const { return rotation().col(2); }
    Vec3 to_world(const Vec2& p) const;

    bool operator==(const SketchPlane&) const = default;
};

/// Returns `plane` with every Euler angle wrapped into (-pi, pi].
SketchPlane normalized_plane(const SketchPlane& plane);

enum class PrimitiveKind { Line, Circle, Arc };

struct Line {
    Vec2 start = Vec2::Zero();
    Vec2 end = Vec2::Zero();
    bool operator==(const Line&) const = default;
};

struct Circle {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    bool operator==(const Circle&) const = default;
};

struct Arc {
    Vec2 start = Vec2::Zero();
    Vec2 mid = Vec2::Zero();
    Vec2 end = Vec2::Zero();
    bool operator==(const Arc&) const = default;
};

using Curve = std::variant<Line, Circle, Arc>;

PrimitiveKind curve_kind(const Curve& c);
std::string_view primitive_kind_name(PrimitiveKind k);

/// Flat parameter vector of a curve in declaration order:
/// Line (sx sy ex ey), Circle (cx cy r), Arc (sx sy mx my ex ey).
std::vector<double> curve_params(const Curve& c);
Curve curve_with_params(const Curve& shape, const std::vector<double>& params);
/// Field names matching curve_params, e.g. "start.x", "radius".
const std::vector<std::string>& curve_param_names(PrimitiveKind k);

Curve reversed_curve(const Curve& c);
Vec2 curve_start(const Curve& c);  // circles: the point at angle 0
Vec2 curve_end(const Curve& c);
double curve_length(const Curve& c);
Box2 curve_bounds(const Curve& c);

struct Primitive {
    std::string id;
    Curve curve;

    PrimitiveKind kind() const { return curve_kind(curve); }
    bool operator==(const Primitive&) const = default;
};

enum class ConstraintKind {
    Coincident,
    Parallel,
    Perpendicular,
    Horizontal,
    Vertical,
    Tangent,
    Equal,
    Concentric,
    Fix,
    Normal,
};

inline constexpr int kConstraintKindCount = 10;

std::string_view constraint_kind_name(ConstraintKind k);  // "coincident", ...
std::optional<ConstraintKind> constraint_kind_from_name(std::string_view name);
std::size_t constraint_arity(ConstraintKind k);

enum class Anchor { Whole, Start, End, Center };

std::string_view anchor_name(Anchor a);  // "", "start", "end", "center"

struct Ref {
    std::string id;
    Anchor anchor = Anchor::Whole;

    /// "L1" or "L1.start".
    std::string str() const;
    static Ref parse(std::string_view text);

    bool operator==(const Ref&) const = default;
    auto operator<=>(const Ref&) const = default;
};

struct Constraint {
    ConstraintKind kind = ConstraintKind::Coincident;
    std::vector<Ref> refs;
    /// Pinned parameter values for Fix (point anchors: x y; whole: all curve
    /// params). Empty for every other kind.
    std::vector<double> values;

    bool operator==(const Constraint&) const = default;
};

/// Kinds whose two refs are interchangeable.
bool constraint_is_symmetric(ConstraintKind k);

struct RefShape {
    PrimitiveKind kind;
    Anchor anchor;
};

/// Whether a constraint of kind `k` may reference primitives of these kinds
/// with these anchors (arity included).
bool constraint_shape_legal(ConstraintKind k, const std::vector<RefShape>& refs);

struct LinearExtrusion {
    Vec3 direction = Vec3::UnitZ();
    double length = 1.0;
    /// Extends length/2 to each side of the sketch plane.
    bool symmetric = false;
    /// Second-side depth for two-sided extrusion; 0 means one-sided.
    double back_length = 0.0;

    bool operator==(const LinearExtrusion&) const = default;
};

struct RotatedExtrusion {
    Vec3 axis_point = Vec3::Zero();
    Vec3 axis_dir = Vec3::UnitY();
    double start_angle = 0.0;
    double end_angle = kTwoPi;

    double sweep() const { return end_angle - start_angle; }
    bool operator==(const RotatedExtrusion&) const = default;
};

using Extrusion = std::variant<LinearExtrusion, RotatedExtrusion>;

enum class BooleanKind { NewBody, Join, Subtract, Intersect };

std::string_view boolean_kind_name(BooleanKind k);  // "new_body", ...
std::optional<BooleanKind> boolean_kind_from_name(std::string_view name);

struct Sketch {
    SketchPlane plane;
    std::vector<Primitive> primitives;
    std::vector<Constraint> constraints;

    const Primitive* find(std::string_view id) const;
    bool operator==(const Sketch&) const = default;
};

struct Part {
    Sketch sketch;
    Extrusion extrusion = LinearExtrusion{};
    BooleanKind boolean = BooleanKind::NewBody;

    bool operator==(const Part&) const = default;
};

struct DocumentMetadata {
    std::string source;
    double scale = 1.0;

    bool operator==(const DocumentMetadata&) const = default;
};

struct Document {
    std::vector<Part> parts;
    DocumentMetadata metadata;

    bool operator==(const Document&) const = default;
};

/// Point addressed by a point anchor (Start/End/Center); nullopt when the
/// anchor is not a point of that primitive kind.
std::optional<Vec2> anchor_point(const Curve& c, Anchor a);

/// Current parameter values a Fix constraint on `ref` pins.
std::vector<double> fix_values_for(const Curve& c, Anchor a);

/// Axis-aligned bounds of a part's swept solid in world coordinates.
Box3 part_bounds(const Part& part);
Box3 document_bounds(const Document& doc);

/// Longest edge of the document bounding box (0 for an empty document).
double model_extent(const Document& doc);
double sketch_extent(const Sketch& sketch);

/// Relative degeneracy tolerance: eps_geom = 1e-8 * extent.
inline constexpr double kGeomEpsRelative = 1e-8;
double geom_eps(double extent);

// ---------------------------------------------------------------------------
// Validation

enum class ViolationCode {
    EmptyDocument,
    FirstNotNewBody,
    NonFiniteValue,
    AngleNotNormalized,
    DuplicateId,
    LineDegenerate,
    RadiusNonpositive,
    ArcCollinear,
    DanglingRef,
    ArityMismatch,
    IllegalAnchor,
    FixValuesMismatch,
    DirectionNotUnit,
    LengthNonpositive,
    ExtrusionModeConflict,
    SweepOutOfRange,
};

std::string_view violation_code_name(ViolationCode c);

struct Violation {
    ViolationCode code;
    std::size_t part = 0;
    std::string primitive;  // id, or empty when not primitive-specific
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_document(const Document& doc);

/// Uniformly rescales `doc` so the longest edge of its bounding box equals
/// `target_extent`. Throws DegenerateModel for a zero-extent model and
/// InvalidArgument for a non-positive target.
Document normalize_document(const Document& doc, double target_extent);

/// Uniform scale about the world origin; angles and directions untouched.
Document scale_document(const Document& doc, double factor);

}  // namespace histcad
