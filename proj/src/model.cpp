#include "histcad/model.hpp"

#include "histcad/error.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace histcad {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::SyntaxError: return "SYNTAX_ERROR";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::OpenLoop: return "OPEN_LOOP";
    case ErrorCode::UnsupportedCurve: return "UNSUPPORTED_CURVE";
    case ErrorCode::DegenerateSegment: return "DEGENERATE_SEGMENT";
    case ErrorCode::NonMinimalOperands: return "NON_MINIMAL_OPERANDS";
    case ErrorCode::AmbiguousTopology: return "AMBIGUOUS_TOPOLOGY";
    case ErrorCode::DegenerateModel: return "DEGENERATE_MODEL";
    case ErrorCode::UndefinedResidual: return "UNDEFINED_RESIDUAL";
    case ErrorCode::SelfIntersectingProfile: return "SELF_INTERSECTING_PROFILE";
    case ErrorCode::DegenerateDirection: return "DEGENERATE_DIRECTION";
    case ErrorCode::ProfileCrossesAxis: return "PROFILE_CROSSES_AXIS";
    case ErrorCode::ExecutionFailed: return "EXECUTION_FAILED";
    case ErrorCode::EmptySet: return "EMPTY_SET";
    case ErrorCode::TransportError: return "TRANSPORT_ERROR";
    case ErrorCode::EmptyResponse: return "EMPTY_RESPONSE";
    case ErrorCode::NoInputs: return "NO_INPUTS";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    }
    return "UNKNOWN";
}

Mat3 SketchPlane::rotation() const {
    return (Eigen::AngleAxisd(euler.x(), Vec3::UnitX()) * Eigen::AngleAxisd(euler.y(), Vec3::UnitY()) *
            Eigen::AngleAxisd(euler.z(), Vec3::UnitZ()))
        .toRotationMatrix();
}

Vec3 SketchPlane::to_world(const Vec2& p) const {
    return translation + rotation() * Vec3(p.x(), p.y(), 0.0);
}

SketchPlane normalized_plane(const SketchPlane& plane) {
    SketchPlane out = plane;
    for (int i = 0; i < 3; ++i) {
        out.euler[i] = normalize_angle(plane.euler[i]);
    }
    return out;
}

PrimitiveKind curve_kind(const Curve& c) {
    return static_cast<PrimitiveKind>(c.index());
}

std::string_view primitive_kind_name(PrimitiveKind k) {
    switch (k) {
    case PrimitiveKind::Line: return "line";
    case PrimitiveKind::Circle: return "circle";
    case PrimitiveKind::Arc: return "arc";
    }
    return "unknown";
}

std::vector<double> curve_params(const Curve& c) {
    return std::visit(
        [](const auto& g) -> std::vector<double> {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Line>) {
                return {g.start.x(), g.start.y(), g.end.x(), g.end.y()};
            } else if constexpr (std::is_same_v<T, Circle>) {
                return {g.center.x(), g.center.y(), g.radius};
            } else {
                return {g.start.x(), g.start.y(), g.mid.x(), g.mid.y(), g.end.x(), g.end.y()};
            }
        },
        c);
}

Curve curve_with_params(const Curve& shape, const std::vector<double>& p) {
    switch (curve_kind(shape)) {
    case PrimitiveKind::Line: return Line{{p[0], p[1]}, {p[2], p[3]}};
    case PrimitiveKind::Circle: return Circle{{p[0], p[1]}, p[2]};
    case PrimitiveKind::Arc: return Arc{{p[0], p[1]}, {p[2], p[3]}, {p[4], p[5]}};
    }
    return shape;
}

const std::vector<std::string>& curve_param_names(PrimitiveKind k) {
    static const std::vector<std::string> line{"start.x", "start.y", "end.x", "end.y"};
    static const std::vector<std::string> circle{"center.x", "center.y", "radius"};
    static const std::vector<std::string> arc{"start.x", "start.y", "mid.x", "mid.y", "end.x", "end.y"};
    switch (k) {
    case PrimitiveKind::Line: return line;
    case PrimitiveKind::Circle: return circle;
    case PrimitiveKind::Arc: return arc;
    }
    return line;
}

Curve reversed_curve(const Curve& c) {
    if (const auto* l = std::get_if<Line>(&c)) {
        return Line{l->end, l->start};
    }
    if (const auto* a = std::get_if<Arc>(&c)) {
        return Arc{a->end, a->mid, a->start};
    }
    return c;
}

Vec2 curve_start(const Curve& c) {
    return std::visit(
        [](const auto& g) -> Vec2 {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return g.center + Vec2(g.radius, 0.0);
            } else {
                return g.start;
            }
        },
        c);
}

Vec2 curve_end(const Curve& c) {
    return std::visit(
        [](const auto& g) -> Vec2 {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return g.center + Vec2(g.radius, 0.0);
            } else {
                return g.end;
            }
        },
        c);
}

double curve_length(const Curve& c) {
    if (const auto* l = std::get_if<Line>(&c)) {
        return (l->end - l->start).norm();
    }
    if (const auto* ci = std::get_if<Circle>(&c)) {
        return kTwoPi * ci->radius;
    }
    const auto& a = std::get<Arc>(c);
    const auto p = arc_params(a.start, a.mid, a.end);
    return p ? p->length() : (a.end - a.start).norm();
}

Box2 curve_bounds(const Curve& c) {
    Box2 box;
    if (const auto* l = std::get_if<Line>(&c)) {
        box.add(l->start);
        box.add(l->end);
    } else if (const auto* ci = std::get_if<Circle>(&c)) {
        box.add(ci->center - Vec2::Constant(ci->radius));
        box.add(ci->center + Vec2::Constant(ci->radius));
    } else {
        const auto& a = std::get<Arc>(c);
        box.add(a.start);
        box.add(a.end);
        box.add(a.mid);
        if (const auto p = arc_params(a.start, a.mid, a.end)) {
            for (int q = 0; q < 4; ++q) {
                const double th = q * kPi / 2.0;
                if (angle_in_arc(*p, th)) {
                    box.add(p->center + p->radius * Vec2(std::cos(th), std::sin(th)));
                }
            }
        }
    }
    return box;
}

std::string_view constraint_kind_name(ConstraintKind k) {
    switch (k) {
    case ConstraintKind::Coincident: return "coincident";
    case ConstraintKind::Parallel: return "parallel";
    case ConstraintKind::Perpendicular: return "perpendicular";
    case ConstraintKind::Horizontal: return "horizontal";
    case ConstraintKind::Vertical: return "vertical";
    case ConstraintKind::Tangent: return "tangent";
    case ConstraintKind::Equal: return "equal";
    case ConstraintKind::Concentric: return "concentric";
    case ConstraintKind::Fix: return "fix";
    case ConstraintKind::Normal: return "normal";
    }
    return "unknown";
}

std::optional<ConstraintKind> constraint_kind_from_name(std::string_view name) {
    for (int i = 0; i < kConstraintKindCount; ++i) {
        const auto k = static_cast<ConstraintKind>(i);
        if (constraint_kind_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::size_t constraint_arity(ConstraintKind k) {
    switch (k) {
    case ConstraintKind::Horizontal:
    case ConstraintKind::Vertical:
    case ConstraintKind::Fix: return 1;
    default: return 2;
    }
}

bool constraint_is_symmetric(ConstraintKind k) {
    return constraint_arity(k) == 2 && k != ConstraintKind::Normal;
}

std::string_view anchor_name(Anchor a) {
    switch (a) {
    case Anchor::Whole: return "";
    case Anchor::Start: return "start";
    case Anchor::End: return "end";
    case Anchor::Center: return "center";
    }
    return "";
}

std::string Ref::str() const {
    if (anchor == Anchor::Whole) {
        return id;
    }
    return id + "." + std::string(anchor_name(anchor));
}

Ref Ref::parse(std::string_view text) {
    const auto dot = text.rfind('.');
    if (dot != std::string_view::npos) {
        const auto suffix = text.substr(dot + 1);
        for (const Anchor a : {Anchor::Start, Anchor::End, Anchor::Center}) {
            if (suffix == anchor_name(a)) {
                return Ref{std::string(text.substr(0, dot)), a};
            }
        }
    }
    return Ref{std::string(text), Anchor::Whole};
}

namespace {

bool is_curved(PrimitiveKind k) { return k == PrimitiveKind::Circle || k == PrimitiveKind::Arc; }

bool is_point_anchor(PrimitiveKind k, Anchor a) {
    switch (a) {
    case Anchor::Whole: return false;
    case Anchor::Start:
    case Anchor::End: return k != PrimitiveKind::Circle;
    case Anchor::Center: return is_curved(k);
    }
    return false;
}

}  // namespace

bool constraint_shape_legal(ConstraintKind k, const std::vector<RefShape>& r) {
    if (r.size() != constraint_arity(k)) {
        return false;
    }
    const auto whole = [&](std::size_t i) { return r[i].anchor == Anchor::Whole; };
    const auto line = [&](std::size_t i) { return r[i].kind == PrimitiveKind::Line; };
    const auto curved = [&](std::size_t i) { return is_curved(r[i].kind); };
    switch (k) {
    case ConstraintKind::Coincident:
        return is_point_anchor(r[0].kind, r[0].anchor) && is_point_anchor(r[1].kind, r[1].anchor);
    case ConstraintKind::Parallel:
    case ConstraintKind::Perpendicular: return line(0) && line(1) && whole(0) && whole(1);
    case ConstraintKind::Horizontal:
    case ConstraintKind::Vertical: return line(0) && whole(0);
    case ConstraintKind::Tangent: return whole(0) && whole(1) && !(line(0) && line(1));
    case ConstraintKind::Equal: return whole(0) && whole(1) && line(0) == line(1);
    case ConstraintKind::Concentric:
        return curved(0) && curved(1) && (whole(0) || r[0].anchor == Anchor::Center) &&
               (whole(1) || r[1].anchor == Anchor::Center);
    case ConstraintKind::Fix: return whole(0) || is_point_anchor(r[0].kind, r[0].anchor);
    case ConstraintKind::Normal: return whole(0) && whole(1) && line(0) != line(1);
    }
    return false;
}

std::string_view boolean_kind_name(BooleanKind k) {
    switch (k) {
    case BooleanKind::NewBody: return "new_body";
    case BooleanKind::Join: return "join";
    case BooleanKind::Subtract: return "subtract";
    case BooleanKind::Intersect: return "intersect";
    }
    return "unknown";
}

std::optional<BooleanKind> boolean_kind_from_name(std::string_view name) {
    for (const auto k : {BooleanKind::NewBody, BooleanKind::Join, BooleanKind::Subtract, BooleanKind::Intersect}) {
        if (boolean_kind_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

const Primitive* Sketch::find(std::string_view id) const {
    for (const auto& p : primitives) {
        if (p.id == id) {
            return &p;
        }
    }
    return nullptr;
}

std::optional<Vec2> anchor_point(const Curve& c, Anchor a) {
    if (!is_point_anchor(curve_kind(c), a)) {
        return std::nullopt;
    }
    if (a == Anchor::Start) {
        return curve_start(c);
    }
    if (a == Anchor::End) {
        return curve_end(c);
    }
    if (const auto* ci = std::get_if<Circle>(&c)) {
        return ci->center;
    }
    const auto& arc = std::get<Arc>(c);
    if (const auto fit = circumcircle(arc.start, arc.mid, arc.end)) {
        return fit->center;
    }
    return std::nullopt;
}

std::vector<double> fix_values_for(const Curve& c, Anchor a) {
    if (a == Anchor::Whole) {
        return curve_params(c);
    }
    if (const auto p = anchor_point(c, a)) {
        return {p->x(), p->y()};
    }
    return {};
}

namespace {

// Exact world-space bounds of a planar curve.
Box3 curve_world_bounds(const Curve& c, const SketchPlane& plane) {
    Box3 box;
    const Mat3 rot = plane.rotation();
    const Vec3 u = rot.col(0);
    const Vec3 v = rot.col(1);
    const auto world = [&](const Vec2& p) { return plane.translation + p.x() * u + p.y() * v; };
    const auto add_circle_extremes = [&](const Vec2& center, double r, const ArcParams* span) {
        for (int k = 0; k < 3; ++k) {
            const double base = std::atan2(v[k], u[k]);
            for (const double th : {base, base + kPi}) {
                if (span == nullptr || angle_in_arc(*span, th)) {
                    box.add(world(center + r * Vec2(std::cos(th), std::sin(th))));
                }
            }
        }
    };
    if (const auto* l = std::get_if<Line>(&c)) {
        box.add(world(l->start));
        box.add(world(l->end));
    } else if (const auto* ci = std::get_if<Circle>(&c)) {
        add_circle_extremes(ci->center, ci->radius, nullptr);
    } else {
        const auto& a = std::get<Arc>(c);
        box.add(world(a.start));
        box.add(world(a.end));
        if (const auto p = arc_params(a.start, a.mid, a.end)) {
            add_circle_extremes(p->center, p->radius, &*p);
        } else {
            box.add(world(a.mid));
        }
    }
    return box;
}

std::vector<Vec2> curve_samples(const Curve& c, int n) {
    std::vector<Vec2> pts;
    if (const auto* l = std::get_if<Line>(&c)) {
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            pts.push_back((1.0 - t) * l->start + t * l->end);
        }
    } else if (const auto* ci = std::get_if<Circle>(&c)) {
        for (int i = 0; i < n; ++i) {
            const double th = kTwoPi * i / n;
            pts.push_back(ci->center + ci->radius * Vec2(std::cos(th), std::sin(th)));
        }
    } else {
        const auto& a = std::get<Arc>(c);
        if (const auto p = arc_params(a.start, a.mid, a.end)) {
            for (int i = 0; i <= n; ++i) {
                pts.push_back(p->point_at(static_cast<double>(i) / n));
            }
        } else {
            pts = {a.start, a.mid, a.end};
        }
    }
    return pts;
}

}  // namespace

Box3 part_bounds(const Part& part) {
    Box3 box;
    const auto& plane = part.sketch.plane;
    if (const auto* lin = std::get_if<LinearExtrusion>(&part.extrusion)) {
        Box3 base;
        for (const auto& p : part.sketch.primitives) {
            base.add(curve_world_bounds(p.curve, plane));
        }
        if (base.empty()) {
            return box;
        }
        double lo = 0.0;
        double hi = lin->length;
        if (lin->symmetric) {
            lo = -0.5 * lin->length;
            hi = 0.5 * lin->length;
        } else if (lin->back_length > 0.0) {
            lo = -lin->back_length;
        }
        const Vec3 a = lo * lin->direction;
        const Vec3 b = hi * lin->direction;
        box.lo = base.lo + a.cwiseMin(b);
        box.hi = base.hi + a.cwiseMax(b);
        return box;
    }
    // Revolved parts: sampled curve points swept at fine angular steps.
    const auto& rot = std::get<RotatedExtrusion>(part.extrusion);
    const Vec3 axis = rot.axis_dir.normalized();
    constexpr int kSteps = 256;
    for (const auto& p : part.sketch.primitives) {
        for (const auto& q : curve_samples(p.curve, 64)) {
            const Vec3 w = plane.to_world(q);
            for (int k = 0; k <= kSteps; ++k) {
                const double th = rot.start_angle + rot.sweep() * k / kSteps;
                box.add(rotate_about_axis(w, rot.axis_point, axis, th - rot.start_angle));
            }
        }
    }
    return box;
}

Box3 document_bounds(const Document& doc) {
    Box3 box;
    for (const auto& part : doc.parts) {
        box.add(part_bounds(part));
    }
    return box;
}

double model_extent(const Document& doc) {
    const Box3 box = document_bounds(doc);
    return box.empty() ? 0.0 : box.longest_edge();
}

double sketch_extent(const Sketch& sketch) {
    Box2 box;
    for (const auto& p : sketch.primitives) {
        const Box2 b = curve_bounds(p.curve);
        if (!b.empty()) {
            box.add(b.lo);
            box.add(b.hi);
        }
    }
    return box.empty() ? 0.0 : box.extent().maxCoeff();
}

double geom_eps(double extent) {
    return kGeomEpsRelative * (extent > 0.0 && std::isfinite(extent) ? extent : 1.0);
}

// ---------------------------------------------------------------------------

std::string_view violation_code_name(ViolationCode c) {
    switch (c) {
    case ViolationCode::EmptyDocument: return "EMPTY_DOCUMENT";
    case ViolationCode::FirstNotNewBody: return "FIRST_NOT_NEW_BODY";
    case ViolationCode::NonFiniteValue: return "NONFINITE_VALUE";
    case ViolationCode::AngleNotNormalized: return "ANGLE_NOT_NORMALIZED";
    case ViolationCode::DuplicateId: return "DUPLICATE_ID";
    case ViolationCode::LineDegenerate: return "LINE_DEGENERATE";
    case ViolationCode::RadiusNonpositive: return "RADIUS_NONPOSITIVE";
    case ViolationCode::ArcCollinear: return "ARC_COLLINEAR";
    case ViolationCode::DanglingRef: return "DANGLING_REF";
    case ViolationCode::ArityMismatch: return "ARITY_MISMATCH";
    case ViolationCode::IllegalAnchor: return "ILLEGAL_ANCHOR";
    case ViolationCode::FixValuesMismatch: return "FIX_VALUES_MISMATCH";
    case ViolationCode::DirectionNotUnit: return "DIRECTION_NOT_UNIT";
    case ViolationCode::LengthNonpositive: return "LENGTH_NONPOSITIVE";
    case ViolationCode::ExtrusionModeConflict: return "EXTRUSION_MODE_CONFLICT";
    case ViolationCode::SweepOutOfRange: return "SWEEP_OUT_OF_RANGE";
    }
    return "UNKNOWN";
}

namespace {

constexpr double kUnitTol = 1e-9;

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool document_finite(const Document& doc) {
    for (const auto& part : doc.parts) {
        if (!part.sketch.plane.translation.allFinite() || !part.sketch.plane.euler.allFinite()) {
            return false;
        }
        for (const auto& p : part.sketch.primitives) {
            if (!all_finite(curve_params(p.curve))) {
                return false;
            }
        }
    }
    return true;
}

void validate_part(const Part& part, std::size_t index, double eps, double extent,
                   std::vector<Violation>& out) {
    const auto add = [&](ViolationCode code, std::string prim, std::string msg) {
        out.push_back(Violation{code, index, std::move(prim), std::move(msg)});
    };
    const auto& plane = part.sketch.plane;
    if (!plane.translation.allFinite() || !plane.euler.allFinite()) {
        add(ViolationCode::NonFiniteValue, "", "sketch plane has non-finite values");
    } else {
        for (int i = 0; i < 3; ++i) {
            if (normalize_angle(plane.euler[i]) != plane.euler[i]) {
                add(ViolationCode::AngleNotNormalized, "", "euler angle outside (-pi, pi]");
                break;
            }
        }
    }

    std::set<std::string> seen;
    for (const auto& prim : part.sketch.primitives) {
        if (!seen.insert(prim.id).second) {
            add(ViolationCode::DuplicateId, prim.id, "primitive id used twice");
        }
        if (!all_finite(curve_params(prim.curve))) {
            add(ViolationCode::NonFiniteValue, prim.id, "non-finite parameter");
            continue;
        }
        if (const auto* l = std::get_if<Line>(&prim.curve)) {
            if ((l->end - l->start).norm() <= eps) {
                add(ViolationCode::LineDegenerate, prim.id, "line endpoints coincide");
            }
        } else if (const auto* c = std::get_if<Circle>(&prim.curve)) {
            if (!(c->radius > eps)) {
                add(ViolationCode::RadiusNonpositive, prim.id, "circle radius not positive");
            }
        } else {
            const auto& a = std::get<Arc>(prim.curve);
            const auto fit = circumcircle(a.start, a.mid, a.end);
            const double limit = (extent > 0.0 ? extent : 1.0) / kGeomEpsRelative;
            if (!fit || fit->radius >= limit || (a.start - a.end).norm() <= eps ||
                (a.start - a.mid).norm() <= eps || (a.mid - a.end).norm() <= eps) {
                add(ViolationCode::ArcCollinear, prim.id, "arc points collinear or coincident");
            }
        }
    }

    for (const auto& con : part.sketch.constraints) {
        const std::string label(constraint_kind_name(con.kind));
        if (con.refs.size() != constraint_arity(con.kind)) {
            add(ViolationCode::ArityMismatch, "", label + " takes " + std::to_string(constraint_arity(con.kind)) +
                                                      " reference(s)");
            continue;
        }
        std::vector<RefShape> shapes;
        bool dangling = false;
        for (const auto& ref : con.refs) {
            const Primitive* p = part.sketch.find(ref.id);
            if (p == nullptr) {
                add(ViolationCode::DanglingRef, ref.id, label + " references missing primitive " + ref.id);
                dangling = true;
                continue;
            }
            shapes.push_back({p->kind(), ref.anchor});
        }
        if (dangling) {
            continue;
        }
        if (!constraint_shape_legal(con.kind, shapes)) {
            add(ViolationCode::IllegalAnchor, con.refs.front().id, label + " has illegal reference kinds or anchors");
            continue;
        }
        if (con.kind == ConstraintKind::Fix) {
            const auto* p = part.sketch.find(con.refs[0].id);
            if (con.values.size() != fix_values_for(p->curve, con.refs[0].anchor).size() || !all_finite(con.values)) {
                add(ViolationCode::FixValuesMismatch, p->id, "fix values do not match the referenced parameters");
            }
        } else if (!con.values.empty()) {
            add(ViolationCode::FixValuesMismatch, con.refs.front().id, label + " carries pinned values");
        }
    }

    if (const auto* lin = std::get_if<LinearExtrusion>(&part.extrusion)) {
        if (!lin->direction.allFinite() || std::abs(lin->direction.norm() - 1.0) > kUnitTol) {
            add(ViolationCode::DirectionNotUnit, "", "extrusion direction is not unit length");
        }
        if (!(lin->length > 0.0) || !std::isfinite(lin->length) || lin->back_length < 0.0 ||
            !std::isfinite(lin->back_length)) {
            add(ViolationCode::LengthNonpositive, "", "extrusion length must be positive");
        }
        if (lin->symmetric && lin->back_length > 0.0) {
            add(ViolationCode::ExtrusionModeConflict, "", "symmetric and two-sided extrusion are exclusive");
        }
    } else {
        const auto& rot = std::get<RotatedExtrusion>(part.extrusion);
        if (!rot.axis_point.allFinite()) {
            add(ViolationCode::NonFiniteValue, "", "axis point has non-finite values");
        }
        if (!rot.axis_dir.allFinite() || std::abs(rot.axis_dir.norm() - 1.0) > kUnitTol) {
            add(ViolationCode::DirectionNotUnit, "", "rotation axis is not unit length");
        }
        const double sweep = rot.sweep();
        if (!std::isfinite(sweep) || !(sweep > 0.0) || sweep > kTwoPi * (1.0 + 1e-12)) {
            add(ViolationCode::SweepOutOfRange, "", "sweep must lie in (0, 2pi]");
        }
    }
}

}  // namespace

ValidationReport validate_document(const Document& doc) {
    ValidationReport report;
    if (doc.parts.empty()) {
        report.violations.push_back({ViolationCode::EmptyDocument, 0, "", "document has no parts"});
        return report;
    }
    if (doc.parts.front().boolean != BooleanKind::NewBody) {
        report.violations.push_back({ViolationCode::FirstNotNewBody, 0, "", "first part must create a new body"});
    }
    const double extent = document_finite(doc) ? model_extent(doc) : 0.0;
    const double eps = geom_eps(extent);
    for (std::size_t i = 0; i < doc.parts.size(); ++i) {
        validate_part(doc.parts[i], i, eps, std::isfinite(extent) ? extent : 0.0, report.violations);
    }
    return report;
}

Document scale_document(const Document& doc, double f) {
    Document out = doc;
    for (auto& part : out.parts) {
        part.sketch.plane.translation *= f;
        for (auto& prim : part.sketch.primitives) {
            auto params = curve_params(prim.curve);
            for (auto& v : params) {
                v *= f;
            }
            prim.curve = curve_with_params(prim.curve, params);
        }
        for (auto& con : part.sketch.constraints) {
            for (auto& v : con.values) {
                v *= f;
            }
        }
        if (auto* lin = std::get_if<LinearExtrusion>(&part.extrusion)) {
            lin->length *= f;
            lin->back_length *= f;
        } else {
            std::get<RotatedExtrusion>(part.extrusion).axis_point *= f;
        }
    }
    out.metadata.scale *= f;
    return out;
}

Document normalize_document(const Document& doc, double target_extent) {
    if (!(target_extent > 0.0) || !std::isfinite(target_extent)) {
        throw Error(ErrorCode::InvalidArgument, "target extent must be positive");
    }
    const double extent = model_extent(doc);
    if (!(extent > 0.0) || !std::isfinite(extent)) {
        throw Error(ErrorCode::DegenerateModel, "model bounding box has zero extent");
    }
    if (extent == target_extent) {
        return doc;
    }
    return scale_document(doc, target_extent / extent);
}

}  // namespace histcad
