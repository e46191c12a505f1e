#include "histcad/format.hpp"

#include "histcad/numfmt.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace histcad {
namespace detail {

namespace {

// DOM builder that turns every parser failure, including number overflow,
// into a located SyntaxError.
class LocatingSax : public nlohmann::detail::json_sax_dom_parser<json> {
public:
    LocatingSax(json& root, std::string_view text) : json_sax_dom_parser(root), text_(text) {}

    template <class Exception>
    bool parse_error(std::size_t position, const std::string& /*token*/, const Exception& ex) {
        // `position` counts characters read, so it points one past the offending one.
        const std::size_t offset = position > 0 ? std::min<std::size_t>(position - 1, text_.size()) : 0;
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i < offset; ++i) {
            if (text_[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string what = ex.what();
        if (const auto pos = what.find("] "); what.rfind("[json.exception", 0) == 0 && pos != std::string::npos) {
            what = what.substr(pos + 2);
        }
        if (const auto pos = what.find("syntax error"); pos != std::string::npos) {
            what = what.substr(pos);
        }
        throw ParseError(ErrorCode::SyntaxError, what, line, column);
    }

private:
    std::string_view text_;
};

}  // namespace

json parse_json_text(std::string_view text) {
    json root;
    LocatingSax sax(root, text);
    json::sax_parse(text.begin(), text.end(), &sax);
    return root;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed,
                const SchemaContext& ctx) {
    for (const auto& item : obj.items()) {
        const bool known = std::find(allowed.begin(), allowed.end(), item.key()) != allowed.end();
        if (known) {
            continue;
        }
        const std::string where = path + "/" + item.key();
        if (ctx.strict) {
            schema_error(where, "unknown field");
        }
        if (ctx.warnings != nullptr) {
            ctx.warnings->push_back("ignored unknown field " + where);
        }
    }
}

const json& require(const json& obj, std::string_view key, const std::string& path) {
    if (!obj.is_object()) {
        schema_error(path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        schema_error(path + "/" + std::string(key), "missing required field");
    }
    return *it;
}

const json& require_object(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_object()) {
        schema_error(path + "/" + std::string(key), "expected an object");
    }
    return v;
}

const json& require_array(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_array()) {
        schema_error(path + "/" + std::string(key), "expected an array");
    }
    return v;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        schema_error(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        schema_error(path, "number out of range");
    }
    return v;
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        schema_error(path, "expected a string");
    }
    return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) {
        schema_error(path, "expected a boolean");
    }
    return j.get<bool>();
}

namespace {

template <int N>
Eigen::Matrix<double, N, 1> as_vec(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
        schema_error(path, "expected an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) {
        v[i] = as_number(j[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
    }
    return v;
}

}  // namespace

Vec2 as_vec2(const json& j, const std::string& path) { return as_vec<2>(j, path); }
Vec3 as_vec3(const json& j, const std::string& path) { return as_vec<3>(j, path); }

SketchPlane read_plane(const json& j, const std::string& path, const SchemaContext& ctx) {
    if (!j.is_object()) {
        schema_error(path, "expected an object");
    }
    check_keys(j, path, {"translation", "euler"}, ctx);
    SketchPlane plane;
    plane.translation = as_vec3(require(j, "translation", path), path + "/translation");
    plane.euler = as_vec3(require(j, "euler", path), path + "/euler");
    return normalized_plane(plane);
}

Extrusion read_extrusion(const json& j, const std::string& path, const SchemaContext& ctx) {
    if (!j.is_object()) {
        schema_error(path, "expected an object");
    }
    const std::string type = as_string(require(j, "type", path), path + "/type");
    if (type == "linear") {
        check_keys(j, path, {"type", "direction", "length", "symmetric", "back_length"}, ctx);
        LinearExtrusion lin;
        lin.direction = as_vec3(require(j, "direction", path), path + "/direction");
        lin.length = as_number(require(j, "length", path), path + "/length");
        if (j.contains("symmetric")) {
            lin.symmetric = as_bool(j["symmetric"], path + "/symmetric");
        }
        if (j.contains("back_length")) {
            lin.back_length = as_number(j["back_length"], path + "/back_length");
        }
        return lin;
    }
    if (type == "rotated") {
        check_keys(j, path, {"type", "axis_point", "axis_dir", "start_angle", "end_angle"}, ctx);
        RotatedExtrusion rot;
        rot.axis_point = as_vec3(require(j, "axis_point", path), path + "/axis_point");
        rot.axis_dir = as_vec3(require(j, "axis_dir", path), path + "/axis_dir");
        rot.start_angle = as_number(require(j, "start_angle", path), path + "/start_angle");
        rot.end_angle = as_number(require(j, "end_angle", path), path + "/end_angle");
        return rot;
    }
    schema_error(path + "/type", "unknown extrusion type '" + type + "'");
}

BooleanKind read_boolean(const json& j, const std::string& path) {
    const std::string name = as_string(j, path);
    const auto kind = boolean_kind_from_name(name);
    if (!kind) {
        schema_error(path, "unknown boolean operation '" + name + "'");
    }
    return *kind;
}

Constraint read_constraint(const json& j, const std::string& path, const SchemaContext& ctx) {
    if (!j.is_object()) {
        schema_error(path, "expected an object");
    }
    check_keys(j, path, {"type", "refs", "values"}, ctx);
    const std::string type = as_string(require(j, "type", path), path + "/type");
    const auto kind = constraint_kind_from_name(type);
    if (!kind) {
        schema_error(path + "/type", "unknown constraint type '" + type + "'");
    }
    Constraint con;
    con.kind = *kind;
    const json& refs = require_array(j, "refs", path);
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const std::string text = as_string(refs[i], path + "/refs/" + std::to_string(i));
        if (text.empty()) {
            schema_error(path + "/refs/" + std::to_string(i), "empty reference");
        }
        con.refs.push_back(Ref::parse(text));
    }
    if (j.contains("values")) {
        const json& vals = j["values"];
        if (!vals.is_array()) {
            schema_error(path + "/values", "expected an array");
        }
        for (std::size_t i = 0; i < vals.size(); ++i) {
            con.values.push_back(as_number(vals[i], path + "/values/" + std::to_string(i)));
        }
    }
    return con;
}

std::string write_string(const std::string& s) { return json(s).dump(-1, ' ', false, json::error_handler_t::replace); }

std::string write_num(double v, double q) { return format_number(q > 0.0 ? quantize(v, q) : v); }

std::string write_vec(const Vec2& v, double q) { return "[" + write_num(v.x(), q) + ", " + write_num(v.y(), q) + "]"; }

std::string write_vec(const Vec3& v, double q) {
    return "[" + write_num(v.x(), q) + ", " + write_num(v.y(), q) + ", " + write_num(v.z(), q) + "]";
}

std::string write_plane(const SketchPlane& p, double q) {
    return "{\"translation\": " + write_vec(p.translation, q) + ", \"euler\": " + write_vec(p.euler, 0.0) + "}";
}

std::string write_extrusion(const Extrusion& e, double q) {
    if (const auto* lin = std::get_if<LinearExtrusion>(&e)) {
        std::string out = "{\"type\": \"linear\", \"direction\": " + write_vec(lin->direction, 0.0) +
                          ", \"length\": " + write_num(lin->length, q);
        if (lin->symmetric) {
            out += ", \"symmetric\": true";
        }
        if (lin->back_length != 0.0) {
            out += ", \"back_length\": " + write_num(lin->back_length, q);
        }
        return out + "}";
    }
    const auto& rot = std::get<RotatedExtrusion>(e);
    return "{\"type\": \"rotated\", \"axis_point\": " + write_vec(rot.axis_point, q) +
           ", \"axis_dir\": " + write_vec(rot.axis_dir, 0.0) + ", \"start_angle\": " + write_num(rot.start_angle, 0.0) +
           ", \"end_angle\": " + write_num(rot.end_angle, 0.0) + "}";
}

std::string write_constraint(const Constraint& c, double q) {
    std::string out = "{\"type\": \"" + std::string(constraint_kind_name(c.kind)) + "\", \"refs\": [";
    for (std::size_t i = 0; i < c.refs.size(); ++i) {
        out += (i ? ", " : "") + write_string(c.refs[i].str());
    }
    out += "]";
    if (!c.values.empty()) {
        out += ", \"values\": [";
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            out += (i ? ", " : "") + write_num(c.values[i], q);
        }
        out += "]";
    }
    return out + "}";
}

std::string write_curve_fields(const Curve& c, double q) {
    if (const auto* l = std::get_if<Line>(&c)) {
        return "\"type\": \"line\", \"start\": " + write_vec(l->start, q) + ", \"end\": " + write_vec(l->end, q);
    }
    if (const auto* ci = std::get_if<Circle>(&c)) {
        return "\"type\": \"circle\", \"center\": " + write_vec(ci->center, q) +
               ", \"radius\": " + write_num(ci->radius, q);
    }
    const auto& a = std::get<Arc>(c);
    return "\"type\": \"arc\", \"start\": " + write_vec(a.start, q) + ", \"mid\": " + write_vec(a.mid, q) +
           ", \"end\": " + write_vec(a.end, q);
}

}  // namespace detail

using namespace detail;

namespace {

Curve read_curve(const json& j, const std::string& path, const SchemaContext& ctx) {
    const std::string type = as_string(require(j, "type", path), path + "/type");
    if (type == "line") {
        check_keys(j, path, {"id", "type", "start", "end"}, ctx);
        return Line{as_vec2(require(j, "start", path), path + "/start"), as_vec2(require(j, "end", path), path + "/end")};
    }
    if (type == "circle") {
        check_keys(j, path, {"id", "type", "center", "radius"}, ctx);
        return Circle{as_vec2(require(j, "center", path), path + "/center"),
                      as_number(require(j, "radius", path), path + "/radius")};
    }
    if (type == "arc") {
        check_keys(j, path, {"id", "type", "start", "mid", "end"}, ctx);
        return Arc{as_vec2(require(j, "start", path), path + "/start"), as_vec2(require(j, "mid", path), path + "/mid"),
                   as_vec2(require(j, "end", path), path + "/end")};
    }
    schema_error(path + "/type", "unknown primitive type '" + type + "'");
}

Sketch read_sketch(const json& j, const std::string& path, const SchemaContext& ctx) {
    check_keys(j, path, {"plane", "primitives", "constraints"}, ctx);
    Sketch sketch;
    sketch.plane = read_plane(require(j, "plane", path), path + "/plane", ctx);
    const json& prims = require_array(j, "primitives", path);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < prims.size(); ++i) {
        const std::string p = path + "/primitives/" + std::to_string(i);
        if (!prims[i].is_object()) {
            schema_error(p, "expected an object");
        }
        Primitive prim;
        prim.id = as_string(require(prims[i], "id", p), p + "/id");
        if (prim.id.empty()) {
            schema_error(p + "/id", "empty primitive id");
        }
        if (!ids.insert(prim.id).second) {
            throw ParseError(ErrorCode::DuplicateId, "primitive id '" + prim.id + "' is not unique", 0, 0, p + "/id");
        }
        prim.curve = read_curve(prims[i], p, ctx);
        sketch.primitives.push_back(std::move(prim));
    }
    if (j.contains("constraints")) {
        const json& cons = require_array(j, "constraints", path);
        for (std::size_t i = 0; i < cons.size(); ++i) {
            Constraint con = read_constraint(cons[i], path + "/constraints/" + std::to_string(i), ctx);
            if (con.kind == ConstraintKind::Fix && con.values.empty() && con.refs.size() == 1) {
                if (const Primitive* target = sketch.find(con.refs[0].id)) {
                    con.values = fix_values_for(target->curve, con.refs[0].anchor);
                }
            }
            sketch.constraints.push_back(std::move(con));
        }
    }
    return sketch;
}

}  // namespace

Document parse_document(std::string_view text, const ParseOptions& options, std::vector<std::string>* warnings) {
    const json root = parse_json_text(text);
    const SchemaContext ctx{options.strict, warnings};
    if (!root.is_object()) {
        schema_error("", "document root must be an object");
    }
    check_keys(root, "", {"format_version", "metadata", "parts"}, ctx);
    const json& version = require(root, "format_version", "");
    if (!version.is_number_integer() || version.get<long long>() != kFormatVersion) {
        schema_error("/format_version", "unsupported format version");
    }
    Document doc;
    if (root.contains("metadata")) {
        const json& meta = require_object(root, "metadata", "");
        check_keys(meta, "/metadata", {"source", "scale"}, ctx);
        if (meta.contains("source")) {
            doc.metadata.source = as_string(meta["source"], "/metadata/source");
        }
        if (meta.contains("scale")) {
            doc.metadata.scale = as_number(meta["scale"], "/metadata/scale");
        }
    }
    const json& parts = require_array(root, "parts", "");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string path = "/parts/" + std::to_string(i);
        const json& pj = parts[i];
        if (!pj.is_object()) {
            schema_error(path, "expected an object");
        }
        check_keys(pj, path, {"sketch", "extrusion", "boolean"}, ctx);
        Part part;
        part.sketch = read_sketch(require_object(pj, "sketch", path), path + "/sketch", ctx);
        part.extrusion = read_extrusion(require(pj, "extrusion", path), path + "/extrusion", ctx);
        part.boolean = read_boolean(require(pj, "boolean", path), path + "/boolean");
        doc.parts.push_back(std::move(part));
    }
    return doc;
}

double default_quantize_step(const Document& doc) {
    const double extent = model_extent(doc);
    return (extent > 0.0 ? extent : 1.0) / 255.0;
}

namespace {

std::vector<std::string> sorted_ref_strings(const Constraint& c) {
    std::vector<std::string> out;
    for (const auto& r : c.refs) {
        out.push_back(r.str());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

Document canonicalize(const Document& doc) {
    Document out = doc;
    for (auto& part : out.parts) {
        part.sketch.plane = normalized_plane(part.sketch.plane);
        auto& prims = part.sketch.primitives;
        std::stable_sort(prims.begin(), prims.end(), [](const Primitive& a, const Primitive& b) {
            return std::forward_as_tuple(a.curve.index(), curve_params(a.curve), a.id) <
                   std::forward_as_tuple(b.curve.index(), curve_params(b.curve), b.id);
        });
        auto& cons = part.sketch.constraints;
        std::stable_sort(cons.begin(), cons.end(), [](const Constraint& a, const Constraint& b) {
            return std::make_tuple(static_cast<int>(a.kind), sorted_ref_strings(a), a.refs, a.values) <
                   std::make_tuple(static_cast<int>(b.kind), sorted_ref_strings(b), b.refs, b.values);
        });
    }
    return out;
}

std::string serialize_document(const Document& input, const SerializeOptions& options) {
    const Document doc = canonicalize(input);
    const double q = options.quantize_step.value_or(0.0);
    std::string out;
    out += "{\n";
    out += "  \"format_version\": " + std::to_string(kFormatVersion) + ",\n";
    out += "  \"metadata\": {\"source\": " + write_string(doc.metadata.source) +
           ", \"scale\": " + format_number(doc.metadata.scale) + "},\n";
    out += "  \"parts\": [";
    for (std::size_t i = 0; i < doc.parts.size(); ++i) {
        const Part& part = doc.parts[i];
        out += i ? ",\n" : "\n";
        out += "    {\n";
        out += "      \"sketch\": {\n";
        out += "        \"plane\": " + write_plane(part.sketch.plane, q) + ",\n";
        out += "        \"primitives\": [";
        const auto& prims = part.sketch.primitives;
        for (std::size_t k = 0; k < prims.size(); ++k) {
            out += k ? ",\n" : "\n";
            out += "          {\"id\": " + write_string(prims[k].id) + ", " + write_curve_fields(prims[k].curve, q) + "}";
        }
        out += prims.empty() ? "],\n" : "\n        ],\n";
        out += "        \"constraints\": [";
        const auto& cons = part.sketch.constraints;
        for (std::size_t k = 0; k < cons.size(); ++k) {
            out += k ? ",\n" : "\n";
            out += "          " + write_constraint(cons[k], q);
        }
        out += cons.empty() ? "]\n" : "\n        ]\n";
        out += "      },\n";
        out += "      \"extrusion\": " + write_extrusion(part.extrusion, q) + ",\n";
        out += "      \"boolean\": \"" + std::string(boolean_kind_name(part.boolean)) + "\"\n";
        out += "    }";
    }
    out += doc.parts.empty() ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
}

}  // namespace histcad
