#pragma once

// Internal helpers shared by the .hcad and .hier readers/writers.

#include "histcad/error.hpp"
#include "histcad/format.hpp"

#include <json.hpp>

#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace histcad::detail {

using nlohmann::json;

struct SchemaContext {
    bool strict = true;
    std::vector<std::string>* warnings = nullptr;
};

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
    throw ParseError(ErrorCode::SchemaError, msg, 0, 0, path);
}

/// Parses JSON text, translating failures into SyntaxError with line/column.
json parse_json_text(std::string_view text);

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed,
                const SchemaContext& ctx);

const json& require(const json& obj, std::string_view key, const std::string& path);
const json& require_object(const json& obj, std::string_view key, const std::string& path);
const json& require_array(const json& obj, std::string_view key, const std::string& path);
double as_number(const json& j, const std::string& path);
std::string as_string(const json& j, const std::string& path);
bool as_bool(const json& j, const std::string& path);
Vec2 as_vec2(const json& j, const std::string& path);
Vec3 as_vec3(const json& j, const std::string& path);

SketchPlane read_plane(const json& j, const std::string& path, const SchemaContext& ctx);
Extrusion read_extrusion(const json& j, const std::string& path, const SchemaContext& ctx);
BooleanKind read_boolean(const json& j, const std::string& path);
Constraint read_constraint(const json& j, const std::string& path, const SchemaContext& ctx);

// Writers emit canonical compact fragments.
std::string write_string(const std::string& s);
std::string write_vec(const Vec2& v, double q);
std::string write_vec(const Vec3& v, double q);
std::string write_num(double v, double q);
std::string write_plane(const SketchPlane& p, double q);
std::string write_extrusion(const Extrusion& e, double q);
std::string write_constraint(const Constraint& c, double q);
std::string write_curve_fields(const Curve& c, double q);

}  // namespace histcad::detail
