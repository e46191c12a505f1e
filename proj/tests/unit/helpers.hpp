#pragma once

#include "histcad/format.hpp"
#include "histcad/model.hpp"
#include "histcad/topology.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace histcad::testing {

inline std::string fixture_path(const std::string& name) { return std::string(HISTCAD_FIXTURES) + "/" + name; }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Document load_fixture(const std::string& name) { return parse_document(read_text(fixture_path(name))); }

/// Counter-clockwise rectangle of four lines named prefix1..prefix4, bottom
/// edge first.
inline Sketch rect_sketch(double x0, double y0, double x1, double y1, const std::string& prefix = "L") {
    Sketch s;
    const Vec2 p[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    for (int i = 0; i < 4; ++i) s.primitives.push_back({prefix + std::to_string(i + 1), Line{p[i], p[(i + 1) % 4]}});
    return s;
}

/// Axis-aligned box [lo, lo + size] as a sketch on z = lo.z extruded along +z.
inline Part box_part(const Vec3& lo, const Vec3& size, BooleanKind op = BooleanKind::NewBody) {
    Part p;
    p.sketch = rect_sketch(lo.x(), lo.y(), lo.x() + size.x(), lo.y() + size.y());
    p.sketch.plane.translation = Vec3(0, 0, lo.z());
    p.extrusion = LinearExtrusion{Vec3::UnitZ(), size.z(), false, 0.0};
    p.boolean = op;
    return p;
}

inline Document single_part(Part p) {
    Document d;
    d.parts.push_back(std::move(p));
    return d;
}

inline OBB cube_obb(const Vec3& center, double half = 0.5, const Mat3& rotation = Mat3::Identity()) {
    OBB b;
    b.center = center;
    for (int a = 0; a < 3; ++a) b.axes[a] = rotation.col(a);
    b.half_extents = Vec3::Constant(half);
    return b;
}

}  // namespace histcad::testing
