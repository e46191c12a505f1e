#include "histcad/error.hpp"
#include "histcad/geomexec.hpp"

#include <cmath>

namespace histcad {

namespace {

std::vector<Vec2> profile_points(const Profile& p) {
    std::vector<Vec2> pts = p.outer;
    for (const auto& h : p.holes) pts.insert(pts.end(), h.begin(), h.end());
    return pts;
}

// Ring edges (i -> j) over the concatenated vertex list.
std::vector<std::pair<int, int>> ring_edges(const Profile& p) {
    std::vector<std::pair<int, int>> out;
    int off = 0;
    const auto add_ring = [&](std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            out.emplace_back(off + static_cast<int>(i), off + static_cast<int>((i + 1) % n));
        }
        off += static_cast<int>(n);
    };
    add_ring(p.outer.size());
    for (const auto& h : p.holes) add_ring(h.size());
    return out;
}

void flip(Mesh& m) {
    for (auto& t : m.triangles) std::swap(t[1], t[2]);
}

double extent_of(const std::vector<Vec2>& pts) {
    Box2 b;
    for (const auto& p : pts) b.add(p);
    return b.empty() ? 0.0 : b.extent().maxCoeff();
}

}  // namespace

Mesh extrude_linear(const Profile& profile, const SketchPlane& plane, const LinearExtrusion& ext) {
    const Vec3 n = plane.normal();
    const double dir_norm = ext.direction.norm();
    if (!(dir_norm > 0.0) || std::abs(ext.direction.dot(n)) / dir_norm < 1e-9) {
        throw Error(ErrorCode::DegenerateDirection, "extrusion direction lies in the sketch plane");
    }
    if (!(ext.length > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "extrusion length must be positive");
    }
    // Length is measured along the direction vector itself.
    const Vec3 d = ext.direction / dir_norm;
    double lo = 0.0, hi = ext.length;
    if (ext.symmetric) {
        lo = -0.5 * ext.length;
        hi = 0.5 * ext.length;
    } else if (ext.back_length > 0.0) {
        lo = -ext.back_length;
    }

    const std::vector<Vec2> pts = profile_points(profile);
    const int count = static_cast<int>(pts.size());
    Mesh m;
    for (const auto& p : pts) m.vertices.push_back(plane.to_world(p) + lo * d);
    for (const auto& p : pts) m.vertices.push_back(plane.to_world(p) + hi * d);
    for (const auto& t : triangulate(profile)) {
        m.triangles.push_back({t[0], t[2], t[1]});
        m.triangles.push_back({t[0] + count, t[1] + count, t[2] + count});
    }
    for (const auto& [i, j] : ring_edges(profile)) {
        m.triangles.push_back({i, j, j + count});
        m.triangles.push_back({i, j + count, i + count});
    }
    if (m.signed_volume() < 0.0) flip(m);
    return m;
}

Mesh extrude_rotated(const Profile& profile, const SketchPlane& plane, const RotatedExtrusion& ext) {
    const double sweep = ext.sweep();
    if (!(sweep > 0.0) || sweep > kTwoPi + 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "revolve sweep must lie in (0, 2pi]");
    }
    const Vec3 axis = ext.axis_dir.normalized();
    const std::vector<Vec2> pts = profile_points(profile);
    const double eps = geom_eps(extent_of(pts));

    std::vector<Vec3> world;
    std::vector<double> radial;
    for (const auto& p : pts) {
        const Vec3 w = plane.to_world(p);
        const Vec3 rel = w - ext.axis_point;
        world.push_back(w);
        radial.push_back((rel - rel.dot(axis) * axis).norm());
    }

    // The axis may not pass through the profile's interior.
    const Vec3 n = plane.normal();
    if (std::abs(axis.dot(n)) < 1e-9) {
        // Axis in (or parallel to) the sketch plane: all vertices on one side.
        const Vec3 side = axis.cross(n);
        double min_s = 0.0, max_s = 0.0;
        for (const auto& w : world) {
            const double s = (w - ext.axis_point).dot(side);
            min_s = std::min(min_s, s);
            max_s = std::max(max_s, s);
        }
        if (min_s < -eps && max_s > eps) {
            throw Error(ErrorCode::ProfileCrossesAxis, "profile lies on both sides of the revolve axis");
        }
    } else {
        const double t = (plane.translation - ext.axis_point).dot(n) / axis.dot(n);
        const Vec3 hit = ext.axis_point + t * axis;
        const Mat3 r = plane.rotation();
        const Vec3 local = r.transpose() * (hit - plane.translation);
        const Vec2 q(local.x(), local.y());
        bool inside = point_in_polygon_strict(profile.outer, q, eps);
        for (const auto& h : profile.holes) inside = inside && !point_in_polygon_strict(h, q, eps);
        if (inside) {
            throw Error(ErrorCode::ProfileCrossesAxis, "revolve axis pierces the profile");
        }
    }

    const bool full = sweep >= kTwoPi - 1e-9;
    const int steps = full ? kRevolveSteps
                           : std::max(1, static_cast<int>(std::ceil(kRevolveSteps * sweep / kTwoPi)));
    const int slices = full ? steps : steps + 1;
    const int count = static_cast<int>(pts.size());

    Mesh m;
    // Vertex index of profile vertex i at slice s; on-axis vertices are shared.
    std::vector<std::vector<int>> index(slices, std::vector<int>(count, -1));
    for (int i = 0; i < count; ++i) {
        if (radial[i] <= eps) {
            const int id = static_cast<int>(m.vertices.size());
            m.vertices.push_back(world[i]);
            for (int s = 0; s < slices; ++s) index[s][i] = id;
        }
    }
    for (int s = 0; s < slices; ++s) {
        const double angle = sweep * s / steps;
        for (int i = 0; i < count; ++i) {
            if (index[s][i] >= 0) continue;
            index[s][i] = static_cast<int>(m.vertices.size());
            m.vertices.push_back(rotate_about_axis(world[i], ext.axis_point, axis, angle));
        }
    }
    const auto tri = [&](int a, int b, int c) {
        if (a != b && b != c && a != c) m.triangles.push_back({a, b, c});
    };
    for (int s = 0; s < steps; ++s) {
        const auto& cur = index[s];
        const auto& nxt = index[(s + 1) % slices];
        for (const auto& [i, j] : ring_edges(profile)) {
            tri(cur[i], cur[j], nxt[j]);
            tri(cur[i], nxt[j], nxt[i]);
        }
    }
    if (!full) {
        const std::size_t side_count = m.triangles.size();
        const auto tris = triangulate(profile);
        for (const auto& t : tris) {
            tri(index[0][t[0]], index[0][t[2]], index[0][t[1]]);
            tri(index[steps][t[0]], index[steps][t[1]], index[steps][t[2]]);
        }
        if (!m.is_watertight()) {
            // Caps were wound against the sides.
            const auto flip_caps = [&] {
                for (std::size_t k = side_count; k < m.triangles.size(); ++k) {
                    std::swap(m.triangles[k][1], m.triangles[k][2]);
                }
            };
            flip_caps();
            if (!m.is_watertight()) flip_caps();
        }
    }
    if (m.signed_volume() < 0.0) flip(m);
    return m;
}

Mesh part_mesh(const Part& part) {
    std::vector<Profile> profiles;
    try {
        profiles = build_profiles(part.sketch);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SelfIntersectingProfile || e.code() == ErrorCode::AmbiguousTopology) throw;
        throw Error(ErrorCode::ExecutionFailed, e.what());
    }
    if (profiles.empty()) {
        throw Error(ErrorCode::ExecutionFailed, "sketch has no closed loop");
    }
    Mesh mesh;
    for (const auto& prof : profiles) {
        if (const auto* lin = std::get_if<LinearExtrusion>(&part.extrusion)) {
            mesh.append(extrude_linear(prof, part.sketch.plane, *lin));
        } else {
            mesh.append(extrude_rotated(prof, part.sketch.plane, std::get<RotatedExtrusion>(part.extrusion)));
        }
    }
    return mesh;
}

}  // namespace histcad
