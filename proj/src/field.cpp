#include "histcad/error.hpp"
#include "histcad/geomexec.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace histcad {

namespace {

constexpr float kBandCells = 3.0f;

Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// Edge function evaluated with a fixed vertex order so that triangles sharing
// an edge see exactly opposite values.
double edge_fn(int u, int v, const Vec2& pu, const Vec2& pv, const Vec2& p) {
    if (u < v) return cross2(pv - pu, p - pu);
    return -cross2(pu - pv, p - pv);
}

// Tie rule for points exactly on an edge: antisymmetric in direction, so of
// two triangles sharing the edge exactly one claims the point.
bool owns_edge(const Vec2& dir) { return dir.y() < 0.0 || (dir.y() == 0.0 && dir.x() > 0.0); }

int floor_index(double v) { return static_cast<int>(std::floor(v)); }
int ceil_index(double v) { return static_cast<int>(std::ceil(v)); }

}  // namespace

Grid make_grid(const Box3& bounds, int resolution) {
    if (bounds.empty() || !(bounds.longest_edge() > 0.0)) {
        throw Error(ErrorCode::DegenerateModel, "scene has zero extent");
    }
    if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "grid resolution must be at least 2");
    Grid g;
    g.h = bounds.longest_edge() / resolution;
    g.origin = bounds.lo - Vec3::Constant(2.0 * g.h);
    const Vec3 ext = bounds.extent();
    for (int a = 0; a < 3; ++a) {
        g.n[a] = static_cast<int>(std::ceil(ext[a] / g.h - 1e-9)) + 5;
    }
    return g;
}

SolidField SolidField::empty(const Grid& grid) {
    SolidField f;
    f.grid = grid;
    f.d.assign(grid.size(), kBandCells * static_cast<float>(grid.h));
    return f;
}

SolidField SolidField::from_mesh(const Mesh& mesh, const Grid& grid) {
    SolidField f = empty(grid);
    const double h = grid.h;
    const float band = kBandCells * static_cast<float>(h);
    const int nx = grid.n[0], ny = grid.n[1], nz = grid.n[2];

    // Inside/outside from winding numbers along +z rays through node columns.
    std::vector<std::vector<std::pair<double, int>>> columns(static_cast<std::size_t>(nx) * ny);
    for (const auto& t : mesh.triangles) {
        const Vec3& A = mesh.vertices[t[0]];
        const Vec3& B = mesh.vertices[t[1]];
        const Vec3& C = mesh.vertices[t[2]];
        const Vec2 a(A.x(), A.y()), b(B.x(), B.y()), c(C.x(), C.y());
        const double area2 = cross2(b - a, c - a);
        if (area2 == 0.0) continue;
        const double s = area2 > 0.0 ? 1.0 : -1.0;
        // Entering the solid from below crosses a downward-facing triangle.
        const int winding = area2 > 0.0 ? -1 : 1;
        const int i0 = std::max(0, ceil_index((std::min({a.x(), b.x(), c.x()}) - grid.origin.x()) / h));
        const int i1 = std::min(nx - 1, floor_index((std::max({a.x(), b.x(), c.x()}) - grid.origin.x()) / h));
        const int j0 = std::max(0, ceil_index((std::min({a.y(), b.y(), c.y()}) - grid.origin.y()) / h));
        const int j1 = std::min(ny - 1, floor_index((std::max({a.y(), b.y(), c.y()}) - grid.origin.y()) / h));
        const Vec3 normal = (B - A).cross(C - A);
        const std::array<std::pair<int, Vec2>, 3> v{{{t[0], a}, {t[1], b}, {t[2], c}}};
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                const Vec2 p(grid.origin.x() + h * i, grid.origin.y() + h * j);
                bool inside = true;
                for (int e = 0; e < 3 && inside; ++e) {
                    const auto& [iu, pu] = v[e];
                    const auto& [iv, pv] = v[(e + 1) % 3];
                    const double w = s * edge_fn(iu, iv, pu, pv, p);
                    if (w < 0.0) inside = false;
                    if (w == 0.0) inside = owns_edge(s * (pv - pu));
                }
                if (!inside) continue;
                const double z = A.z() - (normal.x() * (p.x() - A.x()) + normal.y() * (p.y() - A.y())) / normal.z();
                columns[static_cast<std::size_t>(j) * nx + i].emplace_back(z, winding);
            }
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            auto& col = columns[static_cast<std::size_t>(j) * nx + i];
            if (col.empty()) continue;
            std::sort(col.begin(), col.end());
            std::size_t next = 0;
            int wind = 0;
            for (int k = 0; k < nz; ++k) {
                const double z = grid.origin.z() + h * k;
                while (next < col.size() && col[next].first < z) wind += col[next++].second;
                if (wind > 0) f.d[grid.index(i, j, k)] = -band;
            }
            col.clear();
            col.shrink_to_fit();
        }
    }

    // Exact unsigned distances inside the band.
    for (const auto& t : mesh.triangles) {
        const Vec3& A = mesh.vertices[t[0]];
        const Vec3& B = mesh.vertices[t[1]];
        const Vec3& C = mesh.vertices[t[2]];
        Vec3 normal = (B - A).cross(C - A);
        const double nn = normal.norm();
        int lo[3], hi[3];
        for (int a = 0; a < 3; ++a) {
            const double mn = std::min({A[a], B[a], C[a]}) - band;
            const double mx = std::max({A[a], B[a], C[a]}) + band;
            lo[a] = std::max(0, ceil_index((mn - grid.origin[a]) / h));
            hi[a] = std::min(grid.n[a] - 1, floor_index((mx - grid.origin[a]) / h));
        }
        if (lo[0] > hi[0] || lo[1] > hi[1] || lo[2] > hi[2]) continue;
        // Sweep along the dominant normal axis, restricted to the slab around
        // the triangle's plane.
        int ax = 2;
        if (nn > 0.0) {
            normal /= nn;
            normal.cwiseAbs().maxCoeff(&ax);
        }
        const int u = (ax + 1) % 3, w = (ax + 2) % 3;
        for (int iu = lo[u]; iu <= hi[u]; ++iu) {
            for (int iw = lo[w]; iw <= hi[w]; ++iw) {
                int k0 = lo[ax], k1 = hi[ax];
                if (nn > 0.0 && std::abs(normal[ax]) > 1e-12) {
                    const double pu = grid.origin[u] + h * iu - A[u];
                    const double pw = grid.origin[w] + h * iw - A[w];
                    const double center = A[ax] - (normal[u] * pu + normal[w] * pw) / normal[ax];
                    const double half = band / std::abs(normal[ax]);
                    k0 = std::max(k0, ceil_index((center - half - grid.origin[ax]) / h));
                    k1 = std::min(k1, floor_index((center + half - grid.origin[ax]) / h));
                }
                int idx[3];
                idx[u] = iu;
                idx[w] = iw;
                for (int k = k0; k <= k1; ++k) {
                    idx[ax] = k;
                    const Vec3 p = grid.node(idx[0], idx[1], idx[2]);
                    const float dist = static_cast<float>((p - closest_on_triangle(p, A, B, C)).norm());
                    float& cell = f.d[grid.index(idx[0], idx[1], idx[2])];
                    if (dist < std::abs(cell)) cell = cell < 0.0f ? -dist : dist;
                }
            }
        }
    }
    return f;
}

double SolidField::volume() const {
    const double h = grid.h;
    double sum = 0.0;
    for (const float v : d) sum += std::clamp(0.5 - v / h, 0.0, 1.0);
    return sum * h * h * h;
}

void apply_boolean(SolidField& current, const SolidField& body, BooleanKind op) {
    if (current.d.size() != body.d.size()) {
        throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
    }
    auto& a = current.d;
    const auto& b = body.d;
    switch (op) {
    case BooleanKind::NewBody: a = b; break;
    case BooleanKind::Join:
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::min(a[i], b[i]);
        break;
    case BooleanKind::Subtract:
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i], -b[i]);
        break;
    case BooleanKind::Intersect:
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i], b[i]);
        break;
    }
}

Mesh SolidField::surface() const {
    Mesh mesh;
    const int nx = grid.n[0], ny = grid.n[1], nz = grid.n[2];
    std::unordered_map<std::uint64_t, int> edge_vertex;
    const auto vertex_on_edge = [&](std::size_t ga, std::size_t gb, const Vec3& pa, const Vec3& pb, float da,
                                    float db) {
        const std::uint64_t key = ga < gb ? (static_cast<std::uint64_t>(ga) << 32) | gb
                                          : (static_cast<std::uint64_t>(gb) << 32) | ga;
        const auto [it, inserted] = edge_vertex.emplace(key, static_cast<int>(mesh.vertices.size()));
        if (inserted) {
            const double t = static_cast<double>(da) / (static_cast<double>(da) - db);
            mesh.vertices.push_back(pa + t * (pb - pa));
        }
        return it->second;
    };
    // Cube corners by bit pattern (x, y, z); six tetrahedra around 0-7.
    static constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                        {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};
    std::size_t gidx[8];
    Vec3 pos[8];
    float val[8];
    for (int k = 0; k + 1 < nz; ++k) {
        for (int j = 0; j + 1 < ny; ++j) {
            for (int i = 0; i + 1 < nx; ++i) {
                int inside = 0;
                for (int c = 0; c < 8; ++c) {
                    const int ci = i + (c & 1), cj = j + ((c >> 1) & 1), ck = k + ((c >> 2) & 1);
                    gidx[c] = grid.index(ci, cj, ck);
                    val[c] = d[gidx[c]];
                    inside += val[c] < 0.0f;
                }
                if (inside == 0 || inside == 8) continue;
                for (int c = 0; c < 8; ++c) {
                    pos[c] = grid.node(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                }
                for (const auto& tet : kTets) {
                    int in[4], out[4], ni = 0, no = 0;
                    for (const int c : tet) {
                        if (val[c] < 0.0f) in[ni++] = c;
                        else out[no++] = c;
                    }
                    if (ni == 0 || no == 0) continue;
                    Vec3 cin = Vec3::Zero(), cout = Vec3::Zero();
                    for (int q = 0; q < ni; ++q) cin += pos[in[q]];
                    for (int q = 0; q < no; ++q) cout += pos[out[q]];
                    const Vec3 outward = cout / no - cin / ni;
                    // Orientation is decided on edge midpoints, which never
                    // degenerate, so it stays consistent when an interpolated
                    // vertex lands on a grid node.
                    struct Cut {
                        int v;
                        Vec3 mid;
                    };
                    const auto edge = [&](int a, int b) {
                        return Cut{vertex_on_edge(gidx[a], gidx[b], pos[a], pos[b], val[a], val[b]),
                                   0.5 * (pos[a] + pos[b])};
                    };
                    const auto emit = [&](const Cut& a, Cut b, Cut c) {
                        if ((b.mid - a.mid).cross(c.mid - a.mid).dot(outward) < 0.0) std::swap(b, c);
                        mesh.triangles.push_back({a.v, b.v, c.v});
                    };
                    if (ni == 1 || no == 1) {
                        const int lone = ni == 1 ? in[0] : out[0];
                        const int* others = ni == 1 ? out : in;
                        emit(edge(lone, others[0]), edge(lone, others[1]), edge(lone, others[2]));
                    } else {
                        const Cut a = edge(in[0], out[0]);
                        const Cut b = edge(in[0], out[1]);
                        const Cut c = edge(in[1], out[1]);
                        const Cut e = edge(in[1], out[0]);
                        emit(a, b, c);
                        emit(a, c, e);
                    }
                }
            }
        }
    }
    return mesh;
}

}  // namespace histcad
