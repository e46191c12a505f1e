#include "histcad/topology.hpp"

#include "histcad/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace histcad {

std::vector<std::string> Loop::ids() const {
    std::vector<std::string> out;
    for (const auto& e : edges) out.push_back(e.id);
    return out;
}

double loop_signed_area(const std::vector<LoopEdge>& edges) {
    double twice = 0.0;
    for (const auto& e : edges) {
        if (const auto* line = std::get_if<Line>(&e.curve)) {
            twice += cross2(line->start, line->end);
        } else if (const auto* circle = std::get_if<Circle>(&e.curve)) {
            twice += 2.0 * kPi * circle->radius * circle->radius;
        } else {
            const auto& arc = std::get<Arc>(e.curve);
            const auto ap = arc_params(arc.start, arc.mid, arc.end);
            if (!ap) {
                twice += cross2(arc.start, arc.end);
                continue;
            }
            const Vec2& c = ap->center;
            twice += ap->radius * ap->radius * ap->sweep + c.x() * (arc.end.y() - arc.start.y()) -
                     c.y() * (arc.end.x() - arc.start.x());
        }
    }
    return 0.5 * twice;
}

Loop make_loop(std::vector<LoopEdge> edges) {
    Loop loop;
    loop.area = loop_signed_area(edges);
    if (loop.area < 0.0) {
        std::reverse(edges.begin(), edges.end());
        for (auto& e : edges) {
            e.reversed = !e.reversed;
            e.curve = reversed_curve(e.curve);
        }
        loop.area = -loop.area;
    }
    for (const auto& e : edges) {
        loop.perimeter += curve_length(e.curve);
        const Box2 b = curve_bounds(e.curve);
        if (!b.empty()) {
            loop.bounds.add(b.lo);
            loop.bounds.add(b.hi);
        }
    }
    loop.edges = std::move(edges);
    return loop;
}

namespace {

std::vector<Vec2> edge_polyline(const Curve& c, int segments_per_turn) {
    std::vector<Vec2> pts;
    if (const auto* line = std::get_if<Line>(&c)) {
        return {line->start, line->end};
    }
    if (const auto* circle = std::get_if<Circle>(&c)) {
        const int n = std::max(8, segments_per_turn);
        for (int i = 0; i <= n; ++i) {
            const double t = kTwoPi * i / n;
            pts.push_back(circle->center + circle->radius * Vec2(std::cos(t), std::sin(t)));
        }
        return pts;
    }
    const auto& arc = std::get<Arc>(c);
    const auto ap = arc_params(arc.start, arc.mid, arc.end);
    if (!ap) return {arc.start, arc.end};
    const int n = std::max(2, static_cast<int>(std::ceil(std::abs(ap->sweep) / kTwoPi * segments_per_turn)));
    for (int i = 0; i <= n; ++i) {
        pts.push_back(i == 0 ? arc.start : i == n ? arc.end : ap->point_at(static_cast<double>(i) / n));
    }
    return pts;
}

// Direction of travel just after leaving the start of `c`.
double departure_angle(const Curve& c) {
    Vec2 d;
    if (const auto* line = std::get_if<Line>(&c)) {
        d = line->end - line->start;
    } else {
        const auto& arc = std::get<Arc>(c);
        const auto ap = arc_params(arc.start, arc.mid, arc.end);
        d = ap ? Vec2(ap->point_at(1e-3) - arc.start) : Vec2(arc.mid - arc.start);
    }
    return std::atan2(d.y(), d.x());
}

struct GraphEdge {
    std::size_t prim;
    int v[2];
};

bool bounds_overlap(const Box2& a, const Box2& b, double eps) {
    return !(a.hi.x() < b.lo.x() - eps || b.hi.x() < a.lo.x() - eps || a.hi.y() < b.lo.y() - eps ||
             b.hi.y() < a.lo.y() - eps);
}

// Point where segments ab and cd meet, if they do; collinear overlaps longer
// than eps report nullopt through `overlap`.
std::optional<Vec2> segment_contact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps,
                                    bool& overlap) {
    overlap = false;
    if (!segments_intersect(a, b, c, d, eps)) return std::nullopt;
    const Vec2 r = b - a;
    const Vec2 s = d - c;
    const double den = cross2(r, s);
    const double scale = r.norm() * s.norm();
    if (std::abs(den) > 1e-12 * scale) {
        const double t = std::clamp(cross2(c - a, s) / den, 0.0, 1.0);
        return a + t * r;
    }
    // Parallel: measure the overlap along r.
    const double rl = r.norm();
    if (rl == 0.0) return a;
    const Vec2 u = r / rl;
    const double t0 = (c - a).dot(u);
    const double t1 = (d - a).dot(u);
    const double lo = std::max(0.0, std::min(t0, t1));
    const double hi = std::min(rl, std::max(t0, t1));
    if (hi - lo > eps) {
        overlap = true;
        return std::nullopt;
    }
    return a + 0.5 * (lo + hi) * u;
}

}  // namespace

std::vector<Vec2> loop_polyline(const Loop& loop, int segments_per_turn) {
    std::vector<Vec2> out;
    for (const auto& e : loop.edges) {
        auto pts = edge_polyline(e.curve, segments_per_turn);
        out.insert(out.end(), pts.begin(), pts.end() - 1);
    }
    return out;
}

LoopResult compute_loops(const Sketch& sketch) {
    LoopResult result;
    double extent = sketch_extent(sketch);
    if (!(extent > 0.0)) extent = 1.0;
    const double eps = geom_eps(extent);
    const double contact_tol = 1e-6 * extent;

    std::vector<Loop> loops;
    // Vertex clustering over line/arc endpoints.
    std::vector<Vec2> vertices;
    std::vector<GraphEdge> edges;
    const auto vertex_of = [&](const Vec2& p) {
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if ((vertices[i] - p).norm() <= eps) return static_cast<int>(i);
        }
        vertices.push_back(p);
        return static_cast<int>(vertices.size() - 1);
    };
    for (std::size_t i = 0; i < sketch.primitives.size(); ++i) {
        const auto& prim = sketch.primitives[i];
        if (std::holds_alternative<Circle>(prim.curve)) {
            loops.push_back(make_loop({LoopEdge{prim.id, false, prim.curve}}));
            continue;
        }
        GraphEdge e{i, {vertex_of(curve_start(prim.curve)), vertex_of(curve_end(prim.curve))}};
        if (e.v[0] == e.v[1]) {
            result.dangling.push_back(prim.id);
            continue;
        }
        edges.push_back(e);
    }

    // Crossing edges make the loop structure ambiguous.
    std::vector<std::vector<Vec2>> polys;
    std::vector<Box2> boxes;
    for (const auto& e : edges) {
        polys.push_back(edge_polyline(sketch.primitives[e.prim].curve, 64));
        Box2 b;
        for (const auto& p : polys.back()) b.add(p);
        boxes.push_back(b);
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            if (!bounds_overlap(boxes[i], boxes[j], eps)) continue;
            std::vector<int> shared;
            for (const int a : edges[i].v) {
                for (const int b : edges[j].v) {
                    if (a == b) shared.push_back(a);
                }
            }
            for (std::size_t s = 0; s + 1 < polys[i].size(); ++s) {
                for (std::size_t t = 0; t + 1 < polys[j].size(); ++t) {
                    bool overlap = false;
                    const auto hit =
                        segment_contact(polys[i][s], polys[i][s + 1], polys[j][t], polys[j][t + 1], eps, overlap);
                    bool at_vertex = false;
                    if (hit) {
                        for (const int v : shared) {
                            if ((*hit - vertices[v]).norm() <= contact_tol) at_vertex = true;
                        }
                    }
                    if (overlap || (hit && !at_vertex)) {
                        throw Error(ErrorCode::AmbiguousTopology, "primitives " + sketch.primitives[edges[i].prim].id +
                                                                      " and " + sketch.primitives[edges[j].prim].id +
                                                                      " cross");
                    }
                }
            }
        }
    }

    // Strip trees hanging off the cycles.
    std::vector<int> degree(vertices.size(), 0);
    std::vector<bool> alive(edges.size(), true);
    for (const auto& e : edges) {
        ++degree[e.v[0]];
        ++degree[e.v[1]];
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (alive[i] && (degree[edges[i].v[0]] == 1 || degree[edges[i].v[1]] == 1)) {
                alive[i] = false;
                --degree[edges[i].v[0]];
                --degree[edges[i].v[1]];
                changed = true;
            }
        }
    }
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (degree[v] > 1 && degree[v] % 2 == 1) {
            throw Error(ErrorCode::AmbiguousTopology,
                        "vertex at (" + std::to_string(vertices[v].x()) + ", " + std::to_string(vertices[v].y()) +
                            ") has odd degree " + std::to_string(degree[v]));
        }
    }

    // Half-edge 2e runs along the primitive, 2e+1 against it.
    const auto half_curve = [&](std::size_t h) {
        const Curve& c = sketch.primitives[edges[h / 2].prim].curve;
        return h % 2 ? reversed_curve(c) : c;
    };
    const auto head = [&](std::size_t h) { return edges[h / 2].v[h % 2 ? 0 : 1]; };
    std::vector<std::vector<std::pair<double, std::size_t>>> outgoing(vertices.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!alive[i]) continue;
        for (std::size_t h : {2 * i, 2 * i + 1}) {
            const int tail = edges[i].v[h % 2 ? 1 : 0];
            outgoing[tail].emplace_back(departure_angle(half_curve(h)), h);
        }
    }
    for (auto& list : outgoing) std::sort(list.begin(), list.end());

    std::vector<bool> used(2 * edges.size(), false);
    std::vector<bool> in_loop(edges.size(), false);
    for (std::size_t start = 0; start < 2 * edges.size(); ++start) {
        if (!alive[start / 2] || used[start]) continue;
        std::vector<std::size_t> cycle;
        std::size_t h = start;
        while (!used[h]) {
            used[h] = true;
            cycle.push_back(h);
            const int v = head(h);
            const std::size_t twin = h ^ 1;
            const auto& out = outgoing[v];
            std::size_t pos = 0;
            while (pos < out.size() && out[pos].second != twin) ++pos;
            // Clockwise neighbour of the twin keeps the face on the left.
            h = out[(pos + out.size() - 1) % out.size()].second;
        }
        std::vector<LoopEdge> loop_edges;
        for (const std::size_t x : cycle) {
            loop_edges.push_back({sketch.primitives[edges[x / 2].prim].id, x % 2 == 1, half_curve(x)});
        }
        const double area = loop_signed_area(loop_edges);
        if (area > eps * extent) {
            for (const std::size_t x : cycle) in_loop[x / 2] = true;
            loops.push_back(make_loop(std::move(loop_edges)));
        }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!in_loop[i]) result.dangling.push_back(sketch.primitives[edges[i].prim].id);
    }
    std::sort(result.dangling.begin(), result.dangling.end());

    std::stable_sort(loops.begin(), loops.end(), [](const Loop& a, const Loop& b) {
        const auto key = [](const Loop& l) {
            auto ids = l.ids();
            std::sort(ids.begin(), ids.end());
            return std::make_tuple(-l.area, l.bounds.lo.x(), l.bounds.lo.y(), l.perimeter, ids);
        };
        return key(a) < key(b);
    });
    result.loops = std::move(loops);
    return result;
}

bool loop_inside(const Loop& inner, const Loop& outer, double eps) {
    if (inner.bounds.lo.x() < outer.bounds.lo.x() - eps || inner.bounds.lo.y() < outer.bounds.lo.y() - eps ||
        inner.bounds.hi.x() > outer.bounds.hi.x() + eps || inner.bounds.hi.y() > outer.bounds.hi.y() + eps) {
        return false;
    }
    const auto poly_out = loop_polyline(outer);
    const auto poly_in = loop_polyline(inner);
    for (const auto& p : poly_in) {
        if (!point_in_polygon_strict(poly_out, p, eps)) return false;
    }
    for (std::size_t i = 0; i < poly_in.size(); ++i) {
        const Vec2& a = poly_in[i];
        const Vec2& b = poly_in[(i + 1) % poly_in.size()];
        for (std::size_t j = 0; j < poly_out.size(); ++j) {
            if (segments_intersect(a, b, poly_out[j], poly_out[(j + 1) % poly_out.size()], eps)) return false;
        }
    }
    return true;
}

std::size_t LoopDict::hole_count() const {
    std::size_t n = 0;
    for (const auto& o : outers) n += o.holes.size();
    return n;
}

LoopDict build_loop_dict(const std::vector<Loop>& loops) {
    std::vector<const Loop*> sorted;
    Box2 all;
    for (const auto& l : loops) {
        sorted.push_back(&l);
        if (!l.bounds.empty()) {
            all.add(l.bounds.lo);
            all.add(l.bounds.hi);
        }
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Loop* a, const Loop* b) { return std::abs(a->area) > std::abs(b->area); });
    const double extent = all.empty() ? 1.0 : std::max(all.extent().maxCoeff(), 1e-300);
    const double eps = geom_eps(extent);

    LoopDict dict;
    for (const Loop* loop : sorted) {
        bool placed = false;
        for (auto& outer : dict.outers) {
            if (loop_inside(*loop, outer.loop, eps)) {
                const std::string name = "hole_" + outer.name.substr(6) + "_" + std::to_string(outer.holes.size() + 1);
                outer.holes.push_back({name, *loop});
                placed = true;
                break;
            }
        }
        if (!placed) {
            dict.outers.push_back({"outer_" + std::to_string(dict.outers.size() + 1), *loop, {}});
        }
    }
    return dict;
}

}  // namespace histcad
