#include "histcad/error.hpp"
#include "histcad/geomexec.hpp"

#include <algorithm>
#include <cmath>
#include <list>

namespace histcad {

double Profile::area() const {
    double a = polygon_area(outer);
    for (const auto& h : holes) a += polygon_area(h);
    return a;
}

namespace {

int chord_count(double radius, double span, double tol, int minimum) {
    int n = minimum;
    if (radius > tol) {
        const double step = 2.0 * std::acos(1.0 - tol / radius);
        n = std::max(minimum, static_cast<int>(std::ceil(span / step)));
    }
    return n;
}

// Radius scale k for interior chord vertices so that n chords over an arc of
// `span` radians enclose the sector area exactly (end vertices stay on the
// arc): (n - 2) k^2 + 2k = span / sin(span / n).
double arc_area_scale(int n, double span) {
    const double c = span / std::sin(span / n);
    if (n == 2) return c / 2.0;
    const double a = n - 2;
    return (-2.0 + std::sqrt(4.0 + 4.0 * a * c)) / (2.0 * a);
}

double loop_extent(const Loop& loop) { return loop.bounds.empty() ? 0.0 : loop.bounds.extent().maxCoeff(); }

double ring_tolerance(const Loop& loop) {
    const double e = loop_extent(loop);
    return kChordToleranceRelative * (e > 0.0 ? e : 1.0);
}

struct Seg {
    Vec2 a, b;
    int ring;
    int index;
    int ring_size;
};

void check_simple(const std::vector<std::vector<Vec2>>& rings) {
    std::vector<Seg> segs;
    Box2 all;
    for (std::size_t r = 0; r < rings.size(); ++r) {
        const int n = static_cast<int>(rings[r].size());
        if (n < 3) {
            throw Error(ErrorCode::SelfIntersectingProfile, "ring with fewer than three vertices");
        }
        for (int i = 0; i < n; ++i) {
            segs.push_back({rings[r][i], rings[r][(i + 1) % n], static_cast<int>(r), i, n});
            all.add(rings[r][i]);
        }
    }
    const double eps = geom_eps(all.extent().maxCoeff());
    std::sort(segs.begin(), segs.end(),
              [](const Seg& x, const Seg& y) { return std::min(x.a.x(), x.b.x()) < std::min(y.a.x(), y.b.x()); });
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const double max_x = std::max(segs[i].a.x(), segs[i].b.x());
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            if (std::min(segs[j].a.x(), segs[j].b.x()) > max_x + eps) break;
            const Seg& s = segs[i];
            const Seg& t = segs[j];
            if (s.ring == t.ring) {
                const int d = std::abs(s.index - t.index);
                if (d == 1 || d == s.ring_size - 1) {
                    // Neighbours share a vertex; only a fold back counts.
                    const Vec2 shared = (s.b == t.a) ? s.b : s.a;
                    const Vec2 u = (s.a == shared ? s.b : s.a) - shared;
                    const Vec2 v = (t.a == shared ? t.b : t.a) - shared;
                    if (std::abs(cross2(u, v)) <= eps * std::max(u.norm(), v.norm()) && u.dot(v) > 0.0) {
                        throw Error(ErrorCode::SelfIntersectingProfile, "ring folds back on itself");
                    }
                    continue;
                }
            }
            if (segments_intersect(s.a, s.b, t.a, t.b, eps)) {
                throw Error(ErrorCode::SelfIntersectingProfile,
                            s.ring == t.ring ? "ring crosses itself" : "rings touch or cross");
            }
        }
    }
}

}  // namespace

std::vector<Vec2> discretize_loop(const Loop& loop, double tol) {
    std::vector<Vec2> out;
    for (const auto& e : loop.edges) {
        if (const auto* line = std::get_if<Line>(&e.curve)) {
            out.push_back(line->start);
        } else if (const auto* circle = std::get_if<Circle>(&e.curve)) {
            const int n = chord_count(circle->radius, kTwoPi, tol, 8);
            const double k = std::sqrt(kTwoPi / (n * std::sin(kTwoPi / n)));
            const double sign = e.reversed ? -1.0 : 1.0;
            for (int i = 0; i < n; ++i) {
                const double t = sign * kTwoPi * i / n;
                out.push_back(circle->center + k * circle->radius * Vec2(std::cos(t), std::sin(t)));
            }
        } else {
            const auto& arc = std::get<Arc>(e.curve);
            const auto ap = arc_params(arc.start, arc.mid, arc.end);
            out.push_back(arc.start);
            if (!ap) continue;
            const double span = std::abs(ap->sweep);
            const int n = chord_count(ap->radius, span, tol, 2);
            const double k = arc_area_scale(n, span);
            for (int i = 1; i < n; ++i) {
                const Vec2 p = ap->point_at(static_cast<double>(i) / n);
                out.push_back(ap->center + k * (p - ap->center));
            }
        }
    }
    return out;
}

Profile build_profile(const OuterLoop& entry) {
    Profile prof;
    prof.chord_tolerance = ring_tolerance(entry.loop);
    prof.outer = discretize_loop(entry.loop, prof.chord_tolerance);
    if (polygon_area(prof.outer) < 0.0) std::reverse(prof.outer.begin(), prof.outer.end());

    const double eps = geom_eps(loop_extent(entry.loop));
    for (std::size_t i = 0; i < entry.holes.size(); ++i) {
        bool nested = false;
        for (std::size_t j = 0; j < entry.holes.size() && !nested; ++j) {
            nested = j != i && std::abs(entry.holes[j].loop.area) > std::abs(entry.holes[i].loop.area) &&
                     loop_inside(entry.holes[i].loop, entry.holes[j].loop, eps);
        }
        if (nested) continue;
        auto ring = discretize_loop(entry.holes[i].loop, ring_tolerance(entry.holes[i].loop));
        if (polygon_area(ring) > 0.0) std::reverse(ring.begin(), ring.end());
        prof.holes.push_back(std::move(ring));
    }
    std::vector<std::vector<Vec2>> rings{prof.outer};
    rings.insert(rings.end(), prof.holes.begin(), prof.holes.end());
    check_simple(rings);
    return prof;
}

std::vector<Profile> build_profiles(const Sketch& sketch) {
    const LoopDict dict = build_loop_dict(compute_loops(sketch).loops);
    std::vector<Profile> out;
    for (const auto& outer : dict.outers) out.push_back(build_profile(outer));
    return out;
}

// ---------------------------------------------------------------------------
// Triangulation: holes are bridged into the outer ring, then ears clipped.

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); }

bool in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    return orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0;
}

// Index (into `ring`) of a vertex visible from hole vertex m along +x.
std::size_t bridge_target(const std::vector<int>& ring, const std::vector<Vec2>& pts, const Vec2& m) {
    double best_x = std::numeric_limits<double>::infinity();
    std::size_t edge = ring.size();
    Vec2 hit;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2& a = pts[ring[i]];
        const Vec2& b = pts[ring[(i + 1) % ring.size()]];
        if ((a.y() > m.y()) == (b.y() > m.y())) {
            if (a.y() == m.y() && a.x() >= m.x() && a.x() < best_x) {
                best_x = a.x();
                edge = i;
                hit = a;
            }
            continue;
        }
        const double x = a.x() + (m.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
        if (x >= m.x() && x < best_x) {
            best_x = x;
            edge = i;
            hit = Vec2(x, m.y());
        }
    }
    if (edge == ring.size()) return 0;
    const std::size_t ia = edge;
    const std::size_t ib = (edge + 1) % ring.size();
    if (pts[ring[ia]] == hit) return ia;
    if (pts[ring[ib]] == hit) return ib;
    std::size_t cand = pts[ring[ia]].x() > pts[ring[ib]].x() ? ia : ib;
    // Reflex vertices inside (m, hit, candidate) block the view; take the one
    // closest in angle to the ray.
    const Vec2 p = pts[ring[cand]];
    double best_angle = std::numeric_limits<double>::infinity();
    double best_dist = std::numeric_limits<double>::infinity();
    const bool ccw_tri = orient(m, hit, p) > 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2& q = pts[ring[i]];
        if (i == cand || q.x() < m.x()) continue;
        const Vec2& prev = pts[ring[(i + ring.size() - 1) % ring.size()]];
        const Vec2& next = pts[ring[(i + 1) % ring.size()]];
        if (orient(prev, q, next) > 0.0) continue;  // convex
        const bool inside = ccw_tri ? in_triangle(q, m, hit, p) : in_triangle(q, m, p, hit);
        if (!inside) continue;
        const Vec2 d = q - m;
        const double angle = std::abs(std::atan2(d.y(), d.x()));
        const double dist = d.squaredNorm();
        if (angle < best_angle || (angle == best_angle && dist < best_dist)) {
            best_angle = angle;
            best_dist = dist;
            cand = i;
        }
    }
    return cand;
}

}  // namespace

std::vector<std::array<int, 3>> triangulate(const Profile& profile) {
    std::vector<Vec2> pts = profile.outer;
    std::vector<int> ring(profile.outer.size());
    for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = static_cast<int>(i);

    struct HoleRef {
        int offset;
        int size;
        int rightmost;
    };
    std::vector<HoleRef> holes;
    for (const auto& h : profile.holes) {
        const int off = static_cast<int>(pts.size());
        int right = 0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (h[i].x() > h[right].x() || (h[i].x() == h[right].x() && h[i].y() < h[right].y())) {
                right = static_cast<int>(i);
            }
        }
        pts.insert(pts.end(), h.begin(), h.end());
        holes.push_back({off, static_cast<int>(h.size()), right});
    }
    std::sort(holes.begin(), holes.end(), [&](const HoleRef& a, const HoleRef& b) {
        return pts[a.offset + a.rightmost].x() > pts[b.offset + b.rightmost].x();
    });
    for (const auto& h : holes) {
        const int m = h.offset + h.rightmost;
        const std::size_t t = bridge_target(ring, pts, pts[m]);
        std::vector<int> merged(ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(t) + 1);
        for (int k = 0; k <= h.size; ++k) merged.push_back(h.offset + (h.rightmost + k) % h.size);
        merged.push_back(ring[t]);
        merged.insert(merged.end(), ring.begin() + static_cast<std::ptrdiff_t>(t) + 1, ring.end());
        ring = std::move(merged);
    }

    std::vector<std::array<int, 3>> tris;
    std::list<int> poly(ring.begin(), ring.end());
    const auto next_of = [&](std::list<int>::iterator it) {
        ++it;
        return it == poly.end() ? poly.begin() : it;
    };
    const auto prev_of = [&](std::list<int>::iterator it) {
        if (it == poly.begin()) it = poly.end();
        return --it;
    };
    const auto is_ear = [&](std::list<int>::iterator it) {
        const int ia = *prev_of(it), ib = *it, ic = *next_of(it);
        const Vec2 &a = pts[ia], &b = pts[ib], &c = pts[ic];
        if (orient(a, b, c) <= 0.0) return false;
        for (const int iq : poly) {
            if (iq == ia || iq == ib || iq == ic) continue;
            const Vec2& q = pts[iq];
            if (q == a || q == b || q == c) continue;  // bridge duplicates
            if (in_triangle(q, a, b, c)) return false;
        }
        return true;
    };
    auto it = poly.begin();
    std::size_t stalled = 0;
    while (poly.size() > 3) {
        if (is_ear(it)) {
            tris.push_back({*prev_of(it), *it, *next_of(it)});
            it = poly.erase(it);
            if (it == poly.end()) it = poly.begin();
            stalled = 0;
            continue;
        }
        it = next_of(it);
        if (++stalled > poly.size()) {
            // Numerical dead end: clip the most convex vertex.
            auto best = poly.begin();
            double best_o = -std::numeric_limits<double>::infinity();
            for (auto j = poly.begin(); j != poly.end(); ++j) {
                const double o = orient(pts[*prev_of(j)], pts[*j], pts[*next_of(j)]);
                if (o > best_o) {
                    best_o = o;
                    best = j;
                }
            }
            tris.push_back({*prev_of(best), *best, *next_of(best)});
            it = poly.erase(best);
            if (it == poly.end()) it = poly.begin();
            stalled = 0;
        }
    }
    if (poly.size() == 3) {
        auto a = poly.begin();
        tris.push_back({*a, *std::next(a), *std::next(a, 2)});
    }
    return tris;
}

}  // namespace histcad
