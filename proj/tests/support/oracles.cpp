#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace histcad::testing {

namespace {

template <typename K>
void toggle(std::map<K, int>& m, const K& key) {
    if (++m[key] % 2 == 0) m.erase(key);
}

template <typename K>
void merge_odd(std::map<K, int>& into, const std::map<K, int>& from) {
    for (const auto& [k, v] : from) toggle(into, k);
}

bool near_int(double v, int& out) {
    out = static_cast<int>(std::lround(v));
    return std::abs(v - out) < 1e-6;
}

}  // namespace

GridParity grid_parity(const GridSketch& gs) {
    GridParity total;
    for (const auto& face : gs.faces) {
        GridParity local;
        for (const auto& l : face) {
            if (l.circle) {
                toggle(local.circles, {l.rect[0], l.rect[1]});
                continue;
            }
            const auto [x0, y0, x1, y1] = l.rect;
            for (int x = x0; x < x1; ++x) {
                toggle(local.edges, UnitEdge{x, y0, 0});
                toggle(local.edges, UnitEdge{x, y1, 0});
            }
            for (int y = y0; y < y1; ++y) {
                toggle(local.edges, UnitEdge{x0, y, 1});
                toggle(local.edges, UnitEdge{x1, y, 1});
            }
        }
        merge_odd(total.edges, local.edges);
        merge_odd(total.circles, local.circles);
    }
    return total;
}

std::string compare_with_grid(const Sketch& flat, const GridSketch& gs) {
    const GridParity want = grid_parity(gs);
    std::map<UnitEdge, int> covered;
    std::map<std::pair<int, int>, int> circles;
    for (const auto& p : flat.primitives) {
        if (const auto* c = std::get_if<Circle>(&p.curve)) {
            const Vec2 g = gs.to_grid(c->center) - Vec2(0.5, 0.5);
            int x = 0, y = 0;
            if (!near_int(g.x(), x) || !near_int(g.y(), y) || std::abs(c->radius / gs.scale - 0.25) > 1e-6) {
                return "circle " + p.id + " off the grid";
            }
            ++circles[{x, y}];
            continue;
        }
        const auto* l = std::get_if<Line>(&p.curve);
        if (!l) return "unexpected arc " + p.id;
        const Vec2 a = gs.to_grid(l->start), b = gs.to_grid(l->end);
        int ax = 0, ay = 0, bx = 0, by = 0;
        if (!near_int(a.x(), ax) || !near_int(a.y(), ay) || !near_int(b.x(), bx) || !near_int(b.y(), by)) {
            return "line " + p.id + " has off-grid endpoints";
        }
        if (ay == by && ax != bx) {
            for (int x = std::min(ax, bx); x < std::max(ax, bx); ++x) ++covered[UnitEdge{x, ay, 0}];
        } else if (ax == bx && ay != by) {
            for (int y = std::min(ay, by); y < std::max(ay, by); ++y) ++covered[UnitEdge{ax, y, 1}];
        } else {
            return "line " + p.id + " is not axis aligned";
        }
    }
    for (const auto& [e, n] : covered) {
        if (n != 1) return "unit edge covered " + std::to_string(n) + " times";
        if (!want.edges.count(e)) return "unit edge present but even in the oracle";
    }
    if (covered.size() != want.edges.size()) {
        std::ostringstream s;
        s << "expected " << want.edges.size() << " unit edges, got " << covered.size();
        return s.str();
    }
    for (const auto& [c, n] : circles) {
        if (n != 1 || !want.circles.count(c)) return "unexpected circle";
    }
    if (circles.size() != want.circles.size()) return "missing circle";
    return {};
}

std::vector<SegmentKey> brute_force_parity(const std::vector<DecomposedFace>& faces, double eps_key) {
    const auto odd = [](const std::vector<SegmentKey>& keys) {
        std::vector<SegmentKey> out;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            bool seen = false;
            for (std::size_t j = 0; j < i && !seen; ++j) seen = keys[j] == keys[i];
            if (seen) continue;
            int n = 0;
            for (const auto& k : keys) n += k == keys[i];
            if (n % 2) out.push_back(keys[i]);
        }
        return out;
    };
    std::vector<SegmentKey> across;
    for (const auto& face : faces) {
        std::vector<SegmentKey> keys;
        for (const auto& loop : face) {
            for (const auto& seg : loop) keys.push_back(segment_key(seg.curve, eps_key));
        }
        for (const auto& k : odd(keys)) across.push_back(k);
    }
    std::vector<SegmentKey> out = odd(across);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------

double shoelace_area(const std::vector<Vec2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        s += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * s;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
    Vec2 c = Vec2::Zero();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        c += (a + b) * (a.x() * b.y() - b.x() * a.y());
    }
    return c / (6.0 * shoelace_area(poly));
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (a + t * d - p).norm();
}

bool inside_polygon(const std::vector<Vec2>& poly, const Vec2& p, double eps) {
    int winding = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        if (distance_to_segment(p, a, b) <= eps) return false;
        const double side = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && side > 0) ++winding;
        } else if (b.y() <= p.y() && side < 0) {
            --winding;
        }
    }
    return winding != 0;
}

bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps) {
    const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
    return distance_to_segment(c, a, b) <= eps || distance_to_segment(d, a, b) <= eps ||
           distance_to_segment(a, c, d) <= eps || distance_to_segment(b, c, d) <= eps;
}

bool polyline_self_intersects(const std::vector<Vec2>& poly, double eps) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_touch(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], eps)) return true;
        }
    }
    return false;
}

std::vector<Vec2> sample_loop(const std::vector<LoopEdge>& edges, int per_turn) {
    std::vector<Vec2> out;
    const auto arc = [&](const Vec2& c, double r, double a0, double sweep) {
        const int n = std::max(2, static_cast<int>(std::ceil(std::abs(sweep) / kTwoPi * per_turn)));
        for (int k = 0; k < n; ++k) {
            const double a = a0 + sweep * k / n;
            out.push_back(c + r * Vec2(std::cos(a), std::sin(a)));
        }
    };
    for (const auto& e : edges) {
        if (const auto* l = std::get_if<Line>(&e.curve)) {
            out.push_back(l->start);
        } else if (const auto* circ = std::get_if<Circle>(&e.curve)) {
            arc(circ->center, circ->radius, 0.0, kTwoPi);
        } else {
            const auto& a = std::get<Arc>(e.curve);
            const Vec2 p = a.start, q = a.mid, r = a.end;
            const double d = 2.0 * (p.x() * (q.y() - r.y()) + q.x() * (r.y() - p.y()) + r.x() * (p.y() - q.y()));
            const double pp = p.squaredNorm(), qq = q.squaredNorm(), rr = r.squaredNorm();
            const Vec2 c((pp * (q.y() - r.y()) + qq * (r.y() - p.y()) + rr * (p.y() - q.y())) / d,
                         (pp * (r.x() - q.x()) + qq * (p.x() - r.x()) + rr * (q.x() - p.x())) / d);
            const auto ang = [&](const Vec2& v) { return std::atan2(v.y() - c.y(), v.x() - c.x()); };
            const auto ccw = [](double from, double to) {
                double d = std::fmod(to - from, kTwoPi);
                return d < 0 ? d + kTwoPi : d;
            };
            const double a0 = ang(p);
            const double span = ccw(a0, ang(r));
            const double sweep = ccw(a0, ang(q)) < span ? span : span - kTwoPi;
            arc(c, (p - c).norm(), a0, sweep);
        }
    }
    return out;
}

std::string check_arrangement(const Arrangement& arr, const LoopResult& loops, const LoopDict& dict) {
    const auto id_set = [](const std::vector<std::string>& ids) { return std::set<std::string>(ids.begin(), ids.end()); };
    const auto loop_ids = [](const Loop& l) {
        std::set<std::string> s;
        for (const auto& e : l.edges) s.insert(e.id);
        return s;
    };
    if (!loops.dangling.empty()) return "unexpected dangling primitives";
    if (loops.loops.size() != arr.shapes.size()) {
        return "expected " + std::to_string(arr.shapes.size()) + " loops, got " + std::to_string(loops.loops.size());
    }
    Box2 all;
    for (const auto& p : arr.sketch.primitives) {
        const Box2 b = curve_bounds(p.curve);
        all.add(b.lo);
        all.add(b.hi);
    }
    const double eps = 1e-9 * all.extent().maxCoeff();

    for (std::size_t i = 0; i < loops.loops.size(); ++i) {
        const Loop& l = loops.loops[i];
        for (std::size_t k = 0; k < l.edges.size(); ++k) {
            const Vec2 end = curve_end(l.edges[k].curve);
            const Vec2 next = curve_start(l.edges[(k + 1) % l.edges.size()].curve);
            if ((end - next).norm() > eps) return "loop " + std::to_string(i) + " is not closed";
        }
        if (polyline_self_intersects(sample_loop(l.edges), eps)) return "loop " + std::to_string(i) + " is not simple";
        if (i > 0 && std::abs(l.area) > std::abs(loops.loops[i - 1].area) * (1 + 1e-12)) return "loops not sorted by area";
    }

    std::size_t roots = 0;
    for (std::size_t i = 0; i < arr.shapes.size(); ++i) roots += arr.shapes[i].parent < 0;
    if (dict.outers.size() != roots) return "expected " + std::to_string(roots) + " outers";
    for (const auto& outer : dict.outers) {
        const auto ids = loop_ids(outer.loop);
        int shape = -1;
        for (std::size_t i = 0; i < arr.shapes.size(); ++i) {
            if (id_set(arr.shapes[i].ids) == ids) shape = static_cast<int>(i);
        }
        if (shape < 0 || arr.shapes[shape].parent >= 0) return outer.name + " is not a top-level shape";
        std::set<std::set<std::string>> want, got;
        for (std::size_t i = 0; i < arr.shapes.size(); ++i) {
            if (static_cast<int>(i) != shape && arr.root_of(static_cast<int>(i)) == shape) want.insert(id_set(arr.shapes[i].ids));
        }
        const auto outer_poly = sample_loop(outer.loop.edges);
        for (const auto& hole : outer.holes) {
            got.insert(loop_ids(hole.loop));
            if (std::abs(hole.loop.area) >= std::abs(outer.loop.area)) return hole.name + " is not smaller than its outer";
            const auto hole_poly = sample_loop(hole.loop.edges);
            for (const auto& v : hole_poly) {
                if (!inside_polygon(outer_poly, v, eps)) return hole.name + " is not strictly inside " + outer.name;
            }
            for (std::size_t a = 0; a < hole_poly.size(); ++a) {
                for (std::size_t b = 0; b < outer_poly.size(); ++b) {
                    if (segments_touch(hole_poly[a], hole_poly[(a + 1) % hole_poly.size()], outer_poly[b],
                                       outer_poly[(b + 1) % outer_poly.size()], eps)) {
                        return hole.name + " crosses " + outer.name;
                    }
                }
            }
        }
        if (want != got) return outer.name + " has the wrong holes";
    }
    return {};
}

double pappus_volume(double area, double radius, double sweep) { return std::abs(sweep) * radius * area; }

// ---------------------------------------------------------------------------

double box_signed_distance(const OBB& box, const Vec3& p) {
    const Vec3 r = p - box.center;
    Vec3 q;
    for (int a = 0; a < 3; ++a) q[a] = std::abs(r.dot(box.axes[a])) - box.half_extents[a];
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
}

OverlapBound min_signed_distance(const OBB& a, const OBB& b, double band, int budget) {
    struct Cell {
        Vec3 center;  // local coordinates of a
        Vec3 half;
        double lower;
    };
    const auto cmp = [](const Cell& x, const Cell& y) { return x.lower > y.lower; };
    std::priority_queue<Cell, std::vector<Cell>, decltype(cmp)> queue(cmp);
    OverlapBound out;
    out.upper = std::numeric_limits<double>::infinity();
    const auto eval = [&](const Vec3& local) {
        Vec3 p = a.center;
        for (int k = 0; k < 3; ++k) p += local[k] * a.axes[k];
        ++out.evaluations;
        return box_signed_distance(b, p);
    };
    const auto push = [&](const Vec3& c, const Vec3& h) {
        const double f = eval(c);
        out.upper = std::min(out.upper, f);
        queue.push({c, h, f - h.norm()});
    };
    push(Vec3::Zero(), a.half_extents);
    out.lower = queue.top().lower;
    while (!queue.empty() && out.evaluations < budget) {
        out.lower = queue.top().lower;
        if (out.lower > band || out.upper < -band) break;
        // Bracket already narrow: nothing more can be decided.
        if (out.upper - out.lower < 1e-3 * band) break;
        Cell cell = queue.top();
        queue.pop();
        int axis = 0;
        cell.half.maxCoeff(&axis);
        Vec3 h = cell.half;
        h[axis] *= 0.5;
        Vec3 shift = Vec3::Zero();
        shift[axis] = h[axis];
        push(cell.center - shift, h);
        push(cell.center + shift, h);
    }
    if (!queue.empty()) out.lower = std::min(out.lower, queue.top().lower);
    return out;
}

SampledRelation sampled_relation(const OBB& a, const OBB& b, double band, int budget) {
    const OverlapBound r = min_signed_distance(a, b, band, budget);
    if (r.upper < -band) return SampledRelation::Overlap;
    if (r.lower > band) return SampledRelation::Apart;
    return SampledRelation::Undecided;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd finite_difference_jacobian(const ResidualSystem& system, const Eigen::VectorXd& x, double h) {
    Eigen::MatrixXd j(system.residual_count(), system.variable_count());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        j.col(k) = (system.residuals(xp) - system.residuals(xm)) / (2.0 * h);
    }
    return j;
}

double jacobian_discrepancy(const Sketch& sketch) {
    const ResidualSystem sys = ResidualSystem::build(sketch);
    const Eigen::VectorXd x = sys.initial();
    const Eigen::MatrixXd analytic(sys.jacobian(x));
    const Eigen::MatrixXd fd = finite_difference_jacobian(sys, x, 1e-6 * sketch_extent(sketch));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < fd.rows(); ++i) {
        for (Eigen::Index j = 0; j < fd.cols(); ++j) {
            const double a = analytic(i, j), b = fd(i, j);
            worst = std::max(worst, std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------

double brute_force_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    const auto one_way = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
        double sum = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    return one_way(a, b) + one_way(b, a);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace histcad::testing
