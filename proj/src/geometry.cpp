#include "histcad/geometry.hpp"

#include <algorithm>

namespace histcad {

double normalize_angle(double a) {
    double r = std::remainder(a, kTwoPi);  // [-pi, pi]
    if (r <= -kPi) {
        r += kTwoPi;
    }
    return r;
}

double wrap_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    if (r >= kTwoPi) {
        r = 0.0;
    }
    return r;
}

std::optional<CircleFit> circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, double eps) {
    const Vec2 ab = b - a;
    const Vec2 ac = c - a;
    const double d = 2.0 * cross2(ab, ac);
    const double scale = std::max(ab.squaredNorm(), ac.squaredNorm());
    if (d == 0.0 || std::abs(d) <= eps * scale) {
        return std::nullopt;
    }
    const double ab2 = ab.squaredNorm();
    const double ac2 = ac.squaredNorm();
    const Vec2 u((ac.y() * ab2 - ab.y() * ac2) / d, (ab.x() * ac2 - ac.x() * ab2) / d);
    CircleFit fit;
    fit.center = a + u;
    fit.radius = u.norm();
    if (!std::isfinite(fit.radius)) {
        return std::nullopt;
    }
    return fit;
}

Vec2 ArcParams::point_at(double t) const {
    const double th = start_angle + t * sweep;
    return center + radius * Vec2(std::cos(th), std::sin(th));
}

Vec2 ArcParams::tangent_at(double t) const {
    const double th = start_angle + t * sweep;
    const double s = sweep >= 0.0 ? 1.0 : -1.0;
    return s * Vec2(-std::sin(th), std::cos(th));
}

std::optional<ArcParams> arc_params(const Vec2& start, const Vec2& mid, const Vec2& end, double eps) {
    const auto fit = circumcircle(start, mid, end, eps);
    if (!fit) {
        return std::nullopt;
    }
    ArcParams arc;
    arc.center = fit->center;
    arc.radius = fit->radius;
    const double a0 = std::atan2(start.y() - arc.center.y(), start.x() - arc.center.x());
    const double am = std::atan2(mid.y() - arc.center.y(), mid.x() - arc.center.x());
    const double a1 = std::atan2(end.y() - arc.center.y(), end.x() - arc.center.x());
    const double ccw_span = wrap_two_pi(a1 - a0);
    const double mid_off = wrap_two_pi(am - a0);
    arc.start_angle = a0;
    arc.sweep = mid_off < ccw_span ? ccw_span : -(kTwoPi - ccw_span);
    return arc;
}

bool angle_in_arc(const ArcParams& arc, double theta, double margin) {
    const double off = arc.sweep >= 0.0 ? wrap_two_pi(theta - arc.start_angle)
                                         : wrap_two_pi(arc.start_angle - theta);
    return off > margin && off < std::abs(arc.sweep) - margin;
}

double arc_param_of_angle(const ArcParams& arc, double theta) {
    const double off = arc.sweep >= 0.0 ? wrap_two_pi(theta - arc.start_angle)
                                         : wrap_two_pi(arc.start_angle - theta);
    return off / std::abs(arc.sweep);
}

Vec3 rotate_about_axis(const Vec3& p, const Vec3& origin, const Vec3& axis, double angle) {
    return origin + Eigen::AngleAxisd(angle, axis) * (p - origin);
}

double polygon_area(const std::vector<Vec2>& poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        twice += cross2(poly[i], poly[(i + 1) % n]);
    }
    return 0.5 * twice;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return (p - a).norm();
    }
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

bool point_in_polygon_strict(const std::vector<Vec2>& poly, const Vec2& p, double eps) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= eps) {
            return false;
        }
    }
    // Half-open crossing rule: a vertex exactly at the ray height counts on
    // one side only, so grazing rays are classified consistently.
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < x) {
                inside = !inside;
            }
        }
    }
    return inside;
}

namespace {

int orient(const Vec2& a, const Vec2& b, const Vec2& c, double eps) {
    const double v = cross2(b - a, c - a);
    const double scale = std::max((b - a).norm(), (c - a).norm());
    if (std::abs(v) <= eps * scale) {
        return 0;
    }
    return v > 0.0 ? 1 : -1;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double eps) {
    return point_segment_distance(p, a, b) <= eps;
}

}  // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps) {
    const int o1 = orient(a, b, c, eps);
    const int o2 = orient(a, b, d, eps);
    const int o3 = orient(c, d, a, eps);
    const int o4 = orient(c, d, b, eps);
    if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) {
        return true;
    }
    return (o1 == 0 && on_segment(a, b, c, eps)) || (o2 == 0 && on_segment(a, b, d, eps)) ||
           (o3 == 0 && on_segment(c, d, a, eps)) || (o4 == 0 && on_segment(c, d, b, eps));
}

}  // namespace histcad
