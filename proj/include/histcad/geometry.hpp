#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace histcad {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Wraps an angle into [0, 2pi).
double wrap_two_pi(double a);

struct CircleFit {
    Vec2 center;
    double radius = 0.0;
};

/// Circumscribed circle of three points; nullopt when they are collinear
/// (relative to `eps`).
std::optional<CircleFit> circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, double eps = 0.0);

/// Arc through start/mid/end decoded into circle + angular span.
/// `sweep` is signed: positive for counter-clockwise traversal start->end.
struct ArcParams {
    Vec2 center;
    double radius = 0.0;
    double start_angle = 0.0;
    double sweep = 0.0;

    Vec2 point_at(double t) const;  // t in [0,1] along start->end
    Vec2 tangent_at(double t) const;
    double length() const { return std::abs(sweep) * radius; }
};

std::optional<ArcParams> arc_params(const Vec2& start, const Vec2& mid, const Vec2& end, double eps = 0.0);

/// True when angle `theta` lies strictly inside the span of `arc`, with
/// `margin` radians excluded at both ends.
bool angle_in_arc(const ArcParams& arc, double theta, double margin = 0.0);

/// Parameter t in [0,1] of angle `theta` along `arc` (undefined outside span).
double arc_param_of_angle(const ArcParams& arc, double theta);

struct Box2 {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    void add(const Vec2& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    bool empty() const { return lo.x() > hi.x(); }
    Vec2 extent() const { return empty() ? Vec2::Zero() : Vec2(hi - lo); }
};

struct Box3 {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void add(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void add(const Box3& b) {
        if (!b.empty()) {
            add(b.lo);
            add(b.hi);
        }
    }
    bool empty() const { return lo.x() > hi.x(); }
    Vec3 extent() const { return empty() ? Vec3::Zero() : Vec3(hi - lo); }
    double longest_edge() const { return extent().maxCoeff(); }
};

/// Rotation of `p` about the axis through `origin` with unit direction `axis`.
Vec3 rotate_about_axis(const Vec3& p, const Vec3& origin, const Vec3& axis, double angle);

/// Signed area of a closed polygon (shoelace), positive for CCW.
double polygon_area(const std::vector<Vec2>& poly);

/// Ray-casting point-in-polygon. Points on the boundary (within `eps`) count
/// as outside.
bool point_in_polygon_strict(const std::vector<Vec2>& poly, const Vec2& p, double eps);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Proper or touching intersection test between closed segments.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps);

}  // namespace histcad
