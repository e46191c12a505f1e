#include "histcad/relations.hpp"

#include <algorithm>
#include <cmath>

namespace histcad {

std::string_view rel_type_name(RelType t) {
    switch (t) {
    case RelType::Separate: return "separate";
    case RelType::Touch: return "touch";
    case RelType::Intersect: return "intersect";
    case RelType::Contain: return "contain";
    case RelType::Contained: return "contained";
    }
    return "unknown";
}

std::string_view direction_name(Direction d) {
    static constexpr std::string_view kNames[] = {"+X", "-X", "+Y", "-Y", "+Z", "-Z"};
    return kNames[static_cast<int>(d)];
}

Direction opposite(Direction d) { return static_cast<Direction>(static_cast<int>(d) ^ 1); }

double touch_epsilon(const OBB& a, const OBB& b) { return 1e-6 * 0.5 * (a.diagonal() + b.diagonal()); }

namespace {

double projected_radius(const OBB& box, const Vec3& axis) {
    double r = 0.0;
    for (int k = 0; k < 3; ++k) r += box.half_extents[k] * std::abs(box.axes[k].dot(axis));
    return r;
}

bool corners_inside(const OBB& inner, const OBB& outer, double slack) {
    for (const auto& c : inner.corners()) {
        if (!outer.contains(c, slack)) return false;
    }
    return true;
}

}  // namespace

SatResult sat_test(const OBB& a, const OBB& b) {
    const double eps = touch_epsilon(a, b);
    const Vec3 t = b.center - a.center;
    std::vector<Vec3> axes;
    for (const auto& ax : a.axes) axes.push_back(ax);
    for (const auto& ax : b.axes) axes.push_back(ax);
    for (const auto& u : a.axes) {
        for (const auto& v : b.axes) {
            const Vec3 c = u.cross(v);
            const double n = c.norm();
            if (n >= 1e-9) axes.push_back(c / n);
        }
    }
    SatResult r;
    for (const auto& axis : axes) {
        const double gap = std::abs(t.dot(axis)) - (projected_radius(a, axis) + projected_radius(b, axis));
        if (gap > eps) r.collides = false;
        if (gap >= -eps) r.sep_axes.push_back({axis, gap});
    }
    return r;
}

RelType classify_relation(const OBB& a, const OBB& b) {
    const SatResult sat = sat_test(a, b);
    if (!sat.collides) return RelType::Separate;
    const double eps = touch_epsilon(a, b);
    if (corners_inside(a, b, eps)) return RelType::Contained;
    if (corners_inside(b, a, eps)) return RelType::Contain;
    for (const auto& s : sat.sep_axes) {
        if (std::abs(s.gap) <= eps) return RelType::Touch;
    }
    return RelType::Intersect;
}

std::vector<Direction> directional_labels(const OBB& a, const OBB& b, double theta) {
    const Vec3 offset = b.center - a.center;
    double scale = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Vec3 axis = Vec3::Unit(k);
        scale = std::max(scale, projected_radius(a, axis) + projected_radius(b, axis));
    }
    const double threshold = theta * scale;
    std::vector<Direction> out;
    for (int k = 0; k < 3; ++k) {
        if (offset[k] > threshold) out.push_back(static_cast<Direction>(2 * k));
        if (offset[k] < -threshold) out.push_back(static_cast<Direction>(2 * k + 1));
    }
    return out;
}

const Relation* RelationTable::find(std::size_t i, std::size_t j) const {
    for (const auto& e : entries) {
        if (e.i == i && e.j == j) return &e;
    }
    return nullptr;
}

RelationTable build_relation_table(const std::vector<OBB>& boxes) {
    RelationTable table;
    const std::size_t n = boxes.size();
    std::vector<Relation> grid(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Relation r{i, j, classify_relation(boxes[i], boxes[j]), directional_labels(boxes[i], boxes[j])};
            Relation dual{j, i, r.type, {}};
            if (r.type == RelType::Contain) dual.type = RelType::Contained;
            if (r.type == RelType::Contained) dual.type = RelType::Contain;
            for (const auto d : r.labels) dual.labels.push_back(opposite(d));
            std::sort(dual.labels.begin(), dual.labels.end());
            grid[i * n + j] = std::move(r);
            grid[j * n + i] = std::move(dual);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) table.entries.push_back(std::move(grid[i * n + j]));
        }
    }
    return table;
}

}  // namespace histcad
