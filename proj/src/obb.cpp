#include "histcad/error.hpp"
#include "histcad/geomexec.hpp"
#include "histcad/topology.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace histcad {

std::array<Vec3, 8> OBB::corners() const {
    std::array<Vec3, 8> out;
    for (int c = 0; c < 8; ++c) {
        Vec3 p = center;
        for (int a = 0; a < 3; ++a) {
            p += ((c >> a) & 1 ? 1.0 : -1.0) * half_extents[a] * axes[a];
        }
        out[c] = p;
    }
    return out;
}

Vec3 OBB::local(const Vec3& p) const {
    const Vec3 r = p - center;
    return {r.dot(axes[0]), r.dot(axes[1]), r.dot(axes[2])};
}

bool OBB::contains(const Vec3& p, double slack) const {
    const Vec3 l = local(p);
    for (int a = 0; a < 3; ++a) {
        if (std::abs(l[a]) > half_extents[a] + slack) return false;
    }
    return true;
}

Mat3 pca_frame(const std::vector<Vec3>& points) {
    if (points.empty()) return Mat3::Identity();
    Vec3 mean = Vec3::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : points) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    Mat3 frame = solver.eigenvectors();
    // Largest variance first, right-handed.
    frame.col(0).swap(frame.col(2));
    if (frame.determinant() < 0.0) frame.col(2) = -frame.col(2);
    return frame;
}

namespace {

struct BoxFit {
    Mat3 frame;
    Vec3 lo, hi;
    double volume;
    double area;
};

BoxFit fit(const std::vector<Vec3>& points, const Mat3& frame) {
    BoxFit b{frame, Vec3::Constant(std::numeric_limits<double>::infinity()),
             Vec3::Constant(-std::numeric_limits<double>::infinity()), 0.0, 0.0};
    const Mat3 rt = frame.transpose();
    for (const auto& p : points) {
        const Vec3 l = rt * p;
        b.lo = b.lo.cwiseMin(l);
        b.hi = b.hi.cwiseMax(l);
    }
    const Vec3 e = b.hi - b.lo;
    b.volume = e.prod();
    b.area = e.x() * e.y() + e.y() * e.z() + e.z() * e.x();
    return b;
}

bool better(const BoxFit& a, const BoxFit& b) {
    const double scale = std::max(a.volume, b.volume);
    if (a.volume < b.volume - 1e-12 * scale) return true;
    if (a.volume > b.volume + 1e-12 * scale) return false;
    return a.area < b.area * (1.0 - 1e-12);
}

}  // namespace

OBB compute_obb_points(const std::vector<Vec3>& points, const std::vector<Mat3>& candidate_frames) {
    if (points.empty()) throw Error(ErrorCode::DegenerateModel, "no points to bound");
    std::vector<Mat3> frames = candidate_frames;
    if (frames.empty()) frames.push_back(pca_frame(points));

    std::optional<BoxFit> best;
    for (const Mat3& f : frames) {
        for (int axis = 0; axis < 3; ++axis) {
            for (int deg = 0; deg < 90; ++deg) {
                if (deg == 0 && axis > 0) continue;
                const Mat3 rot = Eigen::AngleAxisd(deg * kPi / 180.0, f.col(axis)).toRotationMatrix();
                const BoxFit b = fit(points, rot * f);
                if (!best || better(b, *best)) best = b;
            }
        }
    }
    OBB box;
    const Vec3 mid = 0.5 * (best->lo + best->hi);
    box.center = best->frame * mid;
    for (int a = 0; a < 3; ++a) box.axes[a] = best->frame.col(a).normalized();
    box.half_extents = 0.5 * (best->hi - best->lo);
    return box;
}

OBB compute_obb(const Part& part) {
    const Mesh mesh = part_mesh(part);
    Box3 b = mesh.bounds();
    if (b.empty() || !(b.longest_edge() > 0.0)) {
        throw Error(ErrorCode::DegenerateModel, "part has zero extent");
    }
    return compute_obb_points(mesh.vertices, {part.sketch.plane.rotation(), pca_frame(mesh.vertices), Mat3::Identity()});
}

}  // namespace histcad
