#include "histcad/error.hpp"
#include "histcad/geomexec.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <thread>

namespace histcad {

namespace {

double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    std::vector<int> idx(points_.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes_.reserve(points_.size());
    root_ = build(idx, 0, static_cast<int>(idx.size()), 0);
}

int KdTree::build(std::vector<int>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const int node = static_cast<int>(nodes_.size());
    nodes_.push_back({idx[mid], axis, -1, -1});
    const int left = build(idx, lo, mid, depth + 1);
    const int right = build(idx, mid + 1, hi, depth + 1);
    nodes_[node].left = left;
    nodes_[node].right = right;
    return node;
}

void KdTree::search(int node, const Vec3& q, double& best) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = points_[n.point];
    best = std::min(best, squared_distance(q, p));
    const double delta = q[n.axis] - p[n.axis];
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    search(near, q, best);
    if (delta * delta <= best) search(far, q, best);
}

double KdTree::nearest_squared(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
}

double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.empty() || b.empty()) {
        throw Error(ErrorCode::EmptySet, "chamfer distance needs two non-empty point sets");
    }
    const KdTree ta(a);
    const KdTree tb(b);
    double sum_ab = 0.0;
    for (const auto& p : a) sum_ab += tb.nearest_squared(p);
    double sum_ba = 0.0;
    for (const auto& p : b) sum_ba += ta.nearest_squared(p);
    return sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size());
}

std::vector<Vec3> sample_surface(const Mesh& mesh, std::size_t count, std::uint64_t seed) {
    std::vector<Vec3> out;
    if (mesh.triangles.empty() || count == 0) return out;
    std::vector<double> cumulative;
    cumulative.reserve(mesh.triangles.size());
    double total = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        total += 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
        cumulative.push_back(total);
    }
    if (!(total > 0.0)) return out;
    std::mt19937_64 rng(seed);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double pick = unit_real(rng) * total;
        std::size_t k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                                 cumulative.begin());
        k = std::min(k, cumulative.size() - 1);
        double u = unit_real(rng);
        double v = unit_real(rng);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const auto& t = mesh.triangles[k];
        const Vec3& a = mesh.vertices[t[0]];
        out.push_back(a + u * (mesh.vertices[t[1]] - a) + v * (mesh.vertices[t[2]] - a));
    }
    return out;
}

MetricReport summarize_metrics(std::vector<DocumentMetric> documents) {
    MetricReport report;
    report.documents = std::move(documents);
    std::size_t failed = 0;
    std::vector<double> cds;
    for (const auto& d : report.documents) {
        if (!d.status.ok) ++failed;
        if (d.chamfer) cds.push_back(*d.chamfer);
    }
    if (!report.documents.empty()) {
        report.invalidity = static_cast<double>(failed) / static_cast<double>(report.documents.size());
    }
    if (!cds.empty()) {
        report.average_chamfer = std::accumulate(cds.begin(), cds.end(), 0.0) / static_cast<double>(cds.size());
        std::sort(cds.begin(), cds.end());
        const std::size_t m = cds.size() / 2;
        report.median_chamfer = cds.size() % 2 ? cds[m] : 0.5 * (cds[m - 1] + cds[m]);
    }
    return report;
}

MetricReport batch_metrics(const std::vector<BatchInput>& inputs, const ExecOptions& options, std::size_t jobs) {
    std::vector<DocumentMetric> results(inputs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            DocumentMetric m;
            m.name = inputs[i].name;
            const ExecResult r = execute_document(inputs[i].doc, options);
            m.status = r.status;
            if (r.status.ok && inputs[i].reference && !inputs[i].reference->empty()) {
                const auto samples = sample_surface(r.mesh);
                if (!samples.empty()) m.chamfer = chamfer_distance(samples, *inputs[i].reference);
            }
            results[i] = std::move(m);
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, inputs.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return summarize_metrics(std::move(results));
}

}  // namespace histcad
