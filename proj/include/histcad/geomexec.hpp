#pragma once

#include "histcad/model.hpp"
#include "histcad/topology.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace histcad {

// ---------------------------------------------------------------------------
// Profiles

/// Outer polygon counter-clockwise, holes clockwise.
struct Profile {
    std::vector<Vec2> outer;
    std::vector<std::vector<Vec2>> holes;
    double chord_tolerance = 0.0;

    double area() const;
};

/// Chord tolerance relative to the loop's bounding-box extent.
inline constexpr double kChordToleranceRelative = 1e-3;

/// Polygon through the loop. Arcs and circles are split into chords whose
/// sagitta stays below `tol`, with vertices pushed off the curve just enough
/// that the polygon encloses the same area as the exact curve.
std::vector<Vec2> discretize_loop(const Loop& loop, double tol);

/// Throws SelfIntersectingProfile when the polygon or a hole crosses itself or
/// another ring.
Profile build_profile(const OuterLoop& entry);

/// Profiles for every outer loop of the sketch. Holes nested inside other
/// holes of the same outer are skipped.
std::vector<Profile> build_profiles(const Sketch& sketch);

/// Triangles over the profile's vertex list: outer first, then holes in order.
std::vector<std::array<int, 3>> triangulate(const Profile& profile);

// ---------------------------------------------------------------------------
// Meshes

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    double signed_volume() const;
    double surface_area() const;
    Box3 bounds() const;
    /// Every undirected edge is shared by exactly two triangles with opposite
    /// orientations.
    bool is_watertight() const;
    void append(const Mesh& other);
    /// Merges vertices closer than `eps` and drops collapsed triangles.
    void weld(double eps);
};

Mesh extrude_linear(const Profile& profile, const SketchPlane& plane, const LinearExtrusion& extrusion);
Mesh extrude_rotated(const Profile& profile, const SketchPlane& plane, const RotatedExtrusion& extrusion);

/// Angular steps for a full revolution.
inline constexpr int kRevolveSteps = 256;

/// All profiles of a part, extruded; throws ExecutionFailed when the sketch
/// yields no closed loop.
Mesh part_mesh(const Part& part);

void write_stl(std::ostream& out, const Mesh& mesh, const std::string& header = "histcad");
std::string stl_bytes(const Mesh& mesh, const std::string& header = "histcad");
/// Parses binary STL back into an indexed mesh (vertices welded exactly).
Mesh read_stl(const std::string& bytes);
void write_xyz(std::ostream& out, const std::vector<Vec3>& points);
/// Whitespace-separated x y z triples; blank lines and '#' comments skipped.
std::vector<Vec3> read_xyz(std::istream& in);

// ---------------------------------------------------------------------------
// Sampled solids

struct Grid {
    Vec3 origin = Vec3::Zero();
    double h = 1.0;
    std::array<int, 3> n{0, 0, 0};  // node counts

    std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * n[1] + j) * n[0] + i;
    }
    Vec3 node(int i, int j, int k) const { return origin + h * Vec3(i, j, k); }
};

inline constexpr int kDefaultGridResolution = 256;

/// Grid with `resolution` cells along the longest edge of `bounds`, padded by
/// two cells on every side.
Grid make_grid(const Box3& bounds, int resolution = kDefaultGridResolution);

/// Signed distance sampled at grid nodes, negative inside, clamped to a narrow
/// band of a few cells around the surface.
struct SolidField {
    Grid grid;
    std::vector<float> d;

    static SolidField empty(const Grid& grid);
    static SolidField from_mesh(const Mesh& mesh, const Grid& grid);

    /// Sum of per-node occupancy clamp(0.5 - d/h, 0, 1) times cell volume.
    double volume() const;
    /// Zero level set via marching tetrahedra, outward oriented.
    Mesh surface() const;
};

/// In place on `current` (same grid as `body`): NewBody replaces, Join = min,
/// Subtract = max(a, -b), Intersect = max.
void apply_boolean(SolidField& current, const SolidField& body, BooleanKind op);

struct ExecOptions {
    int grid_resolution = kDefaultGridResolution;
};

struct ExecStatus {
    bool ok = true;
    std::string code;  // error code name when failed
    std::size_t part = 0;  // 1-based failing part
    std::string message;
};

struct ExecResult {
    ExecStatus status;
    /// Exact mesh for single-part documents, extracted surface otherwise.
    Mesh mesh;
    double volume = 0.0;
    bool sampled = false;  // went through the field
};

/// Runs parts in order. Later NewBody parts are kept alongside earlier
/// bodies; Join/Subtract/Intersect act on everything built so far.
ExecResult execute_document(const Document& doc, const ExecOptions& options = {});

// ---------------------------------------------------------------------------
// Metrics

inline constexpr std::size_t kDefaultSampleCount = 2000;
inline constexpr std::uint64_t kDefaultSampleSeed = 0x5eed5eedULL;

/// Area-weighted uniform surface samples.
std::vector<Vec3> sample_surface(const Mesh& mesh, std::size_t count = kDefaultSampleCount,
                                 std::uint64_t seed = kDefaultSampleSeed);

/// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2. Throws EmptySet.
double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// Nearest-neighbour index over a fixed point set (exact queries).
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points);
    /// Squared distance to the nearest stored point.
    double nearest_squared(const Vec3& q) const;
    std::size_t size() const { return points_.size(); }

private:
    struct Node {
        int point;
        int axis;
        int left;
        int right;
    };
    std::vector<Vec3> points_;
    std::vector<Node> nodes_;
    int root_ = -1;

    int build(std::vector<int>& idx, int lo, int hi, int depth);
    void search(int node, const Vec3& q, double& best) const;
};

struct DocumentMetric {
    std::string name;
    ExecStatus status;
    std::optional<double> chamfer;
};

struct MetricReport {
    std::vector<DocumentMetric> documents;
    double invalidity = 0.0;
    std::optional<double> average_chamfer;
    std::optional<double> median_chamfer;
    static constexpr double kDisplayScale = 1e3;
};

/// IR over all entries; average/median over entries carrying a chamfer value.
MetricReport summarize_metrics(std::vector<DocumentMetric> documents);

struct BatchInput {
    std::string name;
    Document doc;
    std::optional<std::vector<Vec3>> reference;
};

MetricReport batch_metrics(const std::vector<BatchInput>& inputs, const ExecOptions& options = {},
                           std::size_t jobs = 1);

}  // namespace histcad
