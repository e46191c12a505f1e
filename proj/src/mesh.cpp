#include "histcad/error.hpp"
#include "histcad/geomexec.hpp"
#include "histcad/numfmt.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace histcad {

double Mesh::signed_volume() const {
    double v = 0.0;
    for (const auto& t : triangles) {
        v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
    }
    return v / 6.0;
}

double Mesh::surface_area() const {
    double a = 0.0;
    for (const auto& t : triangles) {
        a += 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
    }
    return a;
}

Box3 Mesh::bounds() const {
    Box3 b;
    for (const auto& v : vertices) b.add(v);
    return b;
}

bool Mesh::is_watertight() const {
    if (triangles.empty()) return false;
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(triangles.size() * 3);
    const auto key = [](int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); };
    for (const auto& t : triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[e], b = t[(e + 1) % 3];
            if (a == b) return false;
            if (++directed[key(a, b)] > 1) return false;
        }
    }
    for (const auto& [k, count] : directed) {
        const int a = static_cast<int>(k >> 32);
        const int b = static_cast<int>(k & 0xffffffffu);
        if (!directed.count(key(b, a))) return false;
    }
    return true;
}

void Mesh::append(const Mesh& other) {
    const int off = static_cast<int>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (const auto& t : other.triangles) triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
}

void Mesh::weld(double eps) {
    std::map<std::array<std::int64_t, 3>, int> cells;
    std::vector<int> remap(vertices.size());
    std::vector<Vec3> kept;
    const double q = eps > 0.0 ? eps : 1.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Vec3& v = vertices[i];
        const std::array<std::int64_t, 3> base{std::llround(v.x() / q), std::llround(v.y() / q), std::llround(v.z() / q)};
        int found = -1;
        for (int dx = -1; dx <= 1 && found < 0; ++dx) {
            for (int dy = -1; dy <= 1 && found < 0; ++dy) {
                for (int dz = -1; dz <= 1 && found < 0; ++dz) {
                    const auto it = cells.find({base[0] + dx, base[1] + dy, base[2] + dz});
                    if (it != cells.end() && (kept[it->second] - v).norm() <= eps) found = it->second;
                }
            }
        }
        if (found < 0) {
            found = static_cast<int>(kept.size());
            kept.push_back(v);
            cells.emplace(base, found);
        }
        remap[i] = found;
    }
    std::vector<std::array<int, 3>> tris;
    for (const auto& t : triangles) {
        const std::array<int, 3> r{remap[t[0]], remap[t[1]], remap[t[2]]};
        if (r[0] != r[1] && r[1] != r[2] && r[0] != r[2]) tris.push_back(r);
    }
    vertices = std::move(kept);
    triangles = std::move(tris);
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void put_le(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    out.append(buf, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t pos) {
    char buf[sizeof(T)];
    std::memcpy(buf, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace

std::string stl_bytes(const Mesh& mesh, const std::string& header) {
    std::string out(80, '\0');
    std::memcpy(out.data(), header.data(), std::min<std::size_t>(header.size(), 80));
    out.reserve(84 + 50 * mesh.triangles.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mesh.triangles.size()));
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        Vec3 n = (b - a).cross(c - a);
        const double len = n.norm();
        if (len > 0.0) n /= len;
        for (int i = 0; i < 3; ++i) put_le<float>(out, static_cast<float>(n[i]));
        for (const Vec3* v : {&a, &b, &c}) {
            for (int i = 0; i < 3; ++i) put_le<float>(out, static_cast<float>((*v)[i]));
        }
        put_le<std::uint16_t>(out, 0);
    }
    return out;
}

void write_stl(std::ostream& out, const Mesh& mesh, const std::string& header) {
    const std::string bytes = stl_bytes(mesh, header);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Mesh read_stl(const std::string& bytes) {
    if (bytes.size() < 84) throw Error(ErrorCode::InvalidArgument, "STL data shorter than its header");
    const auto count = get_le<std::uint32_t>(bytes, 80);
    if (bytes.size() < 84 + 50ull * count) throw Error(ErrorCode::InvalidArgument, "STL data truncated");
    Mesh mesh;
    std::map<std::array<float, 3>, int> index;
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::size_t base = 84 + 50ull * t + 12;
        std::array<int, 3> tri{};
        for (int v = 0; v < 3; ++v) {
            std::array<float, 3> p{};
            for (int i = 0; i < 3; ++i) p[i] = get_le<float>(bytes, base + 12 * v + 4 * i);
            const auto [it, inserted] = index.emplace(p, static_cast<int>(mesh.vertices.size()));
            if (inserted) mesh.vertices.emplace_back(p[0], p[1], p[2]);
            tri[v] = it->second;
        }
        mesh.triangles.push_back(tri);
    }
    return mesh;
}

void write_xyz(std::ostream& out, const std::vector<Vec3>& points) {
    for (const auto& p : points) {
        out << format_number(p.x()) << ' ' << format_number(p.y()) << ' ' << format_number(p.z()) << '\n';
    }
}

std::vector<Vec3> read_xyz(std::istream& in) {
    std::vector<Vec3> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        double x = 0.0, y = 0.0, z = 0.0;
        if (!(fields >> x >> y >> z)) {
            throw Error(ErrorCode::SyntaxError, "bad point on line " + std::to_string(number));
        }
        out.emplace_back(x, y, z);
    }
    return out;
}

}  // namespace histcad
