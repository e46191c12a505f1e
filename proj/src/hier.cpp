#include "histcad/format.hpp"

#include "json_io.hpp"

#include <set>

namespace histcad {

using namespace detail;

namespace {

const std::set<std::string, std::less<>> kKnownUnsupported = {"spline", "bspline", "nurbs", "ellipse",
                                                             "elliptical_arc", "bezier", "polyline"};

Curve read_hier_curve(const json& j, const std::string& path, const SchemaContext& ctx) {
    const std::string type = as_string(require(j, "type", path), path + "/type");
    if (type == "line") {
        check_keys(j, path, {"id", "type", "start", "end", "reversed"}, ctx);
        return Line{as_vec2(require(j, "start", path), path + "/start"), as_vec2(require(j, "end", path), path + "/end")};
    }
    if (type == "arc") {
        check_keys(j, path, {"id", "type", "start", "mid", "end", "reversed"}, ctx);
        return Arc{as_vec2(require(j, "start", path), path + "/start"), as_vec2(require(j, "mid", path), path + "/mid"),
                   as_vec2(require(j, "end", path), path + "/end")};
    }
    if (type == "circle") {
        check_keys(j, path, {"id", "type", "center", "radius", "reversed"}, ctx);
        return Circle{as_vec2(require(j, "center", path), path + "/center"),
                      as_number(require(j, "radius", path), path + "/radius")};
    }
    const std::string detail = kKnownUnsupported.count(type) ? "" : " (unrecognized)";
    throw Error(ErrorCode::UnsupportedCurve, path + ": curve kind '" + type + "' is not supported" + detail);
}

void check_loop_closed(const HierLoop& loop, double eps, const std::string& path) {
    const auto& segs = loop.segments;
    const bool has_circle = std::any_of(segs.begin(), segs.end(), [](const LoopSegment& s) {
        return std::holds_alternative<Circle>(s.curve);
    });
    if (has_circle) {
        if (segs.size() != 1) {
            throw Error(ErrorCode::OpenLoop, path + ": a circle must form a loop on its own");
        }
        return;
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Curve a = segs[i].traversed();
        const Curve b = segs[(i + 1) % segs.size()].traversed();
        const double gap = (curve_end(a) - curve_start(b)).norm();
        if (gap > eps) {
            throw Error(ErrorCode::OpenLoop, path + ": segment " + std::to_string(i) + " ends " +
                                                 std::to_string(gap) + " away from the next segment");
        }
    }
}

}  // namespace

double hierarchical_extent(const HierarchicalSketch& sketch) {
    Box2 box;
    for (const auto& face : sketch.faces) {
        for (const auto& loop : face.loops) {
            for (const auto& seg : loop.segments) {
                const Box2 b = curve_bounds(seg.curve);
                if (!b.empty()) {
                    box.add(b.lo);
                    box.add(b.hi);
                }
            }
        }
    }
    return box.empty() ? 0.0 : box.extent().maxCoeff();
}

HierarchicalImport import_hierarchical(std::string_view text) {
    const json root = parse_json_text(text);
    const SchemaContext ctx{true, nullptr};
    if (!root.is_object()) {
        schema_error("", "root must be an object");
    }
    check_keys(root, "", {"hier_version", "source", "parts"}, ctx);
    const json& version = require(root, "hier_version", "");
    if (!version.is_number_integer() || version.get<long long>() != 1) {
        schema_error("/hier_version", "unsupported hierarchical format version");
    }
    HierarchicalImport out;
    if (root.contains("source")) {
        out.source = as_string(root["source"], "/source");
    }
    const json& parts = require_array(root, "parts", "");
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const std::string ppath = "/parts/" + std::to_string(pi);
        const json& pj = parts[pi];
        if (!pj.is_object()) {
            schema_error(ppath, "expected an object");
        }
        check_keys(pj, ppath, {"plane", "faces", "constraints", "extrusion", "boolean"}, ctx);
        HierarchicalSketch sketch;
        sketch.plane = read_plane(require(pj, "plane", ppath), ppath + "/plane", ctx);
        const json& faces = require_array(pj, "faces", ppath);
        std::set<std::string> ids;
        std::size_t auto_id = 0;
        std::vector<std::string> loop_paths;
        for (std::size_t fi = 0; fi < faces.size(); ++fi) {
            const std::string fpath = ppath + "/faces/" + std::to_string(fi);
            if (!faces[fi].is_object()) {
                schema_error(fpath, "expected an object");
            }
            check_keys(faces[fi], fpath, {"loops"}, ctx);
            const json& loops = require_array(faces[fi], "loops", fpath);
            if (loops.empty()) {
                schema_error(fpath + "/loops", "a face needs at least one loop");
            }
            HierFace face;
            for (std::size_t li = 0; li < loops.size(); ++li) {
                const std::string lpath = fpath + "/loops/" + std::to_string(li);
                if (!loops[li].is_object()) {
                    schema_error(lpath, "expected an object");
                }
                check_keys(loops[li], lpath, {"curves"}, ctx);
                const json& curves = require_array(loops[li], "curves", lpath);
                if (curves.empty()) {
                    schema_error(lpath + "/curves", "a loop needs at least one curve");
                }
                HierLoop loop;
                for (std::size_t ci = 0; ci < curves.size(); ++ci) {
                    const std::string cpath = lpath + "/curves/" + std::to_string(ci);
                    if (!curves[ci].is_object()) {
                        schema_error(cpath, "expected an object");
                    }
                    LoopSegment seg;
                    seg.curve = read_hier_curve(curves[ci], cpath, ctx);
                    if (curves[ci].contains("reversed")) {
                        seg.reversed = as_bool(curves[ci]["reversed"], cpath + "/reversed");
                    }
                    if (curves[ci].contains("id")) {
                        seg.id = as_string(curves[ci]["id"], cpath + "/id");
                    } else {
                        do {
                            seg.id = "e" + std::to_string(++auto_id);
                        } while (ids.count(seg.id));
                    }
                    if (seg.id.empty() || !ids.insert(seg.id).second) {
                        throw ParseError(ErrorCode::DuplicateId, "curve id '" + seg.id + "' is not unique", 0, 0,
                                         cpath + "/id");
                    }
                    loop.segments.push_back(std::move(seg));
                }
                face.loops.push_back(std::move(loop));
                loop_paths.push_back(lpath);
            }
            sketch.faces.push_back(std::move(face));
        }
        if (pj.contains("constraints")) {
            const json& cons = require_array(pj, "constraints", ppath);
            for (std::size_t k = 0; k < cons.size(); ++k) {
                sketch.constraints.push_back(read_constraint(cons[k], ppath + "/constraints/" + std::to_string(k), ctx));
            }
        }
        const double eps = geom_eps(hierarchical_extent(sketch));
        std::size_t loop_index = 0;
        for (const auto& face : sketch.faces) {
            for (const auto& loop : face.loops) {
                check_loop_closed(loop, eps, loop_paths[loop_index++]);
            }
        }
        out.sketches.push_back(std::move(sketch));
        out.extrusions.push_back(read_extrusion(require(pj, "extrusion", ppath), ppath + "/extrusion", ctx));
        out.booleans.push_back(read_boolean(require(pj, "boolean", ppath), ppath + "/boolean"));
    }
    return out;
}

std::string export_hierarchical(const HierarchicalImport& data) {
    std::string out = "{\n  \"hier_version\": 1,\n  \"source\": " + write_string(data.source) + ",\n  \"parts\": [";
    for (std::size_t pi = 0; pi < data.sketches.size(); ++pi) {
        const auto& sk = data.sketches[pi];
        out += pi ? ",\n" : "\n";
        out += "    {\n      \"plane\": " + write_plane(sk.plane, 0.0) + ",\n      \"faces\": [";
        for (std::size_t fi = 0; fi < sk.faces.size(); ++fi) {
            out += fi ? ",\n" : "\n";
            out += "        {\"loops\": [";
            for (std::size_t li = 0; li < sk.faces[fi].loops.size(); ++li) {
                out += li ? ",\n" : "\n";
                out += "          {\"curves\": [";
                const auto& segs = sk.faces[fi].loops[li].segments;
                for (std::size_t ci = 0; ci < segs.size(); ++ci) {
                    out += ci ? ",\n" : "\n";
                    out += "            {\"id\": " + write_string(segs[ci].id) + ", " +
                           write_curve_fields(segs[ci].curve, 0.0);
                    if (segs[ci].reversed) {
                        out += ", \"reversed\": true";
                    }
                    out += "}";
                }
                out += "\n          ]}";
            }
            out += "\n        ]}";
        }
        out += "\n      ],\n      \"constraints\": [";
        for (std::size_t k = 0; k < sk.constraints.size(); ++k) {
            out += (k ? ", " : "") + write_constraint(sk.constraints[k], 0.0);
        }
        out += "],\n";
        const Extrusion ext = pi < data.extrusions.size() ? data.extrusions[pi] : Extrusion{LinearExtrusion{}};
        const BooleanKind op = pi < data.booleans.size() ? data.booleans[pi] : BooleanKind::NewBody;
        out += "      \"extrusion\": " + write_extrusion(ext, 0.0) + ",\n";
        out += "      \"boolean\": \"" + std::string(boolean_kind_name(op)) + "\"\n    }";
    }
    out += data.sketches.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

}  // namespace histcad
