#include "histcad/analysis.hpp"

#include "histcad/error.hpp"

#include <json.hpp>

namespace histcad {

bool DocumentAnalysis::ok() const {
    for (const auto& p : parts) {
        if (!p.error.empty()) return false;
    }
    return true;
}

DocumentAnalysis analyze_document(const Document& doc) {
    DocumentAnalysis out;
    std::vector<OBB> boxes;
    std::vector<std::size_t> owners;
    for (std::size_t i = 0; i < doc.parts.size(); ++i) {
        PartAnalysis pa;
        pa.index = i;
        try {
            pa.loops = compute_loops(doc.parts[i].sketch);
            pa.dict = build_loop_dict(pa.loops.loops);
            pa.obb = compute_obb(doc.parts[i]);
            boxes.push_back(*pa.obb);
            owners.push_back(i);
        } catch (const Error& e) {
            pa.error = e.what();
        }
        out.parts.push_back(std::move(pa));
    }
    out.relations = build_relation_table(boxes);
    for (auto& r : out.relations.entries) {
        r.i = owners[r.i];
        r.j = owners[r.j];
    }
    return out;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson vec(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }

ojson loop_json(const std::string& name, const Loop& loop) {
    ojson j;
    j["name"] = name;
    ojson edges = ojson::array();
    for (const auto& e : loop.edges) edges.push_back(e.reversed ? "-" + e.id : e.id);
    j["edges"] = edges;
    j["area"] = loop.area;
    j["perimeter"] = loop.perimeter;
    return j;
}

}  // namespace

std::string analysis_to_json(const DocumentAnalysis& analysis) {
    ojson root;
    ojson parts = ojson::array();
    for (const auto& p : analysis.parts) {
        ojson jp;
        jp["part"] = p.index + 1;
        if (!p.error.empty()) jp["error"] = p.error;
        ojson outers = ojson::array();
        for (const auto& o : p.dict.outers) {
            ojson jo = loop_json(o.name, o.loop);
            ojson holes = ojson::array();
            for (const auto& h : o.holes) holes.push_back(loop_json(h.name, h.loop));
            jo["holes"] = holes;
            outers.push_back(jo);
        }
        jp["loops"] = outers;
        jp["dangling"] = p.loops.dangling;
        if (p.obb) {
            ojson box;
            box["center"] = vec(p.obb->center);
            box["axes"] = ojson::array({vec(p.obb->axes[0]), vec(p.obb->axes[1]), vec(p.obb->axes[2])});
            box["half_extents"] = vec(p.obb->half_extents);
            jp["obb"] = box;
        } else {
            jp["obb"] = nullptr;
        }
        parts.push_back(jp);
    }
    root["parts"] = parts;
    ojson rels = ojson::array();
    for (const auto& r : analysis.relations.entries) {
        ojson jr;
        jr["i"] = r.i + 1;
        jr["j"] = r.j + 1;
        jr["type"] = rel_type_name(r.type);
        ojson labels = ojson::array();
        for (const auto d : r.labels) labels.push_back(direction_name(d));
        jr["labels"] = labels;
        rels.push_back(jr);
    }
    root["relations"] = rels;
    return root.dump(2) + "\n";
}

}  // namespace histcad
