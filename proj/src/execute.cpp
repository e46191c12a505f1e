#include "histcad/error.hpp"
#include "histcad/geomexec.hpp"

namespace histcad {

namespace {

bool boxes_disjoint(const Box3& a, const Box3& b) {
    for (int i = 0; i < 3; ++i) {
        if (a.hi[i] < b.lo[i] || b.hi[i] < a.lo[i]) return true;
    }
    return false;
}

ExecResult failure(std::string code, std::size_t part, std::string message) {
    ExecResult r;
    r.status = {false, std::move(code), part, std::move(message)};
    return r;
}

}  // namespace

ExecResult execute_document(const Document& doc, const ExecOptions& options) {
    const ValidationReport report = validate_document(doc);
    if (!report.ok()) {
        const Violation& v = report.violations.front();
        return failure(std::string(violation_code_name(v.code)), v.part + 1, v.message);
    }

    std::vector<Mesh> meshes;
    for (std::size_t i = 0; i < doc.parts.size(); ++i) {
        try {
            meshes.push_back(part_mesh(doc.parts[i]));
        } catch (const Error& e) {
            return failure(std::string(error_code_name(e.code())), i + 1, e.what());
        }
    }

    ExecResult result;
    if (meshes.size() == 1) {
        result.mesh = std::move(meshes.front());
        result.volume = result.mesh.signed_volume();
        return result;
    }

    // Additive assemblies of pairwise-separate bodies stay exact.
    bool additive = true;
    for (std::size_t i = 0; i < meshes.size() && additive; ++i) {
        const BooleanKind op = doc.parts[i].boolean;
        additive = op == BooleanKind::NewBody || op == BooleanKind::Join;
        for (std::size_t j = 0; j < i && additive; ++j) {
            additive = boxes_disjoint(meshes[i].bounds(), meshes[j].bounds());
        }
    }
    if (additive) {
        for (const auto& m : meshes) result.mesh.append(m);
        result.volume = result.mesh.signed_volume();
        return result;
    }

    Box3 scene;
    for (const auto& m : meshes) scene.add(m.bounds());
    try {
        const Grid grid = make_grid(scene, options.grid_resolution);
        SolidField field = SolidField::empty(grid);
        for (std::size_t i = 0; i < meshes.size(); ++i) {
            const SolidField body = SolidField::from_mesh(meshes[i], grid);
            BooleanKind op = doc.parts[i].boolean;
            // A later new body sits alongside what was built before it.
            if (op == BooleanKind::NewBody) op = BooleanKind::Join;
            apply_boolean(field, body, op);
        }
        result.sampled = true;
        result.volume = field.volume();
        result.mesh = field.surface();
    } catch (const Error& e) {
        return failure(std::string(error_code_name(e.code())), meshes.size(), e.what());
    }
    if (result.mesh.triangles.empty() || !(result.volume > 0.0)) {
        return failure(std::string(error_code_name(ErrorCode::ExecutionFailed)), doc.parts.size(),
                       "Boolean composition left no material");
    }
    return result;
}

}  // namespace histcad
