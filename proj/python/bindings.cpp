#include "histcad/analysis.hpp"
#include "histcad/constraints.hpp"
#include "histcad/flatten.hpp"
#include "histcad/format.hpp"
#include "histcad/geomexec.hpp"
#include "histcad/nlt.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace histcad;

namespace {

std::vector<Vec3> to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != 3) throw py::value_error("expected an (n, 3) array");
    std::vector<Vec3> out(static_cast<std::size_t>(a.shape(0)));
    auto r = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
    return out;
}

py::array_t<double> from_points(const std::vector<Vec3>& pts) {
    py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
    auto w = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (int k = 0; k < 3; ++k) w(i, k) = pts[i][k];
    }
    return a;
}

py::dict status_dict(const ExecStatus& s) {
    py::dict d;
    d["ok"] = s.ok;
    d["code"] = s.code;
    d["part"] = s.part;
    d["message"] = s.message;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Parametric CAD history toolkit: parsing, flattening, execution and transcription";

    // Messages start with the machine-readable code, e.g. "OPEN_LOOP: ...".
    py::register_exception<Error>(m, "HistcadError");

    py::class_<Document>(m, "Document")
        .def_static("parse",
                    [](const std::string& text, bool strict) {
                        ParseOptions o;
                        o.strict = strict;
                        return parse_document(text, o);
                    },
                    py::arg("text"), py::arg("strict") = true)
        .def("to_text", [](const Document& d) { return serialize_document(d); })
        .def("canonical", [](const Document& d) { return canonicalize(d); })
        .def_property_readonly("part_count", [](const Document& d) { return d.parts.size(); })
        .def("primitive_ids",
             [](const Document& d, std::size_t part) {
                 if (part >= d.parts.size()) throw py::index_error("part out of range");
                 std::vector<std::string> ids;
                 for (const auto& p : d.parts[part].sketch.primitives) ids.push_back(p.id);
                 return ids;
             },
             py::arg("part") = 0)
        .def("validate",
             [](const Document& d) {
                 py::list out;
                 for (const auto& v : validate_document(d).violations) {
                     py::dict item;
                     item["code"] = std::string(violation_code_name(v.code));
                     item["part"] = v.part + 1;
                     item["primitive"] = v.primitive;
                     item["message"] = v.message;
                     out.append(item);
                 }
                 return out;
             })
        .def("normalized", &normalize_document, py::arg("target_extent") = 1.0)
        .def("__eq__", [](const Document& a, const Document& b) { return a == b; });

    m.def("flatten_hier", [](const std::string& text) { return flatten_import(import_hierarchical(text)); },
          py::arg("text"), "Flattens `.hier` text into a Document.");

    m.def("analyze", [](const Document& d) { return analysis_to_json(analyze_document(canonicalize(d))); },
          "Loop, OBB and relation dump as JSON text.");

    m.def("execute",
          [](const Document& d, int grid) {
              ExecOptions o;
              o.grid_resolution = grid;
              ExecResult r;
              {
                  py::gil_scoped_release release;
                  r = execute_document(d, o);
              }
              py::dict out = status_dict(r.status);
              out["volume"] = r.volume;
              out["sampled"] = r.sampled;
              out["watertight"] = r.mesh.is_watertight();
              out["vertices"] = from_points(r.mesh.vertices);
              out["triangles"] = r.mesh.triangles;
              out["stl"] = py::bytes(stl_bytes(r.mesh));
              return out;
          },
          py::arg("doc"), py::arg("grid") = kDefaultGridResolution);

    m.def("solve",
          [](const Document& d, const std::map<std::string, double>& pins, std::size_t part, double tolerance) {
              if (part >= d.parts.size()) throw py::index_error("part out of range");
              std::vector<Pin> list;
              for (const auto& [k, v] : pins) list.push_back({k, v});
              SolveOptions o;
              o.tolerance = tolerance;
              const SolveResult r = solve(d.parts[part].sketch, list, o);
              Document edited = d;
              edited.parts[part].sketch = r.sketch;
              py::dict report;
              report["status"] = std::string(solve_status_name(r.report.status));
              report["iterations"] = r.report.iterations;
              report["max_residual"] = r.report.max_residual;
              report["notes"] = r.report.notes;
              return py::make_tuple(edited, report);
          },
          py::arg("doc"), py::arg("pins") = std::map<std::string, double>{}, py::arg("part") = 0,
          py::arg("tolerance") = 1e-8);

    m.def("nlt", [](const Document& d) { return build_nlt(d).text(); }, "Natural-language transcription.");

    m.def("build_prompt",
          [](const std::string& nlt_text, const std::string& task, bool multi_part) {
              const auto t = task_from_name(task);
              if (!t) throw py::value_error("task must be process, structure or function");
              return build_prompt(nlt_text, *t, multi_part);
          },
          py::arg("nlt"), py::arg("task"), py::arg("multi_part") = true);

    m.def("sample_surface",
          [](const py::array_t<double>& vertices, const std::vector<std::array<int, 3>>& triangles, std::size_t count,
             std::uint64_t seed) {
              Mesh mesh;
              mesh.vertices = to_points(vertices);
              for (const auto& t : triangles) {
                  for (const int v : t) {
                      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size()) {
                          throw py::index_error("triangle references a missing vertex");
                      }
                  }
              }
              mesh.triangles = triangles;
              return from_points(sample_surface(mesh, count, seed));
          },
          py::arg("vertices"), py::arg("triangles"), py::arg("count") = kDefaultSampleCount,
          py::arg("seed") = kDefaultSampleSeed);

    m.def("chamfer_distance",
          [](const py::array_t<double>& a, const py::array_t<double>& b) {
              return chamfer_distance(to_points(a), to_points(b));
          },
          py::arg("a"), py::arg("b"), "Squared symmetric chamfer distance.");

    m.def("sha256_hex", [](const std::string& s) { return sha256_hex(s); });
}
