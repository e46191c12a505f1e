// Drives the built histcad binary through popen.

#include "support/cases.hpp"
#include "unit/helpers.hpp"

#include "histcad/constraints.hpp"
#include "histcad/format.hpp"
#include "histcad/geomexec.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace histcad;
using namespace histcad::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (const char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Run run(const std::vector<std::string>& args) {
    const fs::path err = fs::path(HISTCAD_SCRATCH) / "stderr.txt";
    fs::create_directories(err.parent_path());
    std::string cmd = quote(HISTCAD_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>" + quote(err.string());
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_text(err.string());
    return r;
}

/// Fresh, empty scratch directory.
fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(HISTCAD_SCRATCH) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

/// Ten box documents of heights 1..10; document 4 has an open profile.
fs::path ten_boxes(const std::string& name) {
    const fs::path dir = scratch(name);
    for (int i = 0; i < 10; ++i) {
        Part p = box_part(Vec3::Zero(), Vec3(1, 1, 1 + i));
        if (i == 4) p.sketch.primitives.pop_back();
        write(dir / ("box" + std::to_string(i) + ".hcad"), serialize_document(single_part(p)));
    }
    return dir;
}

double printed_volume(const std::string& out, const std::string& file) {
    const auto line_at = out.find(file + " ok volume=");
    REQUIRE(line_at != std::string::npos);
    return std::stod(out.substr(line_at + file.size() + 11));
}

}  // namespace

TEST_CASE("validate reports per-file status and a summary") {
    const Run ok = run({"validate", fixture_path("square_extrude.hcad")});
    CHECK(ok.code == 0);
    CHECK(contains(ok.out, "square_extrude.hcad: ok"));
    CHECK(contains(ok.out, "1 files, 0 invalid"));
    CHECK(contains(ok.err, "level=info"));

    const Run bad = run({"validate", fixture_path("invalid_bad_radius.hcad"), fixture_path("square_hole.hcad")});
    CHECK(bad.code == 1);
    CHECK(contains(bad.out, "RADIUS_NONPOSITIVE"));
    CHECK(contains(bad.out, "2 files, 1 invalid"));

    const Run dir = run({"validate", HISTCAD_FIXTURES});
    CHECK(dir.code == 1);
    CHECK(contains(dir.out, "FIRST_NOT_NEW_BODY"));
    CHECK(contains(dir.out, "2 invalid"));
}

TEST_CASE("strict mode rejects unknown fields") {
    const fs::path dir = scratch("strict");
    std::string text = read_text(fixture_path("square_extrude.hcad"));
    text.insert(text.find('{') + 1, "\"colour\": \"red\",");
    write(dir / "coloured.hcad", text);
    const Run lenient = run({"validate", (dir / "coloured.hcad").string()});
    CHECK(lenient.code == 0);
    CHECK(contains(lenient.err, "level=warn"));
    const Run strict = run({"validate", "--strict", (dir / "coloured.hcad").string()});
    CHECK(strict.code == 1);
    CHECK(contains(strict.out, "SCHEMA_ERROR"));
}

TEST_CASE("flatten merges the shared edge and keeps going past a bad file") {
    const fs::path dir = scratch("flatten");
    const Run r = run({"flatten", "--out", dir.string(), fixture_path("shared_edge.hier"), fixture_path("open_loop.hier"),
                       fixture_path("face_with_hole.hier")});
    CHECK(r.code == 1);
    CHECK(contains(r.out, "OPEN_LOOP"));
    CHECK(contains(r.out, "3 files, 1 failed"));
    const Document shared = parse_document(read_text((dir / "shared_edge.hcad").string()));
    REQUIRE(shared.parts.size() == 1);
    CHECK(shared.parts[0].sketch.primitives.size() == 6);
    for (const auto& p : shared.parts[0].sketch.primitives) CHECK(p.kind() == PrimitiveKind::Line);
    CHECK(fs::exists(dir / "face_with_hole.hcad"));
    CHECK_FALSE(fs::exists(dir / "open_loop.hcad"));
    CHECK(run({"validate", (dir / "shared_edge.hcad").string()}).code == 0);
}

TEST_CASE("exec writes meshes whose volume matches the report") {
    const fs::path dir = scratch("exec");
    const Run r = run({"exec", "--out", dir.string(), fixture_path("square_extrude.hcad"),
                       fixture_path("square_hole.hcad")});
    CHECK(r.code == 0);
    for (const char* stem : {"square_extrude", "square_hole"}) {
        CAPTURE(stem);
        const Mesh m = read_stl(read_text((dir / (std::string(stem) + ".stl")).string()));
        CHECK(m.is_watertight());
        // STL stores floats, so the recomputed volume matches to float precision.
        const double reported = printed_volume(r.out, fixture_path(std::string(stem) + ".hcad"));
        CHECK(m.signed_volume() == doctest::Approx(reported).epsilon(1e-5));
        std::ifstream xyz(dir / (std::string(stem) + ".xyz"));
        CHECK(read_xyz(xyz).size() == kDefaultSampleCount);
    }
    CHECK(printed_volume(r.out, fixture_path("square_extrude.hcad")) == doctest::Approx(2.0));
    CHECK(contains(read_text((dir / "exec_status.log").string()), "2 files, 0 failed, IR 0"));
}

TEST_CASE("exec reports IR 0.1 for one failure in ten") {
    const fs::path in = ten_boxes("ir_in");
    const fs::path out = scratch("ir_out");
    const Run r = run({"exec", "--out", out.string(), in.string()});
    CHECK(r.code == 1);
    CHECK(contains(r.out, "10 files, 1 failed, IR 0.1\n"));
    CHECK(contains(r.out, "box4.hcad FAILED EXECUTION_FAILED part=1"));
    CHECK(contains(r.err, "code=EXECUTION_FAILED"));
    CHECK(fs::exists(out / "box9.stl"));
    CHECK_FALSE(fs::exists(out / "box4.stl"));
}

TEST_CASE("outputs do not depend on the number of jobs") {
    const fs::path in = ten_boxes("jobs_in");
    const std::vector<std::string> docs = {in.string(), fixture_path("stacked_assembly.hcad"),
                                           fixture_path("plate_minus_cylinder.hcad")};
    std::string first_log;
    for (const char* jobs : {"1", "3"}) {
        const fs::path out = scratch(std::string("jobs_") + jobs);
        std::vector<std::string> args = {"exec", "--grid", "48", "--jobs", jobs, "--out", out.string()};
        args.insert(args.end(), docs.begin(), docs.end());
        const Run r = run(args);
        CHECK(r.code == 1);
        const std::string log = read_text((out / "exec_status.log").string());
        if (first_log.empty()) {
            first_log = log;
            continue;
        }
        CHECK(log == first_log);
        for (const auto& e : fs::directory_iterator(out)) {
            const fs::path other = fs::path(HISTCAD_SCRATCH) / "jobs_1" / e.path().filename();
            CAPTURE(e.path().filename().string());
            CHECK(read_text(e.path().string()) == read_text(other.string()));
        }
    }
    const Run a = run({"nlt", "--jobs", "1", HISTCAD_FIXTURES});
    const Run b = run({"nlt", "--jobs", "4", HISTCAD_FIXTURES});
    CHECK(a.out == b.out);
}

TEST_CASE("no matching inputs is a usage error") {
    const fs::path dir = scratch("empty");
    const Run r = run({"validate", (dir / "*.hcad").string()});
    CHECK(r.code == 2);
    CHECK(contains(r.err, "NO_INPUTS"));
    CHECK(run({"exec", dir.string()}).code == 2);
    CHECK(run({"validate", "--bogus", fixture_path("square_extrude.hcad")}).code == 2);
    CHECK(run({"nlt"}).code == 2);
}

TEST_CASE("config file supplies defaults and rejects unknown keys") {
    const fs::path dir = scratch("config");
    write(dir / "good.json", "{\"jobs\": 2, \"grid\": 40, \"out\": \"" + (dir / "out").string() + "\"}");
    const Run r = run({"exec", "--config", (dir / "good.json").string(), fixture_path("square_extrude.hcad")});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "out" / "square_extrude.stl"));
    write(dir / "bad.json", "{\"colour\": 1}");
    const Run bad = run({"validate", "--config", (dir / "bad.json").string(), fixture_path("square_extrude.hcad")});
    CHECK(bad.code == 2);
    CHECK(contains(bad.err, "unknown key colour"));
}

TEST_CASE("edit propagates a pinned radius") {
    const fs::path dir = scratch("edit");
    Part p;
    p.sketch = concentric_equal_circles();
    write(dir / "rings.hcad", serialize_document(single_part(p)));
    const Run r = run({"edit", "--pin", "C1.radius=2", (dir / "rings.hcad").string()});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "status converged"));
    const Document edited = parse_document(read_text((dir / "rings.edited.hcad").string()));
    const Sketch& s = edited.parts[0].sketch;
    CHECK(std::get<Circle>(s.find("C1")->curve).radius == doctest::Approx(2.0));
    CHECK(std::get<Circle>(s.find("C2")->curve).radius == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(check_satisfied(s, 1e-8).all_pass());

    write(dir / "pins.json", "{\"C1.radius\": 3}");
    const Run file_pins = run({"edit", "--pins", (dir / "pins.json").string(), "--out", (dir / "out").string(),
                               (dir / "rings.hcad").string()});
    CHECK(file_pins.code == 0);
    const Document from_file = parse_document(read_text((dir / "out" / "rings.edited.hcad").string()));
    CHECK(std::get<Circle>(from_file.parts[0].sketch.find("C2")->curve).radius == doctest::Approx(3.0).epsilon(1e-8));

    CHECK(run({"edit", "--pin", "C1.radius", (dir / "rings.hcad").string()}).code == 2);
    const Run unknown = run({"edit", "--pin", "C9.radius=1", (dir / "rings.hcad").string()});
    CHECK(unknown.code == 2);
}

TEST_CASE("edit reports contradictions as infeasible") {
    const fs::path dir = scratch("edit_hv");
    Part p = box_part(Vec3::Zero(), Vec3(1, 1, 1));
    p.sketch.constraints = {{ConstraintKind::Horizontal, {{"L1"}}, {}}, {ConstraintKind::Vertical, {{"L1"}}, {}}};
    write(dir / "hv.hcad", serialize_document(single_part(p)));
    const Run r = run({"edit", (dir / "hv.hcad").string()});
    CHECK(r.code == 1);
    CHECK(contains(r.out, "status INFEASIBLE"));
    CHECK_FALSE(fs::exists(dir / "hv.edited.hcad"));
}

TEST_CASE("nlt prints transcriptions or writes them to files") {
    const Run r = run({"nlt", fixture_path("square_extrude.hcad")});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "Line L1 runs from (0, 0) to (1, 0)."));
    CHECK(contains(r.out, "Boolean operation: new body."));
    const fs::path dir = scratch("nlt");
    const Run files = run({"nlt", "--out", dir.string(), fixture_path("stacked_assembly.hcad")});
    CHECK(files.code == 0);
    const std::string text = read_text((dir / "stacked_assembly.nlt.txt").string());
    CHECK(contains(text, "Relation of part 1 to part 2"));
    CHECK(contains(r.out, "# "));
}

TEST_CASE("analyze writes the JSON dump") {
    const fs::path dir = scratch("analyze");
    const Run r = run({"analyze", "--out", dir.string(), fixture_path("square_hole.hcad")});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "1 outer loops, 1 holes"));
    const auto j = nlohmann::json::parse(read_text((dir / "square_hole.analysis.json").string()));
    CHECK(j.is_object());
}

TEST_CASE("eval scores documents against reference clouds") {
    const fs::path in = ten_boxes("eval_in");
    const fs::path refs = scratch("eval_refs");
    CHECK(run({"exec", "--out", refs.string(), in.string()}).code == 1);
    const fs::path out = scratch("eval_out");
    const Run r = run({"eval", "--ref", refs.string(), "--out", out.string(), in.string()});
    CHECK(r.code == 1);
    CHECK(contains(r.out, "documents 10, failed 1, IR 0.1\n"));
    const auto m = nlohmann::json::parse(read_text((out / "metrics.json").string()));
    CHECK(m["invalidity_ratio"].get<double>() == doctest::Approx(0.1));
    // Sampling is seeded, so the references equal the regenerated clouds.
    CHECK(m["average_chamfer"].get<double>() == 0.0);
    CHECK(m["median_chamfer"].get<double>() == 0.0);
    CHECK(m["per_document"].size() == 10);
}
