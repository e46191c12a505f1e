// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include "support/cases.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include "histcad/analysis.hpp"
#include "histcad/constraints.hpp"
#include "histcad/error.hpp"
#include "histcad/flatten.hpp"
#include "histcad/format.hpp"
#include "histcad/geomexec.hpp"
#include "histcad/nlt.hpp"
#include "histcad/relations.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace histcad;
using namespace histcad::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Collects failed checks; the first few messages end up in the report line.
struct Tally {
    int checks = 0;
    int failures = 0;
    std::vector<std::string> notes;
    std::string detail;

    void check(bool ok, const std::string& what) {
        ++checks;
        if (ok) return;
        ++failures;
        if (notes.size() < 3) notes.push_back(what);
    }
    bool ok() const { return failures == 0; }
};

std::string fixture_path(const std::string& name) { return std::string(HISTCAD_FIXTURES) + "/" + name; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Document load_fixture(const std::string& name) { return parse_document(read_text(fixture_path(name))); }

std::vector<std::string> fixtures_with(const std::string& ext) {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(HISTCAD_FIXTURES)) {
        if (e.path().extension() == ext) out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Sketch rect_sketch(double x0, double y0, double x1, double y1) {
    Sketch s;
    const Vec2 p[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    for (int i = 0; i < 4; ++i) s.primitives.push_back({"L" + std::to_string(i + 1), Line{p[i], p[(i + 1) % 4]}});
    return s;
}

Part box_part(const Vec3& lo, const Vec3& size, BooleanKind op = BooleanKind::NewBody) {
    Part p;
    p.sketch = rect_sketch(lo.x(), lo.y(), lo.x() + size.x(), lo.y() + size.y());
    p.sketch.plane.translation = Vec3(0, 0, lo.z());
    p.extrusion = LinearExtrusion{Vec3::UnitZ(), size.z(), false, 0.0};
    p.boolean = op;
    return p;
}

OBB cube(const Vec3& center, double half = 0.5) {
    OBB b;
    b.center = center;
    b.axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    b.half_extents = Vec3::Constant(half);
    return b;
}

double rel_error(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

// ---------------------------------------------------------------------------

void flatten_parity(Tally& t) {
    Rng rng(1001);
    for (int i = 0; i < 1000; ++i) {
        const GridSketch gs = random_grid_sketch(rng);
        const Sketch flat = flatten_sketch(gs.sketch);
        const double eps = kKeyEpsRelative * hierarchical_extent(gs.sketch);
        std::vector<SegmentKey> got;
        for (const auto& p : flat.primitives) got.push_back(segment_key(p.curve, eps));
        std::sort(got.begin(), got.end());
        t.check(got == brute_force_parity(decompose(gs.sketch), eps), "key mismatch on grid sketch " + std::to_string(i));
        const std::string why = compare_with_grid(flat, gs);
        t.check(why.empty(), "grid sketch " + std::to_string(i) + ": " + why);
    }
    const Sketch shared = flatten_import(import_hierarchical(read_text(fixture_path("shared_edge.hier")))).parts[0].sketch;
    t.check(shared.primitives.size() == 6, "shared_edge gave " + std::to_string(shared.primitives.size()) + " segments");
    const LoopResult loops = compute_loops(shared);
    t.check(loops.loops.size() == 1 && loops.dangling.empty(), "shared_edge outline is not one closed loop");
    t.detail = "1000 grid sketches, shared_edge -> " + std::to_string(shared.primitives.size()) + " segments";
}

void loop_fidelity(Tally& t) {
    const LoopDict hole = build_loop_dict(compute_loops(load_fixture("square_hole.hcad").parts[0].sketch).loops);
    t.check(hole.outers.size() == 1 && hole.outers[0].holes.size() == 1, "square_hole is not {1 outer, 1 hole}");

    // First container wins, then break: the 36 loop lands in the 100 outer,
    // and the 4 loop is only compared against outers, so it joins the same one.
    const LoopDict triple = build_loop_dict(compute_loops(load_fixture("triple_nesting.hcad").parts[0].sketch).loops);
    const bool shape = triple.outers.size() == 1 && triple.outers[0].holes.size() == 2;
    t.check(shape, "triple_nesting grouping differs from the hand trace");
    if (shape) {
        t.check(std::abs(triple.outers[0].loop.area - 100.0) < 1e-9 &&
                    std::abs(std::abs(triple.outers[0].holes[0].loop.area) - 36.0) < 1e-9 &&
                    std::abs(std::abs(triple.outers[0].holes[1].loop.area) - 4.0) < 1e-9,
                "triple_nesting loop areas differ from 100 / 36 / 4");
    }

    Rng rng(2002);
    for (int i = 0; i < 500; ++i) {
        const Arrangement a = random_arrangement(rng);
        const LoopResult loops = compute_loops(a.sketch);
        const std::string why = check_arrangement(a, loops, build_loop_dict(loops.loops));
        t.check(why.empty(), "arrangement " + std::to_string(i) + ": " + why);
    }
    t.detail = "square_hole, triple_nesting, 500 arrangements";
}

void relation_fidelity(Tally& t) {
    Rng rng(3003);
    int undecided = 0;
    for (int i = 0; i < 1000; ++i) {
        const OBB a = random_obb(rng), b = random_obb(rng);
        const SampledRelation s = sampled_relation(a, b, touch_epsilon(a, b));
        if (s == SampledRelation::Undecided) {
            ++undecided;
        } else {
            t.check(sat_test(a, b).collides == (s == SampledRelation::Overlap),
                    "pair " + std::to_string(i) + " disagrees with the sampling oracle");
        }
        const RelationTable table = build_relation_table({a, b});
        const Relation* ab = table.find(0, 1);
        const Relation* ba = table.find(1, 0);
        t.check(ab && ba, "pair " + std::to_string(i) + " missing table entries");
        if (!ab || !ba) continue;
        RelType dual = ab->type;
        if (dual == RelType::Contain) dual = RelType::Contained;
        else if (dual == RelType::Contained) dual = RelType::Contain;
        std::vector<Direction> flipped;
        for (const auto d : ab->labels) flipped.push_back(opposite(d));
        std::sort(flipped.begin(), flipped.end());
        t.check(ba->type == dual && ba->labels == flipped, "pair " + std::to_string(i) + " breaks duality");
        t.check(ab->type == classify_relation(a, b), "table entry differs from classify_relation");
    }
    // Near-contact pairs: slide b along the center line to the SAT contact
    // distance, then offset it slightly in or out.
    int near = 0;
    for (int i = 0; i < 300; ++i) {
        const OBB a = random_obb(rng);
        OBB b = random_obb(rng);
        const Vec3 dir = (b.center - a.center).normalized();
        if (!dir.allFinite()) continue;
        double lo = 0.0, hi = 20.0;
        for (int k = 0; k < 60; ++k) {
            b.center = a.center + dir * (0.5 * (lo + hi));
            (sat_test(a, b).collides ? lo : hi) = 0.5 * (lo + hi);
        }
        b.center = a.center + dir * (hi + (i % 2 ? 1e-3 : -1e-3) * (a.diagonal() + b.diagonal()));
        const SampledRelation s = sampled_relation(a, b, touch_epsilon(a, b));
        if (s == SampledRelation::Undecided) {
            ++undecided;
            continue;
        }
        ++near;
        t.check(sat_test(a, b).collides == (s == SampledRelation::Overlap),
                "near-contact pair " + std::to_string(i) + " disagrees with the sampling oracle");
    }
    // Everything excluded must be a genuine near-contact case or a budget
    // exhaustion; a large share would mean the oracle decides too little.
    t.check(undecided <= 50, std::to_string(undecided) + " of 1000 pairs undecided by the oracle");

    t.check(classify_relation(cube(Vec3::Zero()), cube(Vec3(3, 0, 0))) == RelType::Separate, "distance-3 cubes");
    t.check(classify_relation(cube(Vec3::Zero()), cube(Vec3(1, 0, 0))) == RelType::Touch, "face-sharing cubes");
    t.check(classify_relation(cube(Vec3::Zero()), cube(Vec3(0.5, 0, 0))) == RelType::Intersect, "half-overlap cubes");
    t.check(classify_relation(cube(Vec3::Zero(), 0.25), cube(Vec3::Zero())) == RelType::Contained, "nested cubes");
    t.detail = "1000 random + " + std::to_string(near) + " near-contact pairs, " + std::to_string(undecided) +
               " inside the contact band or undecided";
}

void constraint_semantics(Tally& t) {
    const auto max_abs = [](const std::vector<double>& v) {
        double m = 0.0;
        for (const double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    std::vector<bool> seen(kConstraintKindCount, false);
    for (const auto& c : constraint_cases()) {
        seen[static_cast<std::size_t>(c.kind)] = true;
        t.check(max_abs(residual(c.satisfied.constraints[0], c.satisfied)) < 1e-12, c.name + " satisfied residual");
        t.check(max_abs(residual(c.violated.constraints[0], c.violated)) > 0.0, c.name + " violated residual");
    }
    t.check(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }), "a constraint kind has no case");
    Rng rng(4004);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double d = jacobian_discrepancy(random_constrained_sketch(rng));
        worst = std::max(worst, d);
        t.check(d < 1e-5, "jacobian discrepancy " + num(d) + " on sketch " + std::to_string(i));
    }
    t.detail = std::to_string(constraint_cases().size()) + " residual cases, worst jacobian error " + num(worst);
}

void solver_editability(Tally& t) {
    double slowest = 0.0;
    const auto timed = [&](auto&& f) {
        const auto t0 = Clock::now();
        auto r = f();
        slowest = std::max(slowest, seconds_since(t0));
        return r;
    };
    const SolveResult circles = timed([] { return solve(concentric_equal_circles(), {{"C1.radius", 2.0}}); });
    t.check(circles.report.status == SolveStatus::Converged, "pinned radius did not converge");
    for (const auto& e : check_satisfied(circles.sketch, 1e-8).checks) {
        t.check(e.pass, "pinned radius leaves a residual above 1e-8");
    }
    t.check(std::abs(std::get<Circle>(circles.sketch.find("C2")->curve).radius - 2.0) < 1e-8,
            "C2 did not follow the pinned radius");

    const SolveResult square =
        timed([] { return solve(constrained_square(), {{"L1.start.x", 0.5}, {"L1.start.y", 0.0}}); });
    t.check(square.report.status == SolveStatus::Converged, "moved corner did not converge");
    t.check(check_satisfied(square.sketch, 1e-6).all_pass(), "moved corner breaks a constraint at 1e-6");

    Sketch hv;
    hv.primitives = {{"L1", Line{{0, 0}, {1, 0.2}}}};
    hv.constraints = {{ConstraintKind::Horizontal, {{"L1"}}, {}}, {ConstraintKind::Vertical, {{"L1"}}, {}}};
    const SolveResult contra = timed([&] { return solve(hv); });
    t.check(contra.report.status == SolveStatus::Infeasible, "horizontal and vertical not reported infeasible");
    t.check(slowest < 1.0, "a solve took " + num(slowest) + " s");
    t.detail = "slowest solve " + num(slowest) + " s";
}

void geometry_execution(Tally& t) {
    Rng rng(6006);
    int meshes = 0;
    double worst_linear = 0.0, worst_pappus = 0.0;
    for (int i = 0; i < 100; ++i) {
        const RandomProfile rp = random_profile(rng);
        Part p;
        p.sketch = rp.sketch;
        const double len = uniform(rng, 0.1, 5.0);
        p.extrusion = LinearExtrusion{Vec3::UnitZ(), len, false, 0.0};
        const Mesh m = part_mesh(p);
        ++meshes;
        const double e = rel_error(m.signed_volume(), rp.area * len);
        worst_linear = std::max(worst_linear, e);
        t.check(e < 1e-3, "profile " + std::to_string(i) + " volume off by " + num(e));
        t.check(m.is_watertight(), "profile " + std::to_string(i) + " mesh not watertight");
    }
    for (int i = 0; i < 50; ++i) {
        const double x0 = uniform(rng, 0.1, 3), w = uniform(rng, 0.1, 3);
        const double y0 = uniform(rng, -2, 2), h = uniform(rng, 0.1, 3);
        Part p;
        p.sketch = rect_sketch(x0, y0, x0 + w, y0 + h);
        p.extrusion = RotatedExtrusion{Vec3::Zero(), Vec3::UnitY(), 0.0, kTwoPi};
        const Mesh m = part_mesh(p);
        ++meshes;
        const double e = rel_error(m.signed_volume(), pappus_volume(w * h, x0 + w / 2, kTwoPi));
        worst_pappus = std::max(worst_pappus, e);
        t.check(e < 1e-2, "revolution " + std::to_string(i) + " volume off by " + num(e));
        t.check(m.is_watertight(), "revolution " + std::to_string(i) + " mesh not watertight");
    }
    for (const auto& name : fixtures_with(".hcad")) {
        const ExecResult r = execute_document(load_fixture(name));
        if (!r.status.ok) continue;  // the invalid_* fixtures
        ++meshes;
        t.check(r.mesh.is_watertight(), name + " mesh not watertight");
    }
    t.detail = std::to_string(meshes) + " meshes, worst linear error " + num(worst_linear) + ", worst Pappus error " +
               num(worst_pappus);
}

void metrics(Tally& t) {
    Rng rng(7007);
    for (int i = 0; i < 40; ++i) {
        const int na = uniform_int(rng, 1, 500), nb = uniform_int(rng, 1, 500);
        std::vector<Vec3> a, b;
        for (int k = 0; k < na; ++k) a.emplace_back(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
        for (int k = 0; k < nb; ++k) b.emplace_back(uniform(rng, -1, 1), uniform(rng, 0, 2), uniform(rng, -1, 1));
        t.check(chamfer_distance(a, b) == brute_force_chamfer(a, b), "chamfer differs from brute force on set " + std::to_string(i));
    }
    std::vector<BatchInput> inputs;
    for (int i = 0; i < 10; ++i) {
        Part p = box_part(Vec3::Zero(), Vec3(1, 1, 1 + i));
        if (i == 3) p.sketch.primitives.pop_back();
        Document d;
        d.parts.push_back(p);
        inputs.push_back({"doc" + std::to_string(i), d, std::nullopt});
    }
    const MetricReport r = batch_metrics(inputs, {}, 4);
    t.check(std::abs(r.invalidity - 0.10) < 1e-15, "IR is " + num(r.invalidity));

    std::vector<DocumentMetric> docs(3);
    docs[0].chamfer = 2.0;
    docs[1].chamfer = 4.0;
    docs[2].chamfer = 9.0;
    const MetricReport s = summarize_metrics(docs);
    t.check(s.average_chamfer && *s.average_chamfer == 5.0, "average CD of {2,4,9} is not 5");
    t.check(s.median_chamfer && *s.median_chamfer == 4.0, "median CD of {2,4,9} is not 4");
    t.detail = "40 chamfer sets, IR " + num(r.invalidity);
}

/// Byte-level mutations of a seed text.
std::string mutate(Rng& rng, std::string s, const std::vector<std::string>& donors) {
    static const char* kTokens[] = {"{", "}", "[", "]", ",", ":", "\"", "null", "true", "-1e309", "1e-320",
                                    "NaN", "\"type\"", "\"id\"", "\\u0000", "0", "-0", "\xff", "\xc3\x28"};
    const int edits = uniform_int(rng, 1, 8);
    for (int e = 0; e < edits; ++e) {
        const std::size_t at = s.empty() ? 0 : static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(s.size()) - 1));
        switch (uniform_int(rng, 0, 6)) {
        case 0:
            if (!s.empty()) s[at] = static_cast<char>(uniform_int(rng, 0, 255));
            break;
        case 1:
            if (!s.empty()) s.erase(at, static_cast<std::size_t>(uniform_int(rng, 1, 16)));
            break;
        case 2: s.insert(at, kTokens[uniform_int(rng, 0, static_cast<int>(std::size(kTokens)) - 1)]); break;
        case 3: s.resize(at); break;
        case 4: {
            const std::string& d = donors[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(donors.size()) - 1))];
            const std::size_t from = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(d.size()) - 1));
            s.insert(at, d.substr(from, static_cast<std::size_t>(uniform_int(rng, 1, 64))));
            break;
        }
        case 5:
            if (!s.empty()) s.insert(at, static_cast<std::size_t>(uniform_int(rng, 1, 4)), s[at]);
            break;
        default: {
            // Swap a number for an extreme one.
            const std::size_t d = s.find_first_of("0123456789", at);
            if (d != std::string::npos) s.replace(d, 1, chance(rng, 0.5) ? "1e308" : "-4.9e-324");
            break;
        }
        }
    }
    return s;
}

void format_stability(Tally& t) {
    int fixtures = 0;
    for (const auto& name : fixtures_with(".hcad")) {
        const Document d = load_fixture(name);
        ++fixtures;
        t.check(parse_document(serialize_document(d)) == canonicalize(d), name + " does not round-trip");
    }
    Rng rng(8008);
    for (int i = 0; i < 1000; ++i) {
        const Document d = random_document(rng);
        t.check(parse_document(serialize_document(d)) == canonicalize(d), "random document " + std::to_string(i));
    }

    std::vector<std::string> hcad, hier;
    for (const auto& name : fixtures_with(".hcad")) hcad.push_back(read_text(fixture_path(name)));
    for (const auto& name : fixtures_with(".hier")) hier.push_back(read_text(fixture_path(name)));
    std::vector<std::string> donors = hcad;
    donors.insert(donors.end(), hier.begin(), hier.end());

    int accepted = 0, rejected = 0;
    for (int i = 0; i < 10000; ++i) {
        const bool as_hier = i % 4 == 3;
        const auto& seeds = as_hier ? hier : hcad;
        std::string text;
        if (i == 0) text = std::string(200000, '[');
        else if (i == 1) text = "{\"version\":1,\"parts\":" + std::string(100000, '[');
        else text = mutate(rng, seeds[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(seeds.size()) - 1))], donors);
        try {
            if (as_hier) {
                const Document d = flatten_import(import_hierarchical(text));
                validate_document(d);
            } else {
                const Document d = parse_document(text);
                validate_document(d);
                serialize_document(d);
            }
            ++accepted;
        } catch (const Error&) {
            ++rejected;
        } catch (const std::exception& e) {
            t.check(false, "fuzz case " + std::to_string(i) + " escaped as " + e.what());
        } catch (...) {
            t.check(false, "fuzz case " + std::to_string(i) + " threw a non-exception");
        }
    }
    t.detail = std::to_string(fixtures) + " fixtures + 1000 random documents round-trip, fuzz " + std::to_string(accepted) +
               " accepted / " + std::to_string(rejected) + " rejected";
}

void nlt_fidelity(Tally& t) {
    // The three quoted task fragments.
    const std::pair<AnnotationTask, const char*> fragments[] = {
        {AnnotationTask::ModelingProcess,
         "Output a continuous natural-language paragraph without lists or special characters."},
        {AnnotationTask::GeometricStructure, "Do not infer function, dimensions, or modeling steps."},
        {AnnotationTask::FunctionalType, "concise, specific noun phrase such as 'hex head bolt'"},
    };
    Rng rng(9009);
    int prompts = 0, permutations = 0;
    for (const auto& name : fixtures_with(".hcad")) {
        const Document d = load_fixture(name);
        if (!validate_document(d).ok()) continue;
        const Nlt nlt = build_nlt(d);
        for (const auto& [task, fragment] : fragments) {
            const std::string p = build_prompt(nlt, task);
            ++prompts;
            t.check(p.find(fragment) != std::string::npos, name + ": prompt lacks its task fragment");
            t.check(p.find("{NLT}") == std::string::npos, name + ": placeholder left in prompt");
        }
        const std::string base = nlt.text();
        for (int k = 0; k < 10; ++k) {
            Document shuffled = d;
            for (auto& part : shuffled.parts) {
                std::shuffle(part.sketch.primitives.begin(), part.sketch.primitives.end(), rng);
                std::shuffle(part.sketch.constraints.begin(), part.sketch.constraints.end(), rng);
            }
            ++permutations;
            t.check(build_nlt(shuffled).text() == base, name + ": transcription depends on primitive order");
        }
    }
    for (int i = 0; i < 100; ++i) {
        Document d = random_document(rng);
        const std::string base = build_nlt(d).text();
        for (auto& part : d.parts) std::shuffle(part.sketch.primitives.begin(), part.sketch.primitives.end(), rng);
        ++permutations;
        t.check(build_nlt(d).text() == base, "random document " + std::to_string(i) + " transcription depends on order");
    }
    t.detail = std::to_string(prompts) + " prompts, " + std::to_string(permutations) + " permutations";
}

// ---------------------------------------------------------------------------
// Synthetic end-to-end corpus

HierLoop hier_rect(double x0, double y0, double x1, double y1, const std::string& prefix) {
    HierLoop l;
    const Vec2 p[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    for (int i = 0; i < 4; ++i) l.segments.push_back({prefix + std::to_string(i + 1), Line{p[i], p[(i + 1) % 4]}, false});
    return l;
}

HierLoop hier_circle(const Vec2& c, double r, const std::string& id) {
    HierLoop l;
    l.segments.push_back({id, Circle{c, r}, false});
    return l;
}

void add_part(HierarchicalImport& imp, std::vector<HierFace> faces, Extrusion e, BooleanKind op,
              const Vec3& origin = Vec3::Zero()) {
    HierarchicalSketch s;
    s.plane.translation = origin;
    s.faces = std::move(faces);
    imp.sketches.push_back(std::move(s));
    imp.extrusions.push_back(e);
    imp.booleans.push_back(op);
}

LinearExtrusion along_z(double len) { return LinearExtrusion{Vec3::UnitZ(), len, false, 0.0}; }

struct Expectation {
    std::string stage = "ok";  // ok, import, validate, exec
    std::string code;
    std::optional<double> volume;
    double tolerance = 0.0;
    std::optional<std::size_t> flat_primitives;
    std::optional<std::size_t> relations;
};

struct CorpusDoc {
    std::string name;
    std::string text;
    Expectation expect;
};

std::vector<CorpusDoc> synthetic_corpus(Rng& rng) {
    std::vector<CorpusDoc> out;
    for (int i = 0; i < 50; ++i) {
        HierarchicalImport imp;
        imp.source = "synthetic";
        Expectation x;
        const double w = uniform(rng, 0.5, 4), h = uniform(rng, 0.5, 4), len = uniform(rng, 0.2, 3);
        switch (i % 10) {
        case 0: {  // plate with a round hole
            const double r = 0.25 * std::min(w, h);
            add_part(imp, {HierFace{{hier_rect(0, 0, w, h, "e"), hier_circle({w / 2, h / 2}, r, "c")}}}, along_z(len),
                     BooleanKind::NewBody);
            x.volume = (w * h - kPi * r * r) * len;
            x.tolerance = 1e-3;
            x.flat_primitives = 5;
            break;
        }
        case 1: {  // two faces sharing an edge
            const double w2 = uniform(rng, 0.5, 4);
            add_part(imp, {HierFace{{hier_rect(0, 0, w, h, "a")}}, HierFace{{hier_rect(w, 0, w + w2, h, "b")}}},
                     along_z(len), BooleanKind::NewBody);
            x.volume = (w + w2) * h * len;
            x.tolerance = 1e-9;
            x.flat_primitives = 6;
            break;
        }
        case 2: {  // full revolution of an axis-clear rectangle
            const double x0 = uniform(rng, 0.2, 2);
            add_part(imp, {HierFace{{hier_rect(x0, 0, x0 + w, h, "r")}}},
                     RotatedExtrusion{Vec3::Zero(), Vec3::UnitY(), 0.0, kTwoPi}, BooleanKind::NewBody);
            x.volume = pappus_volume(w * h, x0 + w / 2, kTwoPi);
            x.tolerance = 1e-2;
            break;
        }
        case 3: {  // block with a pocket cut through its top
            add_part(imp, {HierFace{{hier_rect(0, 0, w, h, "o")}}}, along_z(len), BooleanKind::NewBody);
            add_part(imp, {HierFace{{hier_rect(w / 4, h / 4, 3 * w / 4, 3 * h / 4, "p")}}}, along_z(len),
                     BooleanKind::Subtract, Vec3(0, 0, len / 2));
            x.volume = w * h * len - (w / 2) * (h / 2) * (len / 2);
            x.tolerance = 2e-2;
            x.relations = 2;
            break;
        }
        case 4: {  // three spaced blocks
            for (int k = 0; k < 3; ++k) {
                add_part(imp, {HierFace{{hier_rect(0, 0, w, h, "k" + std::to_string(k))}}}, along_z(len),
                         k == 0 ? BooleanKind::NewBody : BooleanKind::Join, Vec3(k * (w + 1.0), 0, 0));
            }
            x.volume = 3 * w * h * len;
            x.tolerance = 2e-2;
            x.relations = 6;
            break;
        }
        case 5: {  // star polygon, optionally with a hole
            const RandomProfile rp = random_profile(rng);
            HierFace face;
            HierLoop outer;
            const std::size_t n = rp.polygon.size();
            for (std::size_t k = 0; k < n; ++k) {
                outer.segments.push_back({"s" + std::to_string(k + 1), Line{rp.polygon[k], rp.polygon[(k + 1) % n]}, false});
            }
            face.loops.push_back(outer);
            if (rp.hole_radius > 0) face.loops.push_back(hier_circle(rp.hole_center, rp.hole_radius, "hole"));
            add_part(imp, {face}, along_z(len), BooleanKind::NewBody);
            x.volume = rp.area * len;
            x.tolerance = 1e-3;
            break;
        }
        case 6: {  // outline with a missing edge
            HierLoop l = hier_rect(0, 0, w, h, "e");
            l.segments.pop_back();
            add_part(imp, {HierFace{{l}}}, along_z(len), BooleanKind::NewBody);
            x.stage = "import";
            x.code = "OPEN_LOOP";
            break;
        }
        case 7:  // sequence starting with a cut
            add_part(imp, {HierFace{{hier_rect(0, 0, w, h, "e")}}}, along_z(len), BooleanKind::Subtract);
            x.stage = "validate";
            x.code = "FIRST_NOT_NEW_BODY";
            break;
        case 8:  // zero-length extrusion
            add_part(imp, {HierFace{{hier_rect(0, 0, w, h, "e")}}}, along_z(0.0), BooleanKind::NewBody);
            x.stage = "validate";
            x.code = "LENGTH_NONPOSITIVE";
            break;
        default:  // revolution axis through the profile
            add_part(imp, {HierFace{{hier_rect(-w / 2, 0, w / 2, h, "e")}}},
                     RotatedExtrusion{Vec3::Zero(), Vec3::UnitY(), 0.0, kTwoPi}, BooleanKind::NewBody);
            x.stage = "exec";
            x.code = "PROFILE_CROSSES_AXIS";
            break;
        }
        out.push_back({"synthetic_" + std::to_string(i) + ".hier", export_hierarchical(imp), x});
    }
    return out;
}

void end_to_end(Tally& t) {
    Rng rng(10010);
    const std::vector<CorpusDoc> corpus = synthetic_corpus(rng);
    const auto t0 = Clock::now();
    int executed = 0, expected_failures = 0;
    for (const auto& doc : corpus) {
        const Expectation& x = doc.expect;
        const auto fail = [&](const std::string& why) { t.check(false, doc.name + ": " + why); };
        Document d;
        try {
            d = flatten_import(import_hierarchical(doc.text));
        } catch (const Error& e) {
            const std::string code(error_code_name(e.code()));
            if (x.stage == "import" && x.code == code) ++expected_failures;
            else fail(std::string("unexpected import failure ") + e.what());
            continue;
        }
        if (x.stage == "import") {
            fail("import succeeded, expected " + x.code);
            continue;
        }
        if (x.flat_primitives && d.parts[0].sketch.primitives.size() != *x.flat_primitives) {
            fail("flattened to " + std::to_string(d.parts[0].sketch.primitives.size()) + " primitives");
        }
        const ValidationReport v = validate_document(d);
        if (!v.ok()) {
            const std::string code(violation_code_name(v.violations[0].code));
            if (x.stage == "validate" && x.code == code) ++expected_failures;
            else fail("unexpected violation " + code);
            continue;
        }
        if (x.stage == "validate") {
            fail("validation passed, expected " + x.code);
            continue;
        }
        const DocumentAnalysis analysis = analyze_document(d);
        const ExecResult r = execute_document(d);
        const Nlt nlt = build_nlt(d, analyze_document(canonicalize(d)));
        std::size_t prims = 0;
        for (const auto& p : d.parts) prims += p.sketch.primitives.size();
        if (nlt.count(SentenceKind::Primitive) != prims) fail("transcription misses primitives");
        if (x.stage == "exec") {
            if (!r.status.ok && r.status.code == x.code) ++expected_failures;
            else fail("execution gave '" + r.status.code + "', expected " + x.code);
            if (analysis.parts[0].error.rfind(x.code, 0) != 0) fail("analysis did not report " + x.code);
            continue;
        }
        if (!r.status.ok) {
            fail("execution failed: " + r.status.code + " " + r.status.message);
            continue;
        }
        ++executed;
        if (!analysis.ok()) fail("analysis reported a part error");
        if (x.relations && analysis.relations.entries.size() != *x.relations) fail("relation table size differs");
        if (!r.mesh.is_watertight()) fail("mesh not watertight");
        if (x.volume && rel_error(r.volume, *x.volume) > x.tolerance) {
            fail("volume " + num(r.volume) + " vs " + num(*x.volume));
        }
    }
    const double elapsed = seconds_since(t0);
    t.check(elapsed < 60.0, "corpus took " + num(elapsed) + " s");
    t.detail = std::to_string(corpus.size()) + " documents, " + std::to_string(executed) + " executed, " +
               std::to_string(expected_failures) + " expected failures";
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Tally&)> run;
        double budget_s;  // 0 when the criterion has no time limit
    };
    const Criterion criteria[] = {
        {"flatten parity", flatten_parity, 10.0},
        {"loop extraction", loop_fidelity, 0.0},
        {"spatial relations", relation_fidelity, 30.0},
        {"constraint semantics", constraint_semantics, 0.0},
        {"solver editability", solver_editability, 0.0},
        {"geometry execution", geometry_execution, 0.0},
        {"metrics", metrics, 0.0},
        {"format stability", format_stability, 0.0},
        {"nlt and prompts", nlt_fidelity, 0.0},
        {"end to end", end_to_end, 60.0},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Tally t;
        const auto t0 = Clock::now();
        try {
            c.run(t);
        } catch (const std::exception& e) {
            t.check(false, std::string("uncaught: ") + e.what());
        }
        const double s = seconds_since(t0);
        if (c.budget_s > 0 && s >= c.budget_s) t.check(false, "over the " + num(c.budget_s) + " s budget");
        failed += !t.ok();
        std::printf("%s %2d %-22s %7.2fs  %s\n", t.ok() ? "PASS" : "FAIL", index, c.name, s, t.detail.c_str());
        for (const auto& n : t.notes) std::printf("        %s\n", n.c_str());
        if (t.failures > static_cast<int>(t.notes.size())) {
            std::printf("        ... %d more\n", t.failures - static_cast<int>(t.notes.size()));
        }
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
