#include "helpers.hpp"
#include "support/generators.hpp"

#include "histcad/error.hpp"
#include "histcad/format.hpp"
#include "histcad/numfmt.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstring>

using namespace histcad;
using namespace histcad::testing;

namespace {

const char* kFixtures[] = {"square_extrude.hcad",   "square_hole.hcad",         "triple_nesting.hcad",
                           "plate_minus_cylinder.hcad", "revolved_ring.hcad",   "slot_plate.hcad",
                           "stacked_assembly.hcad", "bracket.hcad",             "invalid_first_subtract.hcad",
                           "invalid_bad_radius.hcad"};

}  // namespace

TEST_SUITE("format") {

TEST_CASE("canonical square document parses") {
    const Document d = load_fixture("square_extrude.hcad");
    CHECK(d.parts.size() == 1);
    CHECK(d.parts[0].sketch.primitives.size() == 4);
}

TEST_CASE("trailing comma is a located syntax error") {
    const std::string text = "{\n  \"format_version\": 1,\n  \"parts\": [],\n}\n";
    try {
        parse_document(text);
        FAIL("expected a syntax error");
    } catch (const ParseError& e) {
        CHECK(e.code() == ErrorCode::SyntaxError);
        CHECK(e.line() == 4);
        CHECK(e.column() >= 1);
    }
}

TEST_CASE("duplicate primitive ids are rejected") {
    Document d = load_fixture("square_extrude.hcad");
    d.parts[0].sketch.primitives[1].id = d.parts[0].sketch.primitives[0].id;
    const std::string text = serialize_document(d);
    try {
        parse_document(text);
        FAIL("expected DUPLICATE_ID");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateId);
    }
}

TEST_CASE("schema errors report the field path") {
    std::string text = serialize_document(load_fixture("square_extrude.hcad"));
    const auto pos = text.find("\"length\": 2");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::strlen("\"length\": 2"), "\"length\": \"two\"");
    try {
        parse_document(text);
        FAIL("expected a schema error");
    } catch (const ParseError& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
        CHECK(e.path().find("extrusion") != std::string::npos);
    }
}

TEST_CASE("unknown fields: strict rejects, lenient warns") {
    std::string text = serialize_document(load_fixture("square_extrude.hcad"));
    text.insert(text.find('{') + 1, "\n  \"colour\": \"red\",");
    CHECK_THROWS_AS(parse_document(text, ParseOptions{true}), ParseError);
    std::vector<std::string> warnings;
    const Document d = parse_document(text, ParseOptions{false}, &warnings);
    CHECK(d.parts.size() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("colour") != std::string::npos);
}

TEST_CASE("radius 0.1 survives a round trip bit for bit") {
    Document d = single_part(box_part(Vec3::Zero(), Vec3(1, 1, 1)));
    d.parts[0].sketch.primitives.push_back({"C1", Circle{{0.5, 0.5}, 0.1}});
    const Document back = parse_document(serialize_document(d));
    const Primitive* c = back.parts[0].sketch.find("C1");
    REQUIRE(c);
    const double r = std::get<Circle>(c->curve).radius;
    CHECK(std::memcmp(&r, &std::get<Circle>(d.parts[0].sketch.primitives.back().curve).radius, sizeof r) == 0);
}

TEST_CASE("primitive order does not change the canonical text") {
    Rng rng(3);
    for (const char* name : kFixtures) {
        const Document d = load_fixture(name);
        const std::string base = serialize_document(d);
        for (int trial = 0; trial < 5; ++trial) {
            Document p = d;
            for (auto& part : p.parts) {
                std::shuffle(part.sketch.primitives.begin(), part.sketch.primitives.end(), rng);
                std::shuffle(part.sketch.constraints.begin(), part.sketch.constraints.end(), rng);
            }
            CHECK(serialize_document(p) == base);
        }
    }
}

TEST_CASE("round trip equals canonicalize on fixtures and random documents") {
    for (const char* name : kFixtures) {
        const Document d = load_fixture(name);
        CHECK(parse_document(serialize_document(d)) == canonicalize(d));
    }
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const Document d = random_document(rng);
        const Document c = canonicalize(d);
        CHECK(parse_document(serialize_document(d)) == c);
        CHECK(canonicalize(c) == c);
    }
}

TEST_CASE("shortest round-trip number text") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1e-300) == "1e-300");
    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(uniform(rng, -1, 1), uniform_int(rng, -300, 300));
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    }
    CHECK(format_significant(3.14159265, 3) == "3.14");
    CHECK(quantize(0.26, 0.1) == doctest::Approx(0.3));
}

TEST_CASE("export quantization only touches the text") {
    Document d = single_part(box_part(Vec3::Zero(), Vec3(1, 1, 1)));
    d.parts[0].sketch.primitives.push_back({"C1", Circle{{0.5, 0.5}, 0.123456}});
    const Document q = parse_document(serialize_document(d, SerializeOptions{1.0 / 255.0}));
    const double r = std::get<Circle>(q.parts[0].sketch.find("C1")->curve).radius;
    CHECK(r == doctest::Approx(31.0 / 255.0));
    CHECK(std::get<Circle>(d.parts[0].sketch.primitives.back().curve).radius == 0.123456);
    CHECK(default_quantize_step(d) == doctest::Approx(1.0 / 255.0));
}

TEST_CASE("hierarchical import") {
    SUBCASE("outer square with circular hole") {
        const auto h = import_hierarchical(read_text(fixture_path("face_with_hole.hier")));
        REQUIRE(h.sketches.size() == 1);
        REQUIRE(h.sketches[0].faces.size() == 1);
        CHECK(h.sketches[0].faces[0].loops.size() == 2);
        CHECK(h.sketches[0].faces[0].loops[0].segments.size() == 4);
    }
    SUBCASE("open loop") {
        try {
            import_hierarchical(read_text(fixture_path("open_loop.hier")));
            FAIL("expected OPEN_LOOP");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::OpenLoop);
        }
    }
    SUBCASE("unsupported curve kind") {
        std::string text = read_text(fixture_path("face_with_hole.hier"));
        const auto pos = text.find("\"circle\"");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 8, "\"spline\"");
        try {
            import_hierarchical(text);
            FAIL("expected UNSUPPORTED_CURVE");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnsupportedCurve);
        }
    }
    SUBCASE("export and import round trip") {
        const auto h = import_hierarchical(read_text(fixture_path("shared_edge.hier")));
        const auto back = import_hierarchical(export_hierarchical(h));
        REQUIRE(back.sketches.size() == h.sketches.size());
        CHECK(back.sketches[0].faces.size() == h.sketches[0].faces.size());
        CHECK(export_hierarchical(back) == export_hierarchical(h));
    }
}

}
