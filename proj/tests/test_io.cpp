#include "catch_amalgamated.hpp"
#include "almostflat/io.hpp"
#include "oracles.hpp"

#include <filesystem>

using namespace af;
using io::json;

namespace {

// the message of the schema error thrown by f
std::string schema_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Schema);
        return e.what();
    }
    FAIL("no error thrown");
    return {};
}

// serialize to text and back, as a file would
json through_text(const json& j) { return io::parse(j.dump(), "text"); }

}  // namespace

TEST_CASE("matrices are rows of [re, im] pairs", "[io]") {
    Mat m(2, 2);
    m << cd(1, 0), cd(0, 2), cd(-3, 0.5), cd(0, 0);
    json j = io::to_json(m);
    CHECK(j == json::parse("[[[1.0,0.0],[0.0,2.0]],[[-3.0,0.5],[0.0,0.0]]]"));
    CHECK(oracle::op_norm(io::matrix_from_json(j, "m") - m) == 0);
    CHECK_THAT(schema_message([] { io::matrix_from_json(json::parse("[[[1,0]],[[1,0],[0,0]]]"), "m"); }),
               Catch::Matchers::ContainsSubstring("ragged"));
    CHECK_THAT(schema_message([] { io::matrix_from_json(json::parse("[[1]]"), "m"); }),
               Catch::Matchers::ContainsSubstring("[re, im]"));
    CHECK_THAT(schema_message([] { io::unitary_from_json(json::parse("[[[2,0]]]"), 1, "m"); }),
               Catch::Matchers::ContainsSubstring("not unitary"));
    CHECK_THAT(schema_message([] { io::unitary_from_json(json::parse("[[[1,0]]]"), 2, "m"); }),
               Catch::Matchers::ContainsSubstring("2x2"));
}

TEST_CASE("complex documents round trip", "[io]") {
    for (const auto& name : complex_families()) {
        INFO(name);
        auto K = complex_family(name);
        json doc = through_text(io::document("complex", io::complex_payload(*K)));
        auto L = io::complex_ref(doc, "doc");
        CHECK(L->simplices == K->simplices);
        CHECK(L->y_vertices == K->y_vertices);
        CHECK(L->basepoint == K->basepoint);
    }
}

TEST_CASE("cocycle documents round trip", "[io][property]") {
    std::mt19937_64 rng(71);
    for (const char* name : {"circle", "torus7", "disk_pair", "doubled_disk"}) {
        for (bool on_y : {false, true}) {
            auto K = complex_family(name);
            auto c = on_y ? y_cover(K) : star_cover(K);
            Cocycle v = random_eps_flat(c, 2, 1e-2, rng);
            Cocycle w = io::cocycle_from_doc(through_text(io::cocycle_doc(v, on_y)), "doc");
            CHECK(w.cover->admissible == c->admissible);
            CHECK(distance(w, v) < 1e-15);
        }
    }
}

TEST_CASE("relative documents round trip", "[io][property]") {
    std::mt19937_64 rng(72);
    for (const char* name : {"circle", "torus7", "disk_pair"}) {
        PairContext c = make_context(complex_family(name));
        for (int m = 0; m <= 1; ++m) {
            RelativeBundle f = random_relative(c, 2, m, 1e-3, rng);
            io::LoadedBundle b = io::bundle_from_doc(through_text(io::bundle_doc(f)), "doc");
            CHECK(distance(b.f, f) < 1e-15);
            CHECK(b.f.m() == m);

            RelativeQuasiRep p = random_relative_rep(c, 2, m, 1e-3, rng);
            io::LoadedRep r = io::relative_rep_from_doc(through_text(io::relative_rep_doc(p, c)), "doc");
            CHECK(distance(r.p, p) < 1e-15);
        }
    }
}

TEST_CASE("covering and connection documents round trip", "[io]") {
    std::mt19937_64 rng(73);
    FiniteCovering cov = cover2_torus7();
    FiniteCovering back = io::covering_from_doc(through_text(io::covering_doc(cov)), "doc");
    CHECK(back.proj == cov.proj);
    CHECK(back.lifts == cov.lifts);

    DiscreteConnection g = random_connection(torus7(), 2, 1e-2, rng);
    DiscreteConnection h = io::connection_from_doc(through_text(io::connection_doc(g)), "doc");
    REQUIRE(h.g.size() == g.g.size());
    for (const auto& [e, m] : g.g) CHECK(oracle::op_norm(h.g.at(e) - m) < 1e-15);
}

TEST_CASE("complex given by a path", "[io]") {
    auto dir = std::filesystem::temp_directory_path() / "almostflat_io_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "k.json");
        out << io::document("complex", io::complex_payload(*disk_pair())).dump();
    }
    json doc = io::cocycle_doc(identity_cocycle(star_cover(disk_pair()), 1));
    doc["payload"]["complex"] = "k.json";
    Cocycle v = io::cocycle_from_doc(doc, "doc", dir.string());
    CHECK(v.cover->K->n_vertices == 7);
    doc["payload"]["complex"] = "missing.json";
    CHECK_THAT(schema_message([&] { io::cocycle_from_doc(doc, "doc", dir.string()); }),
               Catch::Matchers::ContainsSubstring("cannot open"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("schema errors name the offending path", "[io]") {
    std::mt19937_64 rng(74);
    auto c = star_cover(filled_triangle());
    json doc = io::cocycle_doc(random_eps_flat(c, 1, 1e-2, rng));
    json bad = doc;
    bad["payload"]["records"][2]["matrix"] = json::parse("[[[0.5,0]]]");
    CHECK_THAT(schema_message([&] { io::cocycle_from_doc(bad, "in"); }),
               Catch::Matchers::ContainsSubstring("in.records[2].matrix"));
    bad = doc;
    bad["payload"]["records"][0]["sample"] = {2};
    CHECK_THAT(schema_message([&] { io::cocycle_from_doc(bad, "in"); }),
               Catch::Matchers::ContainsSubstring("in.records[0].sample"));
    bad = doc;
    bad["payload"].erase("fiber_dim");
    CHECK_THAT(schema_message([&] { io::cocycle_from_doc(bad, "in"); }),
               Catch::Matchers::ContainsSubstring("fiber_dim"));
    bad = doc;
    bad["kind"] = "complex";
    CHECK_THAT(schema_message([&] { io::cocycle_from_doc(bad, "in"); }),
               Catch::Matchers::ContainsSubstring("in.kind"));
    bad = doc;
    bad["version"] = 7;
    CHECK_THAT(schema_message([&] { io::cocycle_from_doc(bad, "in"); }),
               Catch::Matchers::ContainsSubstring("in.version"));
    bad = doc;
    bad["payload"]["cover"] = "z";
    CHECK_THAT(schema_message([&] { io::cocycle_from_doc(bad, "in"); }),
               Catch::Matchers::ContainsSubstring("in.cover"));
    CHECK_THAT(schema_message([] { io::parse("{not json", "file.json"); }),
               Catch::Matchers::ContainsSubstring("file.json"));
}

TEST_CASE("digest is 64 bit FNV-1a", "[io]") {
    CHECK(io::digest("") == "cbf29ce484222325");
    CHECK(io::digest("a") == "af63dc4c8601ec8c");
    CHECK(io::digest("foobar") == "85944171f73967e8");
    CHECK(io::digest("x") != io::digest("y"));
}
