#include "catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace af;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::Schema;
}

}  // namespace

TEST_CASE("pullback along the identity and a collapse", "[constructions]") {
    std::mt19937_64 rng(61);
    auto c = star_cover(torus7());
    Cocycle v = random_eps_flat(c, 2, 1e-2, rng);
    std::vector<int> id(7);
    std::iota(id.begin(), id.end(), 0);
    CHECK(distance(pullback(c, id, v), v) == 0);

    // the hexagon folds onto the triangle
    FiniteCovering cov = cover2_circle();
    auto tc = star_cover(cov.total);
    Cocycle w = random_eps_flat(star_cover(cov.base), 2, 1e-2, rng);
    Cocycle pw = pullback(tc, cov.proj, w);
    CHECK(flatness(pw) <= flatness(w) + 1e-12);
    CHECK(cocycle_residual(pw) < 1e-12);
    CHECK(oracle::op_norm(pw.at(0, 1, cov.total->id({0, 1})) - w.at(0, 1, cov.base->id({0, 1}))) == 0);

    CHECK(kind_of([&] { pullback(c, {0, 1}, v); }) == ErrorKind::NotSimplicial);
    CHECK(kind_of([&] { pullback(tc, {0, 1, 2, 0, 1, 9}, w); }) == ErrorKind::NotSimplicial);
    auto ft = star_cover(filled_triangle());
    Cocycle u = identity_cocycle(star_cover(circle()), 1);
    CHECK(kind_of([&] { pullback(ft, {0, 1, 2}, u); }) == ErrorKind::NotSimplicial);
}

TEST_CASE("double of a pair", "[constructions]") {
    for (const char* name : {"circle", "filled_triangle", "torus7", "disk_pair"}) {
        INFO(name);
        auto K = complex_family(name);
        DoubleComplex d = build_double(K);
        CHECK(d.K->n_vertices == 2 * K->n_vertices);
        // two copies glued along a thickened copy of Y
        CHECK(d.K->euler() == 2 * K->euler() - K->euler_y());
        CHECK(d.K->y_vertices == K->y_vertices);
        for (int v = 0; v < K->n_vertices; ++v) {
            CHECK(d.orig[d.vid(v, 2)] == v);
            CHECK(d.side[d.vid(v, 2)] == 2);
        }
        for (const auto& s : K->simplices) {
            CHECK(d.K->contains(d.lift(s, 1)));
            CHECK(d.K->contains(d.lift(s, 2)));
            CHECK(d.fold(d.lift(s, 2)) == s);
        }
    }
    CHECK(build_double(disk_pair()).K->euler() == 2);
    CHECK(kind_of([] { build_double(make_complex(2, {{0, 1}}, {0, 1}, 0)); }) == ErrorKind::NoBoundary);
}

TEST_CASE("unfold and fold", "[constructions][property]") {
    std::mt19937_64 rng(62);
    for (const char* name : {"circle", "filled_triangle", "torus7", "disk_pair"}) {
        PairContext c = make_context(complex_family(name));
        DoubleComplex d = build_double(c.K);
        double I = c.X->n_index();
        for (int s = 0; s < 6; ++s) {
            INFO(name << " seed=" << s);
            RelativeBundle f = random_relative(c, 1 + s % 3, 0, 1e-3, rng);
            double eps = measure(f, c).overall;
            Cocycle vh = unfold_to_double(f, d, c);
            CHECK(cocycle_residual(vh) < 1e-9);
            CHECK(flatness(vh) <= (I * I + 2) * eps + 1e-12);
            RelativeBundle g = fold_to_relative(vh, d, c);
            CHECK(distance(g.v1, f.v1) == 0);
            CHECK(distance(g.v2, f.v2) == 0);
            // the folded intertwiner is the gauge corrected one at each centre
            for (int mu : c.Y->index) CHECK(oracle::op_norm(g.u.u[mu] - f.u.u[mu]) < 1e-12);
            CHECK(measure(g, c).overall <= (I * I + 1) * eps + 1e-12);
        }
    }
    PairContext c = make_context(disk_pair());
    DoubleComplex d = build_double(c.K);
    CHECK(kind_of([&] { unfold_to_double(identity_bundle(c, 1, 1), d, c); }) == ErrorKind::StabilizedRep);
}

TEST_CASE("amalgam of a relative representation", "[constructions][property]") {
    std::mt19937_64 rng(63);
    for (const char* name : {"circle", "torus7", "disk_pair"}) {
        PairContext c = make_context(complex_family(name));
        auto ox = abelian_oracle(group_coords(c.xtree, c.xgens));
        const int ng = c.xgens.size();
        WordOracle o = amalgam_oracle(ox, ng, c.lambda_to_gamma);
        for (int s = 0; s < 10; ++s) {
            RelativeQuasiRep p = normalize_relative_rep(random_relative_rep(c, 2, 0, 1e-3, rng));
            double ep = std::max({rep_defect(p.pi1, ox), rep_defect(p.pi2, ox),
                                  intertwiner_defect(restrict_to_lambda(p.pi1, c), restrict_to_lambda(p.pi2, c),
                                                     identity(2))});
            QuasiRep am = amalgam_rep(p.pi1, p.pi2);
            REQUIRE(am.gen.size() == static_cast<size_t>(2 * ng));
            CHECK(rep_defect(am, o) <= 2 * ep + 1e-12);
        }
        // a pair of honest representations agreeing on the shared subgroup
        QuasiRep rho = oracle::commuting_rep(group_coords(c.xtree, c.xgens), 2, rng);
        CHECK(rep_defect(amalgam_rep(rho, rho), o) < 1e-10);
    }
    std::mt19937_64 r2(64);
    QuasiRep a{2, {random_unitary(2, r2)}}, b{3, {random_unitary(3, r2)}};
    CHECK(kind_of([&] { amalgam_rep(a, b); }) == ErrorKind::DimMismatch);
}

TEST_CASE("amalgam normal forms", "[constructions]") {
    // one generator, shared: products across copies go through the first factor
    WordOracle z = abelian_oracle({{1}});
    WordOracle o = amalgam_oracle(z, 1, {0});
    CHECK(o.at(0, 1) == z.at(0, 0));
    CHECK(o.at(1, 1) == Word{2, 2});
    // nothing shared: the alternating word is already reduced
    WordOracle f = amalgam_oracle(z, 1, {});
    CHECK(f.at(0, 1) == Word{1, 2});
    CHECK(f.at(1, 0) == Word{2, 1});
}

TEST_CASE("covering validation", "[constructions]") {
    auto hex = cover2_circle().total;
    CHECK(kind_of([&] { make_covering(hex, circle(), {0, 1, 2}); }) == ErrorKind::BadCovering);
    CHECK(kind_of([&] { make_covering(hex, circle(), {0, 1, 2, 0, 1, 5}); }) == ErrorKind::BadCovering);
    CHECK(kind_of([&] { make_covering(hex, circle(), {0, 1, 2, 0, 1, 1}); }) == ErrorKind::BadCovering);
    // a rotation of the triangle is a one sheeted covering; the filled triangle does not lift
    auto tri = circle();
    CHECK_NOTHROW(make_covering(tri, circle(), {1, 2, 0}));
    CHECK(kind_of([&] { make_covering(tri, filled_triangle(), {0, 1, 2}); }) == ErrorKind::BadCovering);
    FiniteCovering t = cover2_torus7();
    CHECK(t.sheets == 2);
    CHECK(t.total->euler() == 0);
}

TEST_CASE("pushforward preserves flatness", "[constructions][property]") {
    std::mt19937_64 rng(65);
    for (const FiniteCovering& cov : {cover2_circle(), cover2_torus7()}) {
        auto bc = star_cover(cov.base);
        for (int n = 1; n <= 3; ++n)
            for (double eps : {1e-1, 1e-3}) {
                Cocycle v = random_eps_flat(star_cover(cov.total), n, eps, rng);
                Cocycle pv = covering_pushforward(cov, v, bc);
                CHECK(pv.dim == n * cov.sheets);
                CHECK(cocycle_residual(pv) < 1e-10);
                CHECK(unitarity_defect(pv) < 1e-12);
                CHECK(flatness(pv) == Catch::Approx(flatness(v)).margin(1e-12));
            }
        Cocycle wrong = identity_cocycle(bc, 1);
        CHECK(kind_of([&] { covering_pushforward(cov, wrong, bc); }) == ErrorKind::BadCovering);
    }
}

TEST_CASE("pushforward monodromy is induced", "[constructions][property]") {
    std::mt19937_64 rng(66);
    FiniteCovering cov = cover2_circle();
    PairContext tc = make_context(cov.total), bc = make_context(cov.base);
    for (int n = 1; n <= 3; ++n)
        for (int s = 0; s < 5; ++s) {
            Mat h = random_unitary(n, rng);
            auto [a, b] = tc.X->edges[tc.xgens.edge_of[0]];
            Cocycle v = make_cocycle(tc.X, n, [&](int x, int y, int) { return (x == a && y == b) ? h : identity(n); });
            Cocycle pv = covering_pushforward(cov, v, bc.X);
            Mat H = alpha(unitary_act(normalize_tree(pv, bc.xtree), pv), bc.xtree, bc.xgens).gen[0];
            CHECK(oracle::spectrum_distance(oracle::spectrum(H), oracle::induced_spectrum(h)) < 1e-9);
        }
}

TEST_CASE("connections and their Cech cocycles", "[constructions][property]") {
    std::mt19937_64 rng(67);
    for (const char* name : {"circle", "filled_triangle", "torus7", "disk_pair"}) {
        auto K = complex_family(name);
        auto c = star_cover(K);
        CHECK(curvature_defect(identity_connection(K, 2)) == 0);
        CHECK(flatness(holonomy_to_cech(identity_connection(K, 2), c)) == 0);
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            INFO(name << " eps=" << eps);
            DiscreteConnection g = random_connection(K, 2, eps, rng);
            Cocycle v = holonomy_to_cech(g, c);
            CHECK(cocycle_residual(v) < 1e-12);
            CHECK(flatness(v) <= bigon_constant(*K) * curvature_defect(g) + 1e-12);
            // on an edge sample the Cech value is the transport itself
            for (int e = 0; e < c->n_edges(); ++e) {
                auto [a, b] = c->edges[e];
                CHECK(oracle::op_norm(v.at(a, b, K->id({a, b})) - g.transport(b, a)) < 1e-12);
            }
        }
    }
    CHECK(bigon_constant(*circle()) == 0);
    CHECK(bigon_constant(*torus7()) == 2);
    auto K = torus7();
    CHECK(kind_of([&] { holonomy_to_cech(identity_connection(K, 1), star_cover(torus7())); }) ==
          ErrorKind::ComplexMismatch);
    CHECK(kind_of([&] { identity_connection(K, 1).transport(0, 100); }) == ErrorKind::InvalidArgument);
}
