#include "catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace af;

namespace {

// Euler characteristic counted from the maximal simplices by inclusion-exclusion over all faces
int euler_from_faces(const Complex& K) {
    std::set<Simplex> faces;
    for (const auto& s : K.maximal())
        for (unsigned mask = 1; mask < (1u << s.size()); ++mask) {
            Simplex f;
            for (size_t i = 0; i < s.size(); ++i)
                if (mask & (1u << i)) f.push_back(s[i]);
            faces.insert(f);
        }
    int e = 0;
    for (const auto& f : faces) e += f.size() % 2 ? 1 : -1;
    return e;
}

Word random_word(std::mt19937_64& rng, int ngen, int len) {
    std::uniform_int_distribution<int> g(1, ngen), sgn(0, 1), l(0, len);
    Word w(l(rng));
    for (int& x : w) x = sgn(rng) ? g(rng) : -g(rng);
    return w;
}

}  // namespace

TEST_CASE("corpus complexes have the expected topology", "[simplicial]") {
    struct Row {
        const char* name;
        int euler, euler_y, dim;
    };
    for (Row r : {Row{"circle", 0, 1, 1}, Row{"filled_triangle", 1, 1, 2}, Row{"torus7", 0, 1, 2},
                  Row{"disk_pair", 1, 0, 2}, Row{"doubled_disk", 2, 0, 3}, Row{"annulus_one_boundary", 0, 0, 2},
                  Row{"cone_square", 1, 1, 2}}) {
        INFO(r.name);
        auto K = complex_family(r.name);
        CHECK(K->euler() == r.euler);
        CHECK(K->euler() == euler_from_faces(*K));
        CHECK(K->euler_y() == r.euler_y);
        CHECK(K->dim() == r.dim);
    }
}

TEST_CASE("every pair of torus7 vertices spans an edge", "[simplicial]") {
    auto K = torus7();
    for (int a = 0; a < 7; ++a)
        for (int b = a + 1; b < 7; ++b) CHECK(K->contains({a, b}));
    CHECK(K->maximal().size() == 14);
}

TEST_CASE("complex construction rejects bad input", "[simplicial]") {
    auto kind = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Schema;
    };
    CHECK(kind([] { make_complex(4, {{0, 1}, {2, 3}}, {0}, 0); }) == ErrorKind::NotConnected);
    CHECK(kind([] { make_complex(3, {{0, 1}, {1, 2}}, {0, 2}, 0); }) == ErrorKind::NotConnected);
    CHECK(kind([] { make_complex(3, {{0, 1, 2}}, {0}, 2); }) == ErrorKind::BasepointNotInSubcomplex);
    CHECK(kind([] { make_complex(3, {{0, 0}}, {0}, 0); }) == ErrorKind::InvalidArgument);
    CHECK(kind([] { make_complex(3, {{0, 1}}, {0}, 0); }) == ErrorKind::InvalidArgument);
    CHECK(kind([] { make_complex(2, {{0, 5}}, {0}, 0); }) == ErrorKind::InvalidArgument);
    CHECK(kind([] { complex_family("klein"); }) == ErrorKind::UnknownFamily);
}

TEST_CASE("star cover samples", "[simplicial]") {
    auto K = filled_triangle();
    auto c = star_cover(K);
    CHECK(c->n_index() == 3);
    CHECK(c->n_edges() == 3);
    CHECK(c->triangles.size() == 1);
    // the edge {0,1} is sampled on the edge itself and on the triangle
    int e = c->edge_id(0, 1);
    CHECK(c->edge_samples[e] == std::vector<int>{K->id({0, 1}), K->id({0, 1, 2})});
    CHECK(c->edge_id(1, 0) == e);
    CHECK(c->sample_pos(e, K->id({0})) == -1);

    auto d = disk_pair();
    auto y = y_cover(d);
    CHECK(y->n_index() == 6);
    CHECK(y->n_edges() == 6);
    CHECK(y->triangles.empty());
    for (int sid = 0; sid < d->size(); ++sid)
        if (y->admissible[sid]) CHECK(d->in_y((*d)[sid]));
}

TEST_CASE("spanning tree explores Y first", "[simplicial][property]") {
    for (const auto& name : complex_families()) {
        INFO(name);
        PairContext c = make_context(complex_family(name));
        const NerveTree& t = c.xtree;
        CHECK(t.order.size() == static_cast<size_t>(c.X->n_index()));
        int tree_edges = 0;
        for (char x : t.tree_edge) tree_edges += x;
        CHECK(tree_edges == c.X->n_index() - 1);
        CHECK(c.xgens.size() == c.X->n_edges() - tree_edges);
        for (int v : c.K->y_vertices)
            for (int p : t.path[v]) CHECK(c.K->in_y_vertex[p]);
        // Y generators are X generators
        for (size_t l = 0; l < c.lambda_to_gamma.size(); ++l)
            CHECK(c.xgens.edge_of[c.lambda_to_gamma[l]] == c.X->edge_id(c.Y->edges[c.ygens.edge_of[l]].first,
                                                                      c.Y->edges[c.ygens.edge_of[l]].second));
    }
}

TEST_CASE("basepoint outside the cover is rejected", "[simplicial]") {
    auto K = disk_pair();
    CHECK_THROWS_AS(build_tree(y_cover(K), 6), Error);
}

TEST_CASE("word reduction agrees with the stack oracle", "[simplicial][property]") {
    std::mt19937_64 rng(11);
    for (int s = 0; s < 500; ++s) {
        Word w = random_word(rng, 3, 12);
        Word r = reduce_word(w);
        CHECK(r == oracle::free_reduce(w));
        // the reduced word has no cancelling pair and w w^-1 reduces to nothing
        for (size_t i = 1; i < r.size(); ++i) CHECK(r[i] != -r[i - 1]);
        Word ww = w;
        Word inv = inverse_word(w);
        ww.insert(ww.end(), inv.begin(), inv.end());
        CHECK(reduce_word(ww).empty());
    }
}

TEST_CASE("loop fillings by triangle elimination", "[simplicial]") {
    auto fill = [](const char* name) { return fill_loops(make_context(complex_family(name)).xtree); };
    CHECK_FALSE(fill("circle").all_fillable());
    CHECK(fill("filled_triangle").all_fillable());
    CHECK(fill("disk_pair").all_fillable());
    CHECK(fill("doubled_disk").all_fillable());
    CHECK(fill("cone_square").all_fillable());
    CHECK_FALSE(fill("torus7").all_fillable());
    CHECK_FALSE(fill("annulus_one_boundary").all_fillable());

    PairContext c = make_context(filled_triangle());
    auto [a, b] = c.X->edges[c.xgens.edge_of[0]];
    auto steps = loop_fill(c.xtree, a, b);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].triangle == std::array<int, 3>{0, 1, 2});
    CHECK_NOTHROW(require_simply_connected(c.xtree));

    PairContext o = make_context(circle());
    auto [p, q] = o.X->edges[o.xgens.edge_of[0]];
    CHECK_THROWS_AS(loop_fill(o.xtree, p, q), Error);
    CHECK_THROWS_AS(require_simply_connected(o.xtree), Error);
}

TEST_CASE("torus7 generator coordinates kill every relator", "[simplicial][property]") {
    PairContext c = make_context(torus7());
    auto coords = group_coords(c.xtree, c.xgens);
    REQUIRE(coords.size() == static_cast<size_t>(c.xgens.size()));
    for (const auto& tri : c.X->triangles) {
        long x = 0, y = 0;
        for (int l : triangle_word(c.xtree, c.xgens, tri)) {
            const auto& v = coords[std::abs(l) - 1];
            x += l > 0 ? v[0] : -v[0];
            y += l > 0 ? v[1] : -v[1];
        }
        CHECK(x == 0);
        CHECK(y == 0);
    }
    // the coordinates generate Z^2
    bool unimodular = false;
    for (size_t i = 0; i < coords.size(); ++i)
        for (size_t j = i + 1; j < coords.size(); ++j)
            unimodular |= std::abs(coords[i][0] * coords[j][1] - coords[i][1] * coords[j][0]) == 1;
    CHECK(unimodular);
}

TEST_CASE("group coordinates for the corpus", "[simplicial]") {
    CHECK(group_coords(make_context(circle()).xtree, make_context(circle()).xgens) ==
          std::vector<std::vector<long>>{{1}});
    PairContext d = make_context(disk_pair());
    for (const auto& v : group_coords(d.xtree, d.xgens)) CHECK(v.empty());
    PairContext a = make_context(annulus_one_boundary());
    CHECK_THROWS_AS(group_coords(a.xtree, a.xgens), Error);
}
