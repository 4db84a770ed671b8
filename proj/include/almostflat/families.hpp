#pragma once

#include "almostflat/constructions.hpp"

namespace af {

// ---- complexes ----

inline std::shared_ptr<const Complex> circle() {
    return make_complex(3, {{0, 1}, {1, 2}, {0, 2}}, {0}, 0);
}

inline std::shared_ptr<const Complex> filled_triangle() {
    return make_complex(3, {{0, 1, 2}}, {0}, 0);
}

// the 7-vertex torus; every pair of vertices spans an edge
inline std::shared_ptr<const Complex> torus7() {
    std::vector<Simplex> t;
    for (int i = 0; i < 7; ++i) {
        t.push_back({i, (i + 1) % 7, (i + 3) % 7});
        t.push_back({i, (i + 2) % 7, (i + 3) % 7});
    }
    return make_complex(7, t, {0}, 0);
}

// cone over a hexagon with Y the hexagon
inline std::shared_ptr<const Complex> disk_pair() {
    std::vector<Simplex> t;
    for (int i = 0; i < 6; ++i) t.push_back({i, (i + 1) % 6, 6});
    return make_complex(7, t, {0, 1, 2, 3, 4, 5}, 0);
}

inline std::shared_ptr<const Complex> cone_square() {
    std::vector<Simplex> t;
    for (int i = 0; i < 4; ++i) t.push_back({i, (i + 1) % 4, 4});
    return make_complex(5, t, {0}, 0);
}

// inner circle 0,1,2 and outer circle 3,4,5; Y is the outer circle
inline std::shared_ptr<const Complex> annulus_one_boundary() {
    std::vector<Simplex> t;
    for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3;
        t.push_back({i, j, 3 + i});
        t.push_back({j, 3 + i, 3 + j});
    }
    return make_complex(6, t, {3, 4, 5}, 3);
}

inline std::shared_ptr<const Complex> doubled_disk() { return build_double(disk_pair()).K; }

// hexagon over the triangle, vertex i over i mod 3
inline FiniteCovering cover2_circle() {
    std::vector<Simplex> e;
    for (int i = 0; i < 6; ++i) e.push_back({i, (i + 1) % 6});
    auto total = make_complex(6, e, {0}, 0);
    return make_covering(total, circle(), {0, 1, 2, 0, 1, 2});
}

// the 14-vertex torus over torus7, vertex i over i mod 7
inline FiniteCovering cover2_torus7() {
    std::vector<Simplex> t;
    for (int i = 0; i < 14; ++i) {
        t.push_back({i, (i + 1) % 14, (i + 3) % 14});
        t.push_back({i, (i + 2) % 14, (i + 3) % 14});
    }
    std::vector<int> proj(14);
    for (int i = 0; i < 14; ++i) proj[i] = i % 7;
    return make_covering(make_complex(14, t, {0}, 0), torus7(), proj);
}

inline const std::vector<std::string>& complex_families() {
    static const std::vector<std::string> names{"circle",   "filled_triangle",      "torus7",
                                                "disk_pair", "annulus_one_boundary", "doubled_disk",
                                                "cone_square"};
    return names;
}

inline std::shared_ptr<const Complex> complex_family(const std::string& name) {
    if (name == "circle") return circle();
    if (name == "filled_triangle") return filled_triangle();
    if (name == "torus7") return torus7();
    if (name == "disk_pair") return disk_pair();
    if (name == "annulus_one_boundary") return annulus_one_boundary();
    if (name == "doubled_disk") return doubled_disk();
    if (name == "cone_square") return cone_square();
    throw Error(ErrorKind::UnknownFamily, "unknown complex family '" + name + "'");
}

// ---- random matrices ----

inline Mat random_gaussian(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    Mat a(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) a(i, j) = cd(d(rng), d(rng));
    return a;
}

inline Mat random_unitary(int n, std::mt19937_64& rng) {
    if (n == 0) return Mat(0, 0);
    Eigen::HouseholderQR<Mat> qr(random_gaussian(n, n, rng));
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR();
    for (int i = 0; i < n; ++i) {
        cd z = r(i, i);
        q.col(i) *= std::abs(z) > 0 ? z / std::abs(z) : cd(1.0);
    }
    return q;
}

// skew-Hermitian direction of unit norm
inline Mat random_direction(int n, std::mt19937_64& rng) {
    if (n == 0) return Mat(0, 0);
    Mat a = random_gaussian(n, n, rng);
    Mat h = (a + a.adjoint()) / 2.0;
    return cd(0.0, 1.0) * h / op_norm(h);
}

// ---- cocycles ----

// basis of the closed real 1-cochains of the nerve, as columns indexed by edge id
inline Eigen::MatrixXd closed_cochains(const StarCover& c) {
    const int E = c.n_edges(), T = static_cast<int>(c.triangles.size());
    if (T == 0) return Eigen::MatrixXd::Identity(E, E);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(T, E);
    for (int t = 0; t < T; ++t) {
        const auto& x = c.triangles[t];
        d(t, c.edge_id(x[0], x[1])) += 1;
        d(t, c.edge_id(x[1], x[2])) += 1;
        d(t, c.edge_id(x[0], x[2])) -= 1;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(d);
    if (lu.rank() == E) return Eigen::MatrixXd::Zero(E, 0);
    return lu.kernel();
}

// v_ab = g_a Q diag(exp(i x_ab)) Q^* g_b^* with closed phases x; constant on overlaps
inline Cocycle random_flat(std::shared_ptr<const StarCover> c, int n, std::mt19937_64& rng) {
    Eigen::MatrixXd z = closed_cochains(*c);
    std::uniform_real_distribution<double> coef(-std::numbers::pi, std::numbers::pi);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(c->n_edges(), n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < z.cols(); ++k) x.col(i) += coef(rng) * z.col(k);
    Mat q = random_unitary(n, rng);
    std::vector<Mat> g(c->K->n_vertices);
    for (int v : c->index) g[v] = random_unitary(n, rng);
    std::vector<Mat> val(c->n_edges());
    for (int e = 0; e < c->n_edges(); ++e) {
        auto [a, b] = c->edges[e];
        Vec ph(n);
        for (int i = 0; i < n; ++i) ph(i) = std::exp(cd(0.0, x(e, i)));
        val[e] = g[a] * q * ph.asDiagonal() * q.adjoint() * g[b].adjoint();
    }
    return make_cocycle(c, n, [&](int a, int b, int) { return val[c->edge_id(a, b)]; });
}

// sample-dependent gauge exp(delta S) with unit directions S drawn from rng
inline Cocycle perturb(const Cocycle& v, double delta, std::mt19937_64& rng) {
    const StarCover& c = *v.cover;
    FieldMorphism phi{v.cover, std::vector<std::vector<Mat>>(c.K->n_vertices)};
    for (int mu : c.index)
        for (size_t p = 0; p < c.vertex_samples[mu].size(); ++p)
            phi.u[mu].push_back(exp_skew(delta * random_direction(v.dim, rng)));
    return make_cocycle(v.cover, v.dim, [&](int a, int b, int sid) {
        return Mat(phi.at(a, sid) * v.at(a, b, sid) * phi.at(b, sid).adjoint());
    });
}

inline Cocycle random_eps_flat(std::shared_ptr<const StarCover> c, int n, double eps,
                               std::mt19937_64& rng) {
    Cocycle v = random_flat(c, n, rng);
    return perturb(v, eps / 4.0, rng);
}

inline Morphism random_morphism(std::shared_ptr<const StarCover> c, int n, std::mt19937_64& rng) {
    Morphism m{c, std::vector<Mat>(c->K->n_vertices)};
    for (int v : c->index) m.u[v] = random_unitary(n, rng);
    return m;
}

// v2 is a gauge transform of v1 by w; every piece is then perturbed at scale eps/4
inline RelativeBundle random_relative(const PairContext& c, int n, int m, double eps,
                                      std::mt19937_64& rng) {
    const double d = eps / 4.0;
    Cocycle base = random_flat(c.X, n, rng);
    Morphism w = random_morphism(c.X, n, rng);
    Cocycle v0 = random_flat(c.Y, m, rng);
    RelativeBundle f{perturb(base, d, rng), perturb(unitary_act(w, base), d, rng), perturb(v0, d, rng),
                     Morphism{c.Y, std::vector<Mat>(c.K->n_vertices)}};
    for (int mu : c.Y->index)
        f.u.u[mu] = direct_sum(w.u[mu], identity(m)) * exp_skew(d * random_direction(n + m, rng));
    return f;
}

inline QuasiRep perturb(const QuasiRep& pi, double delta, std::mt19937_64& rng) {
    QuasiRep r = pi;
    for (auto& g : r.gen) g = g * exp_skew(delta * random_direction(pi.dim, rng));
    return r;
}

// a genuine relative representation (monodromy of a flat bundle) perturbed at scale eps/4
inline RelativeQuasiRep random_relative_rep(const PairContext& c, int n, int m, double eps,
                                            std::mt19937_64& rng) {
    RelativeBundle f = random_relative(c, n, m, 0.0, rng);
    RelativeQuasiRep p = bold_alpha(normalize_relative(f, c).f, c);
    const double d = eps / 4.0;
    p.pi1 = perturb(p.pi1, d, rng);
    p.pi2 = perturb(p.pi2, d, rng);
    p.pi0 = perturb(p.pi0, d, rng);
    p.u = p.u * exp_skew(d * random_direction(n + m, rng));
    return p;
}

// transports of a random flat bundle, each twisted by exp(eps S)
inline DiscreteConnection random_connection(std::shared_ptr<const Complex> K, int n, double eps,
                                            std::mt19937_64& rng) {
    auto c = star_cover(K);
    Cocycle v = random_flat(c, n, rng);
    DiscreteConnection conn{K, n, {}};
    for (int e = 0; e < c->n_edges(); ++e)
        conn.g[c->edges[e]] = v.vals[e][0].adjoint() * exp_skew(eps * random_direction(n, rng));
    return conn;
}

// ---- surfaces and clutching ----

// rank one bundle on the disk pair, trivial on X, glued by u_mu = exp(2 pi i k mu / 6)
inline RelativeBundle clutching_chern(const PairContext& c, int k, double eps = 0.0,
                                      std::mt19937_64* rng = nullptr) {
    RelativeBundle f = identity_bundle(c, 1, 0);
    const int ny = static_cast<int>(c.K->y_vertices.size());
    for (int i = 0; i < ny; ++i) {
        int mu = c.K->y_vertices[i];
        f.u.u[mu] = Mat::Constant(1, 1, std::exp(cd(0.0, 2 * std::numbers::pi * k * i / ny)));
    }
    if (eps > 0 && rng) {
        f.v1 = perturb(f.v1, eps / 4.0, *rng);
        f.v2 = perturb(f.v2, eps / 4.0, *rng);
        for (int mu : c.Y->index) f.u.u[mu] *= exp_skew(eps / 4.0 * random_direction(1, *rng));
    }
    return f;
}

// ---- group data ----

// lattice vector of the step i -> i + s on the torus
inline std::array<long, 2> torus7_step(int s) {
    s = ((s % 7) + 7) % 7;
    switch (s) {
    case 1: return {1, 0};
    case 2: return {0, 1};
    case 3: return {1, 1};
    case 4: return {-1, -1};
    case 5: return {0, -1};
    case 6: return {-1, 0};
    }
    return {0, 0};
}

// coordinates in pi_1 = Z^2 of the generator loops on the 7-vertex torus
inline std::vector<std::vector<long>> torus7_coords(const NerveTree& t, const Generators& g) {
    std::vector<std::array<long, 2>> pos(7, {0, 0});
    for (int x : t.order) {
        if (x == t.base) continue;
        auto s = torus7_step(x - t.parent[x]);
        pos[x] = {pos[t.parent[x]][0] + s[0], pos[t.parent[x]][1] + s[1]};
    }
    std::vector<std::vector<long>> out;
    for (int e : g.edge_of) {
        auto [a, b] = t.cover->edges[e];
        auto s = torus7_step(a - b);
        long wx = pos[b][0] + s[0] - pos[a][0], wy = pos[b][1] + s[1] - pos[a][1];
        if ((wx + 2 * wy) % 7 != 0) throw Error(ErrorKind::OracleIncomplete, "loop off the period lattice");
        out.push_back({(wx + 2 * wy) / 7, wy});
    }
    return out;
}

// abelianization coordinates when pi_1 is trivial, infinite cyclic on one generator, or the torus
inline std::vector<std::vector<long>> group_coords(const NerveTree& t, const Generators& g) {
    if (fill_loops(t).all_fillable()) return std::vector<std::vector<long>>(g.size());
    if (t.cover->n_index() == 7 && t.cover->K->simplices == torus7()->simplices) return torus7_coords(t, g);
    if (g.size() == 1) return {{1}};
    throw Error(ErrorKind::OracleIncomplete, "no normal forms for this group");
}

inline Mat clock_matrix(int d) {
    Vec ph(d);
    for (int j = 0; j < d; ++j) ph(j) = std::exp(cd(0.0, 2 * std::numbers::pi * j / d));
    return ph.asDiagonal();
}

inline Mat shift_matrix(int d) {
    Mat s = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) s((j + 1) % d, j) = 1;
    return s;
}

inline Mat int_power(const Mat& a, long p) {
    Mat r = identity(static_cast<int>(a.rows()));
    Mat b = p >= 0 ? a : Mat(a.adjoint());
    for (long i = 0; i < std::abs(p); ++i) r = r * b;
    return r;
}

// clock and shift on the two generators of Z^2
inline QuasiRep almost_commuting(int d) {
    if (d < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
    return {d, {clock_matrix(d), shift_matrix(d)}};
}

// U^a V^b on generators with lattice coordinates (a, b)
inline QuasiRep lattice_quasirep(const QuasiRep& uv, const std::vector<std::vector<long>>& coords) {
    QuasiRep r{uv.dim, {}};
    for (const auto& c : coords) r.gen.push_back(int_power(uv.gen[0], c[0]) * int_power(uv.gen[1], c[1]));
    return r;
}

}  // namespace af
