#pragma once

#include "almostflat/relative.hpp"

#include <optional>

namespace af {

struct QuasiRep {
    int dim = 0;
    std::vector<Mat> gen;

    Mat eval(const Word& w) const {
        Mat r = identity(dim);
        for (int l : w) r = r * (l > 0 ? gen[l - 1] : Mat(gen[-l - 1].adjoint()));
        return r;
    }
};

// normal forms tau(gh) for products of two generators
struct WordOracle {
    std::map<std::pair<int, int>, Word> product;

    const Word& at(int g, int h) const {
        auto it = product.find({g, h});
        if (it == product.end())
            throw Error(ErrorKind::OracleIncomplete,
                        "no normal form for product of generators " + std::to_string(g) + ", " +
                            std::to_string(h));
        return it->second;
    }
};

inline WordOracle free_oracle(int ngen) {
    WordOracle o;
    for (int g = 0; g < ngen; ++g)
        for (int h = 0; h < ngen; ++h) o.product[{g, h}] = reduce_word({g + 1, h + 1});
    return o;
}

// Oracle for a group of rank at most 2 given by the abelianization vector of every generator.
inline WordOracle abelian_oracle(const std::vector<std::vector<long>>& coords) {
    const int ngen = static_cast<int>(coords.size());
    const size_t r = ngen ? coords[0].size() : 0;
    if (r > 2) throw Error(ErrorKind::OracleIncomplete, "abelian normal forms need rank <= 2");
    // a unimodular pair (or a single +-1 entry in rank 1) spanning the lattice
    std::vector<int> basis;
    if (r == 1) {
        for (int g = 0; g < ngen && basis.empty(); ++g)
            if (std::abs(coords[g][0]) == 1) basis.push_back(g);
    } else if (r == 2) {
        for (int a = 0; a < ngen && basis.empty(); ++a)
            for (int b = a + 1; b < ngen; ++b) {
                long det = coords[a][0] * coords[b][1] - coords[a][1] * coords[b][0];
                if (std::abs(det) == 1) {
                    basis = {a, b};
                    break;
                }
            }
    }
    auto normal_form = [&](const std::vector<long>& x) -> std::optional<Word> {
        if (std::all_of(x.begin(), x.end(), [](long t) { return t == 0; })) return Word{};
        for (int g = 0; g < ngen; ++g)
            if (coords[g] == x) return Word{g + 1};
        if (basis.size() != r) return std::nullopt;
        std::vector<long> c(r);
        if (r == 1) {
            c[0] = x[0] * coords[basis[0]][0];
        } else {
            const auto& A = coords[basis[0]];
            const auto& B = coords[basis[1]];
            long det = A[0] * B[1] - A[1] * B[0];
            c[0] = (x[0] * B[1] - x[1] * B[0]) * det;
            c[1] = (A[0] * x[1] - A[1] * x[0]) * det;
        }
        Word w;
        for (size_t i = 0; i < r; ++i)
            for (long t = 0; t < std::abs(c[i]); ++t) w.push_back(c[i] > 0 ? basis[i] + 1 : -(basis[i] + 1));
        return w;
    };
    WordOracle o;
    for (int g = 0; g < ngen; ++g)
        for (int h = 0; h < ngen; ++h) {
            std::vector<long> x(r);
            for (size_t i = 0; i < r; ++i) x[i] = coords[g][i] + coords[h][i];
            if (auto w = normal_form(x)) o.product[{g, h}] = *w;
        }
    return o;
}

inline double rep_defect(const QuasiRep& pi, const WordOracle& o) {
    const int ngen = static_cast<int>(pi.gen.size());
    double m = 0;
    for (int g = 0; g < ngen; ++g)
        for (int h = 0; h < ngen; ++h)
            m = std::max(m, op_norm(pi.gen[g] * pi.gen[h] - pi.eval(o.at(g, h))));
    return m;
}

// over the listed generators (all when empty)
inline double intertwiner_defect(const QuasiRep& p1, const QuasiRep& p2, const Mat& u,
                                 const std::vector<int>& gens = {}) {
    if (p1.dim != p2.dim || u.rows() != p1.dim)
        throw Error(ErrorKind::DimMismatch, "dimensions of the intertwiner do not match");
    double m = 0;
    auto one = [&](int g) { m = std::max(m, op_norm(u * p1.gen[g] * u.adjoint() - p2.gen[g])); };
    if (gens.empty())
        for (size_t g = 0; g < p1.gen.size(); ++g) one(static_cast<int>(g));
    else
        for (int g : gens) one(g);
    return m;
}

inline double distance(const QuasiRep& a, const QuasiRep& b) {
    if (a.dim != b.dim || a.gen.size() != b.gen.size())
        throw Error(ErrorKind::DimMismatch, "quasi-representations of different shape");
    double m = 0;
    for (size_t g = 0; g < a.gen.size(); ++g) m = std::max(m, op_norm(a.gen[g] - b.gen[g]));
    return m;
}

// max over tree edges and samples of |v - 1|
inline double normalization_defect(const Cocycle& v, const NerveTree& t) {
    double m = 0;
    for (int e = 0; e < v.cover->n_edges(); ++e)
        if (t.tree_edge[e])
            for (const auto& x : v.vals[e]) m = std::max(m, op_norm(x - identity(v.dim)));
    return m;
}

// holonomy values u_a^* v_ab(x_ab) u_b on the generators, u transporting along tree paths
inline QuasiRep alpha(const Cocycle& v, const NerveTree& t, const Generators& g,
                      const NumericPolicy& pol = default_policy()) {
    double nd = normalization_defect(v, t);
    if (nd > pol.normalized_tol)
        throw Error(ErrorKind::NotNormalized, "tree-edge defect " + std::to_string(nd));
    const StarCover& c = *v.cover;
    std::vector<Mat> u(c.K->n_vertices);
    for (int x : t.order) {
        if (x == t.base) {
            u[x] = identity(v.dim);
            continue;
        }
        int p = t.parent[x];
        u[x] = v.at(x, p, t.base_sample[c.edge_id(p, x)]) * u[p];
    }
    QuasiRep pi{v.dim, {}};
    for (int e : g.edge_of) {
        auto [a, b] = c.edges[e];
        pi.gen.push_back(u[a].adjoint() * v.at(a, b, t.base_sample[e]) * u[b]);
    }
    return pi;
}

inline EdgeFamily edge_family(const QuasiRep& pi, const NerveTree& t, const Generators& g) {
    EdgeFamily w{t.cover, pi.dim, std::vector<Mat>(t.cover->n_edges(), identity(pi.dim))};
    for (int i = 0; i < g.size(); ++i) w.val[g.edge_of[i]] = pi.gen[i];
    return w;
}

inline Cocycle beta(const QuasiRep& pi, const NerveTree& t, const Generators& g,
                    const PartitionRoot& eta, PolarOptions opt = {}) {
    return polar_round(edge_family(pi, t, g), eta, opt);
}

struct RelativeQuasiRep {
    QuasiRep pi1, pi2, pi0;
    Mat u;
};

inline RelativeQuasiRep bold_alpha(const RelativeBundle& f, const PairContext& c,
                                   const NumericPolicy& pol = default_policy()) {
    return {alpha(f.v1, c.xtree, c.xgens, pol), alpha(f.v2, c.xtree, c.xgens, pol),
            alpha(f.v0, c.ytree, c.ygens, pol), f.u.u[c.xtree.base]};
}

inline RelativeBundle bold_beta(const RelativeQuasiRep& p, const PairContext& c,
                                PolarOptions opt = {}) {
    RelativeBundle f{beta(p.pi1, c.xtree, c.xgens, c.xeta, opt),
                     beta(p.pi2, c.xtree, c.xgens, c.xeta, opt),
                     beta(p.pi0, c.ytree, c.ygens, c.yeta, opt),
                     Morphism{c.Y, std::vector<Mat>(c.K->n_vertices)}};
    for (int mu : c.Y->index) f.u.u[mu] = p.u;
    return f;
}

// the X generators restricted along the inclusion of Y
inline QuasiRep restrict_to_lambda(const QuasiRep& pi, const PairContext& c) {
    QuasiRep r{pi.dim, {}};
    for (int g : c.lambda_to_gamma) r.gen.push_back(pi.gen[g]);
    return r;
}

struct RelativeRepDefect {
    double pi1 = 0, pi2 = 0, pi0 = 0, u = 0, overall = 0;
};

inline RelativeRepDefect relative_rep_defect(const RelativeQuasiRep& p, const PairContext& c,
                                             const WordOracle& ox, const WordOracle& oy) {
    RelativeRepDefect d;
    d.pi1 = rep_defect(p.pi1, ox);
    d.pi2 = rep_defect(p.pi2, ox);
    d.pi0 = rep_defect(p.pi0, oy);
    QuasiRep a = restrict_to_lambda(p.pi1, c), b = restrict_to_lambda(p.pi2, c);
    for (size_t l = 0; l < a.gen.size(); ++l) {
        Mat s = direct_sum(a.gen[l], p.pi0.gen[l]), t = direct_sum(b.gen[l], p.pi0.gen[l]);
        d.u = std::max(d.u, op_norm(p.u * s * p.u.adjoint() - t));
    }
    d.overall = std::max({d.pi1, d.pi2, d.pi0, d.u});
    return d;
}

inline double distance(const RelativeQuasiRep& p, const RelativeQuasiRep& q) {
    return std::max({distance(p.pi1, q.pi1), distance(p.pi2, q.pi2), distance(p.pi0, q.pi0),
                     op_norm(p.u - q.u)});
}

// (pi1, pi2, 1) with pi2 conjugated by u^*
inline RelativeQuasiRep normalize_relative_rep(const RelativeQuasiRep& p) {
    if (p.pi0.dim != 0) throw Error(ErrorKind::StabilizedRep, "stabilizer must have rank 0");
    RelativeQuasiRep r = p;
    for (auto& x : r.pi2.gen) x = p.u.adjoint() * x * p.u;
    r.u = identity(p.pi1.dim);
    return r;
}

}  // namespace af
