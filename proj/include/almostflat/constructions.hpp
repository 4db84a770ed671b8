#pragma once

#include "almostflat/quasirep.hpp"

namespace af {

// pullback along a vertex map that sends simplices to simplices
inline Cocycle pullback(std::shared_ptr<const StarCover> cover, const std::vector<int>& vmap,
                        const Cocycle& v) {
    const Complex& K1 = *cover->K;
    const Complex& K2 = *v.cover->K;
    if (static_cast<int>(vmap.size()) != K1.n_vertices)
        throw Error(ErrorKind::NotSimplicial, "vertex map has the wrong length");
    std::vector<int> image(K1.size());
    for (int sid = 0; sid < K1.size(); ++sid) {
        Simplex s;
        for (int x : K1[sid]) {
            if (vmap[x] < 0 || vmap[x] >= K2.n_vertices)
                throw Error(ErrorKind::NotSimplicial, "vertex image out of range");
            s.push_back(vmap[x]);
        }
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        image[sid] = K2.id(s);
        if (image[sid] < 0) throw Error(ErrorKind::NotSimplicial, "image of a simplex is not a simplex");
    }
    return make_cocycle(cover, v.dim, [&](int a, int b, int sid) {
        return v.at(vmap[a], vmap[b], image[sid]);
    });
}

// X u_Y (Y x [1,2]) u_Y X; side 1 keeps the vertex ids, side 2 shifts them by |I|
struct DoubleComplex {
    std::shared_ptr<const Complex> base;
    std::shared_ptr<const Complex> K;
    std::vector<int> side, orig;

    int vid(int v, int s) const { return s == 1 ? v : base->n_vertices + v; }
    Simplex lift(const Simplex& x, int s) const {
        Simplex r;
        for (int v : x) r.push_back(vid(v, s));
        return r;
    }
    // the simplex of X under the retraction onto either side
    Simplex fold(const Simplex& s) const {
        Simplex r;
        for (int x : s) r.push_back(orig[x]);
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        return r;
    }
};

inline DoubleComplex build_double(std::shared_ptr<const Complex> base) {
    const int N = base->n_vertices;
    if (base->y_vertices.empty() || static_cast<int>(base->y_vertices.size()) == N)
        throw Error(ErrorKind::NoBoundary, "Y must be a nonempty proper subcomplex");
    DoubleComplex d;
    d.base = base;
    d.side.resize(2 * N);
    d.orig.resize(2 * N);
    for (int v = 0; v < N; ++v) {
        d.side[v] = 1;
        d.side[N + v] = 2;
        d.orig[v] = d.orig[N + v] = v;
    }
    std::vector<Simplex> maxi;
    for (const auto& s : base->maximal()) {
        maxi.push_back(s);
        Simplex t;
        for (int x : s) t.push_back(N + x);
        maxi.push_back(t);
    }
    for (const auto& s : base->simplices) {
        if (!base->in_y(s)) continue;
        Simplex j = s;
        for (int x : s) j.push_back(N + x);
        maxi.push_back(j);
    }
    d.K = make_complex(2 * N, maxi, base->y_vertices, base->basepoint);
    return d;
}

// (v1, v2, u) with v_i the restriction to side i and u read off the vertical edges
inline RelativeBundle fold_to_relative(const Cocycle& vhat, const DoubleComplex& d,
                                       const PairContext& c) {
    const Complex& D = *d.K;
    auto side = [&](int s) {
        return make_cocycle(c.X, vhat.dim, [&](int a, int b, int sid) {
            return vhat.at(d.vid(a, s), d.vid(b, s), D.id(d.lift((*c.K)[sid], s)));
        });
    };
    RelativeBundle r{side(1), side(2), identity_cocycle(c.Y, 0),
                     Morphism{c.Y, std::vector<Mat>(c.K->n_vertices)}};
    for (int mu : c.Y->index) r.u.u[mu] = vhat.at(d.vid(mu, 2), d.vid(mu, 1), D.id({mu, d.vid(mu, 2)}));
    return r;
}

// Cocycle on the double glued from v1 and v2 by the exact intertwiner near u.
inline Cocycle unfold_to_double(const RelativeBundle& f, const DoubleComplex& d, const PairContext& c,
                                GaugeOptions opt = {}) {
    if (f.m() != 0) throw Error(ErrorKind::StabilizedRep, "unfolding needs a relative cocycle");
    const Complex& X = *c.K;
    if (opt.strict) {
        double eps = measure(f, c).overall, thr = gauge_threshold(*c.X);
        if (!(eps < thr))
            throw Error(ErrorKind::EpsilonTooLarge, "certificate " + std::to_string(eps) +
                                                        " not below " + std::to_string(thr));
    }
    FieldMorphism ub = gauge_correct(restrict_to(f.v1, c.Y), restrict_to(f.v2, c.Y), f.u, c.yeta, {false});
    auto cover = star_cover(d.K);
    const Complex& D = *d.K;
    return make_cocycle(cover, f.n(), [&](int A, int B, int sid) -> Mat {
        int sa = d.side[A], sb = d.side[B], a = d.orig[A], b = d.orig[B];
        int q = X.id(d.fold(D[sid]));
        if (sa == sb) return (sa == 1 ? f.v1 : f.v2).at(a, b, q);
        return f.v1.at(a, b, q) * ub.at(b, q).adjoint();
    });
}

// quasi-representation of the amalgam on two copies of the generators; copy 2 is offset by |G|
inline QuasiRep amalgam_rep(const QuasiRep& pi1, const QuasiRep& pi2) {
    if (pi1.dim != pi2.dim || pi1.gen.size() != pi2.gen.size())
        throw Error(ErrorKind::DimMismatch, "the two sides have different shapes");
    QuasiRep r{pi1.dim, pi1.gen};
    r.gen.insert(r.gen.end(), pi2.gen.begin(), pi2.gen.end());
    return r;
}

// Normal forms in the amalgam: products within a copy use the Gamma oracle; a generator of the
// shared subgroup is moved to the other copy; otherwise the alternating word is reduced.
inline WordOracle amalgam_oracle(const WordOracle& gamma, int ngen, const std::vector<int>& shared) {
    std::vector<char> in_l(ngen, 0);
    for (int g : shared) in_l.at(g) = 1;
    auto shift = [&](const Word& w, int copy) {
        Word r = w;
        for (int& l : r) l = l > 0 ? l + copy * ngen : l - copy * ngen;
        return r;
    };
    WordOracle o;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int g = 0; g < ngen; ++g)
                for (int h = 0; h < ngen; ++h) {
                    auto it = gamma.product.find({g, h});
                    std::pair<int, int> key{g + i * ngen, h + j * ngen};
                    if (i == j || in_l[h]) {
                        if (it != gamma.product.end()) o.product[key] = shift(it->second, i);
                    } else if (in_l[g]) {
                        if (it != gamma.product.end()) o.product[key] = shift(it->second, j);
                    } else {
                        o.product[key] = {key.first + 1, key.second + 1};
                    }
                }
    return o;
}

// finite covering map given by a vertex projection of an explicit total complex
struct FiniteCovering {
    std::shared_ptr<const Complex> total, base;
    std::vector<int> proj;
    int sheets = 0;
    std::vector<std::vector<int>> lifts;    // base vertex -> lifts ascending
    std::vector<int> sheet_of;              // total vertex -> sheet index
    std::map<std::pair<int, int>, int> lift_of; // (base simplex, total vertex) -> total simplex
};

inline FiniteCovering make_covering(std::shared_ptr<const Complex> total,
                                    std::shared_ptr<const Complex> base, std::vector<int> proj) {
    FiniteCovering c{total, base, proj, 0, {}, {}, {}};
    if (static_cast<int>(proj.size()) != total->n_vertices)
        throw Error(ErrorKind::BadCovering, "projection has the wrong length");
    c.lifts.assign(base->n_vertices, {});
    c.sheet_of.assign(total->n_vertices, -1);
    for (int x = 0; x < total->n_vertices; ++x) {
        if (proj[x] < 0 || proj[x] >= base->n_vertices)
            throw Error(ErrorKind::BadCovering, "projection out of range");
        c.lifts[proj[x]].push_back(x);
    }
    c.sheets = static_cast<int>(c.lifts[0].size());
    for (int v = 0; v < base->n_vertices; ++v) {
        if (static_cast<int>(c.lifts[v].size()) != c.sheets || c.sheets == 0)
            throw Error(ErrorKind::BadCovering, "fibres have different sizes");
        for (int i = 0; i < c.sheets; ++i) c.sheet_of[c.lifts[v][i]] = i;
    }
    for (int t = 0; t < total->size(); ++t) {
        Simplex s;
        for (int x : (*total)[t]) s.push_back(proj[x]);
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw Error(ErrorKind::BadCovering, "projection folds a simplex");
        int b = base->id(s);
        if (b < 0) throw Error(ErrorKind::BadCovering, "image of a simplex is not a simplex");
        for (int x : (*total)[t])
            if (!c.lift_of.emplace(std::make_pair(b, x), t).second)
                throw Error(ErrorKind::BadCovering, "two lifts of a simplex share a vertex");
    }
    for (int b = 0; b < base->size(); ++b)
        for (int v : (*base)[b])
            for (int x : c.lifts[v])
                if (!c.lift_of.count({b, x}))
                    throw Error(ErrorKind::BadCovering, "a simplex does not lift at every sheet");
    return c;
}

// block cocycle of rank n|F| on the base; block (i, j) carries v between the matching lifts
inline Cocycle covering_pushforward(const FiniteCovering& cov, const Cocycle& v,
                                    std::shared_ptr<const StarCover> base_cover) {
    if (v.cover->K != cov.total) throw Error(ErrorKind::BadCovering, "cocycle not on the total space");
    const int n = v.dim, F = cov.sheets;
    return make_cocycle(base_cover, n * F, [&](int a, int b, int sid) {
        Mat r = Mat::Zero(n * F, n * F);
        for (int i = 0; i < F; ++i) {
            int abar = cov.lifts[a][i];
            int t = cov.lift_of.at({sid, abar});
            int bbar = -1;
            for (int x : (*cov.total)[t])
                if (cov.proj[x] == b) bbar = x;
            r.block(i * n, cov.sheet_of[bbar] * n, n, n) = v.at(abar, bbar, t);
        }
        return r;
    });
}

// transport g_ab from the fibre at a to the fibre at b on each edge a<b
struct DiscreteConnection {
    std::shared_ptr<const Complex> K;
    int dim = 0;
    std::map<std::pair<int, int>, Mat> g;

    Mat transport(int a, int b) const {
        if (a == b) return identity(dim);
        auto it = g.find({std::min(a, b), std::max(a, b)});
        if (it == g.end()) throw Error(ErrorKind::InvalidArgument, "not an edge");
        return a < b ? it->second : Mat(it->second.adjoint());
    }
};

inline DiscreteConnection identity_connection(std::shared_ptr<const Complex> K, int dim) {
    DiscreteConnection c{K, dim, {}};
    for (const auto& s : K->simplices)
        if (s.size() == 2) c.g[{s[0], s[1]}] = identity(dim);
    return c;
}

inline double curvature_defect(const DiscreteConnection& c) {
    double m = 0;
    for (const auto& s : c.K->simplices)
        if (s.size() == 3) {
            Mat h = c.transport(s[2], s[0]) * c.transport(s[1], s[2]) * c.transport(s[0], s[1]);
            m = std::max(m, op_norm(h - identity(c.dim)));
        }
    return m;
}

// twice the number of 2-simplices bounded by a transport bigon; zero without 2-cells
inline int bigon_constant(const Complex& K) { return K.dim() >= 2 ? 2 : 0; }

// Trivializations by transport from the least vertex of each sample along its edge to the centre.
inline Cocycle holonomy_to_cech(const DiscreteConnection& c, std::shared_ptr<const StarCover> cover) {
    if (cover->K != c.K) throw Error(ErrorKind::ComplexMismatch, "cover of another complex");
    const Complex& K = *c.K;
    return make_cocycle(cover, c.dim, [&](int a, int b, int sid) {
        int x = K[sid].front();
        return Mat(c.transport(x, a) * c.transport(b, x));
    });
}

}  // namespace af
