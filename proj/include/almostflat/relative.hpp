#pragma once

#include "almostflat/cocycle.hpp"

#include <numbers>

namespace af {

// covers, trees and generators of a pair (X, Y), with the basepoint in Y
struct PairContext {
    std::shared_ptr<const Complex> K;
    std::shared_ptr<const StarCover> X, Y;
    NerveTree xtree, ytree;
    Generators xgens, ygens;
    std::vector<int> lambda_to_gamma; // Y generator -> X generator
    PartitionRoot xeta, yeta;
};

inline PairContext make_context(std::shared_ptr<const Complex> K) {
    PairContext c;
    c.K = K;
    c.X = star_cover(K);
    c.Y = y_cover(K);
    c.xtree = build_tree(c.X, K->basepoint, K->in_y_vertex);
    c.ytree = build_tree(c.Y, K->basepoint);
    c.xgens = make_generators(c.xtree);
    c.ygens = make_generators(c.ytree);
    for (int e : c.ygens.edge_of) {
        auto [a, b] = c.Y->edges[e];
        int g = c.xgens.gen_of_edge[c.X->edge_id(a, b)];
        if (g < 0) throw Error(ErrorKind::InvalidArgument, "Y tree is not the restricted X tree");
        c.lambda_to_gamma.push_back(g);
    }
    c.xeta = uniform_partition(*c.X);
    c.yeta = uniform_partition(*c.Y);
    return c;
}

// (v1, v2, v0, u) with u: v1|Y + v0 -> v2|Y + v0 on the stars of Y
struct RelativeBundle {
    Cocycle v1, v2, v0;
    Morphism u;
    int n() const { return v1.dim; }
    int m() const { return v0.dim; }
};

struct FlatnessCertificate {
    double eps_v1 = 0, eps_v2 = 0, eps_v0 = 0, eps_u = 0, overall = 0;
};

inline Cocycle source_on_y(const RelativeBundle& f, const PairContext& c) {
    return direct_sum(restrict_to(f.v1, c.Y), f.v0);
}
inline Cocycle target_on_y(const RelativeBundle& f, const PairContext& c) {
    return direct_sum(restrict_to(f.v2, c.Y), f.v0);
}

inline FlatnessCertificate measure(const RelativeBundle& f, const PairContext& c) {
    FlatnessCertificate r;
    r.eps_v1 = flatness(f.v1);
    r.eps_v2 = flatness(f.v2);
    r.eps_v0 = flatness(f.v0);
    r.eps_u = hom_defect(source_on_y(f, c), target_on_y(f, c), f.u);
    r.overall = std::max({r.eps_v1, r.eps_v2, r.eps_v0, r.eps_u});
    return r;
}

inline double distance(const RelativeBundle& f, const RelativeBundle& g) {
    if (f.n() != g.n() || f.m() != g.m()) throw Error(ErrorKind::DimMismatch, "ranks differ");
    return std::max({distance(f.v1, g.v1), distance(f.v2, g.v2), distance(f.v0, g.v0),
                     distance(f.u, g.u)});
}

inline RelativeBundle identity_bundle(const PairContext& c, int n, int m) {
    return {identity_cocycle(c.X, n), identity_cocycle(c.X, n), identity_cocycle(c.Y, m),
            identity_morphism(c.Y, n + m)};
}

inline RelativeBundle zero_bundle(const PairContext& c) { return identity_bundle(c, 0, 0); }

// permutation taking (P, Q, P', Q') to (P + P', Q + Q')
inline Mat interleave(int n, int m, int n2, int m2) {
    const int N = n + m + n2 + m2;
    Mat p = Mat::Zero(N, N);
    for (int i = 0; i < n; ++i) p(i, i) = 1;
    for (int i = 0; i < n2; ++i) p(n + i, n + m + i) = 1;
    for (int i = 0; i < m; ++i) p(n + n2 + i, n + i) = 1;
    for (int i = 0; i < m2; ++i) p(n + n2 + m + i, n + m + n2 + i) = 1;
    return p;
}

inline RelativeBundle direct_sum(const RelativeBundle& f, const RelativeBundle& g) {
    if (f.v1.cover->K != g.v1.cover->K)
        throw Error(ErrorKind::ComplexMismatch, "bundles live on different complexes");
    RelativeBundle r{direct_sum(f.v1, g.v1), direct_sum(f.v2, g.v2), direct_sum(f.v0, g.v0),
                     Morphism{f.u.cover, std::vector<Mat>(f.u.u.size())}};
    Mat p = interleave(f.n(), f.m(), g.n(), g.m());
    for (int mu : f.u.cover->index) r.u.u[mu] = p * direct_sum(f.u.u[mu], g.u.u[mu]) * p.adjoint();
    return r;
}

inline RelativeBundle inverse(const RelativeBundle& f) { return {f.v2, f.v1, f.v0, adjoint(f.u)}; }

// gauges w1, w2 on X and w0 on Y act on the quadruple
inline RelativeBundle unitary_act(const Morphism& w1, const Morphism& w2, const Morphism& w0,
                                  const RelativeBundle& f) {
    RelativeBundle r{unitary_act(w1, f.v1), unitary_act(w2, f.v2), unitary_act(w0, f.v0), f.u};
    for (int mu : f.u.cover->index)
        r.u.u[mu] = direct_sum(w2.u[mu], w0.u[mu]) * f.u.u[mu] *
                    direct_sum(w1.u[mu], w0.u[mu]).adjoint();
    return r;
}

struct Normalized {
    RelativeBundle f;
    Morphism w1, w2, w0;
};

inline Normalized normalize_relative(const RelativeBundle& f, const PairContext& c) {
    Normalized r;
    r.w1 = normalize_tree(f.v1, c.xtree);
    r.w2 = normalize_tree(f.v2, c.xtree);
    r.w0 = normalize_tree(f.v0, c.ytree);
    r.f = unitary_act(r.w1, r.w2, r.w0, f);
    return r;
}

// (v1, v2, v0, u) ~ (0, 0, v1|Y + v0, (w|Y + 1)^* u) for an exact intertwiner w: v1 -> v2
inline RelativeBundle move_collapse(const RelativeBundle& f, const Morphism& w,
                                    const PairContext& c, double tol = 1e-10) {
    double d = hom_defect(f.v1, f.v2, w);
    if (d > tol)
        throw Error(ErrorKind::NotIntertwiner, "intertwining residual " + std::to_string(d));
    RelativeBundle r{identity_cocycle(c.X, 0), identity_cocycle(c.X, 0),
                     direct_sum(restrict_to(f.v1, c.Y), f.v0), f.u};
    for (int mu : c.Y->index)
        r.u.u[mu] = direct_sum(w.u[mu], identity(f.m())).adjoint() * f.u.u[mu];
    return r;
}

inline RelativeBundle move_kill(const RelativeBundle& f, const PairContext& c, double tol = 1e-10) {
    if (f.n() != 0) throw Error(ErrorKind::NotKillable, "nonzero rank on X");
    for (int mu : c.Y->index)
        if (op_norm(f.u.u[mu] - identity(f.m())) > tol)
            throw Error(ErrorKind::NotKillable, "u differs from 1 at vertex " + std::to_string(mu));
    return zero_bundle(c);
}

struct ClassOptions {
    bool strict = false; // literal gauge threshold on the whole certificate
};

struct SurfaceKClass {
    int relative_chern = 0;
    double raw = 0;
    double residue = 0;
};

struct Orientation {
    std::vector<int> triangles;    // simplex ids
    std::vector<int> sign;         // +-1 per triangle
    std::map<int, int> boundary;   // edge simplex id -> induced coefficient
};

// orientation propagated from the lexicographically first triangle
inline Orientation orient_surface(const Complex& K) {
    Orientation o;
    std::map<int, std::vector<int>> edge_tris;
    for (int sid = 0; sid < K.size(); ++sid) {
        if (K[sid].size() > 3)
            throw Error(ErrorKind::ClassUnresolved, "class readout needs a 2-dimensional complex");
        if (K[sid].size() == 3) o.triangles.push_back(sid);
    }
    if (o.triangles.empty()) throw Error(ErrorKind::ClassUnresolved, "no 2-cells");
    auto coef = [&](int t, int e) {
        const Simplex& s = K[t];
        const Simplex& f = K[e];
        for (int i = 0; i < 3; ++i) {
            Simplex face;
            for (int j = 0; j < 3; ++j)
                if (j != i) face.push_back(s[j]);
            if (face == f) return (i % 2 == 0) ? 1 : -1;
        }
        return 0;
    };
    for (int t : o.triangles) {
        const Simplex& s = K[t];
        for (int i = 0; i < 3; ++i) {
            Simplex face;
            for (int j = 0; j < 3; ++j)
                if (j != i) face.push_back(s[j]);
            edge_tris[K.id(face)].push_back(t);
        }
    }
    std::map<int, int> sign;
    std::deque<int> q{o.triangles.front()};
    sign[o.triangles.front()] = 1;
    while (!q.empty()) {
        int t = q.front();
        q.pop_front();
        const Simplex& s = K[t];
        for (int i = 0; i < 3; ++i) {
            Simplex face;
            for (int j = 0; j < 3; ++j)
                if (j != i) face.push_back(s[j]);
            int e = K.id(face);
            const auto& ts = edge_tris[e];
            if (ts.size() > 2) throw Error(ErrorKind::ClassUnresolved, "edge in more than two 2-cells");
            for (int t2 : ts) {
                if (t2 == t) continue;
                int want = -sign[t] * coef(t, e) * coef(t2, e);
                auto it = sign.find(t2);
                if (it == sign.end()) {
                    sign[t2] = want;
                    q.push_back(t2);
                } else if (it->second != want) {
                    throw Error(ErrorKind::ClassUnresolved, "surface is not orientable");
                }
            }
        }
    }
    if (sign.size() != o.triangles.size())
        throw Error(ErrorKind::ClassUnresolved, "2-cells do not form one strongly connected piece");
    for (int t : o.triangles) o.sign.push_back(sign[t]);
    for (auto& [e, ts] : edge_tris) {
        int c = 0;
        for (int t : ts) c += sign[t] * coef(t, e);
        if (c != 0) {
            if (!K.in_y(K[e]))
                throw Error(ErrorKind::ClassUnresolved, "boundary edge outside Y");
            o.boundary[e] = c;
        }
    }
    return o;
}

namespace detail {

inline cd det_or_one(const Mat& m) { return m.size() ? m.determinant() : cd(1.0, 0.0); }

// argument of z relative to a reference whose lift is ref_arg
inline double lift_arg(cd z, cd ref, double ref_arg) {
    double inc = std::arg(z / ref);
    if (std::abs(inc) >= std::numbers::pi / 2)
        throw Error(ErrorKind::EpsilonTooLarge, "determinant lift is ambiguous on an overlap");
    return ref_arg + inc;
}

}  // namespace detail

// Relative first Chern number of an oriented surface pair from determinant windings.
inline SurfaceKClass k_class(const RelativeBundle& f, const PairContext& c, ClassOptions opt = {}) {
    const Complex& K = *c.K;
    Orientation o = orient_surface(K);
    if (opt.strict) {
        double eps = measure(f, c).overall, thr = gauge_threshold(*c.X);
        if (!(eps < thr))
            throw Error(ErrorKind::EpsilonTooLarge, "certificate " + std::to_string(eps) +
                                                        " not below " + std::to_string(thr));
    }
    FieldMorphism ub;
    try {
        ub = gauge_correct(source_on_y(f, c), target_on_y(f, c), f.u, c.yeta, {false});
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SingularPolar)
            throw Error(ErrorKind::EpsilonTooLarge, std::string("gauge correction: ") + e.what());
        throw;
    }
    const StarCover& X = *c.X;
    auto g = [&](int e, int p) {
        return detail::det_or_one(f.v2.vals[e][p]) / detail::det_or_one(f.v1.vals[e][p]);
    };
    // theta_ab at a sample, a<b
    auto theta = [&](int a, int b, int sid) {
        int e = X.edge_id(a, b);
        cd ref = g(e, 0);
        return detail::lift_arg(g(e, X.sample_pos(e, sid)), ref, std::arg(ref));
    };
    auto phi = [&](int mu, int sid) {
        cd ref = detail::det_or_one(ub.at(mu, K.id({mu})));
        return detail::lift_arg(detail::det_or_one(ub.at(mu, sid)), ref, std::arg(ref));
    };
    const double tau = 2 * std::numbers::pi;
    double raw = 0;
    for (size_t i = 0; i < o.triangles.size(); ++i) {
        int t = o.triangles[i];
        const Simplex& s = K[t];
        double sum = theta(s[0], s[1], t) + theta(s[1], s[2], t) - theta(s[0], s[2], t);
        raw += o.sign[i] * sum / tau;
    }
    for (auto [e, coef] : o.boundary) {
        int a = K[e][0], b = K[e][1];
        raw += coef * (phi(a, e) - phi(b, e) - theta(a, b, e)) / tau;
    }
    SurfaceKClass r;
    r.raw = raw;
    r.relative_chern = static_cast<int>(std::lround(raw));
    r.residue = std::abs(raw - r.relative_chern);
    if (!(r.residue < 0.1))
        throw Error(ErrorKind::ClassUnresolved, "rounding residue " + std::to_string(r.residue));
    return r;
}

struct HomotopyOptions {
    bool strict = true;
};

// Path from f (s = 0) to g (s = 2): exact gauge paths on the cocycles for s in [0,1],
// then a geodesic between the intertwiners for s in [1,2].
struct HomotopyPath {
    RelativeBundle f, g;
    FieldMorphism c1, c2, c0;
    const PairContext* ctx = nullptr;

    RelativeBundle at(double s) const {
        auto moved = [](const Cocycle& v, const FieldMorphism& w, double t) {
            FieldMorphism id = w;
            for (auto& l : id.u)
                for (auto& x : l) x = identity(static_cast<int>(x.rows()));
            FieldMorphism ws = gauge_homotopy(id, w, t);
            return make_cocycle(v.cover, v.dim, [&](int a, int b, int sid) {
                return Mat(ws.at(a, sid) * v.at(a, b, sid) * ws.at(b, sid).adjoint());
            });
        };
        if (s <= 1.0) return {moved(f.v1, c1, s), moved(f.v2, c2, s), moved(f.v0, c0, s), f.u};
        double t = s - 1.0;
        RelativeBundle r{g.v1, g.v2, g.v0, f.u};
        for (int mu : ctx->Y->index) {
            Mat l = principal_log_unitary(f.u.u[mu].adjoint() * g.u.u[mu]);
            r.u.u[mu] = f.u.u[mu] * exp_skew(t * l);
        }
        return r;
    }
};

inline HomotopyPath homotopy_path(const RelativeBundle& f, const RelativeBundle& g,
                                  const PairContext& c, HomotopyOptions opt = {}) {
    double d = distance(f, g);
    if (opt.strict && !(d < gauge_threshold(*c.X)))
        throw Error(ErrorKind::EpsilonTooLarge, "endpoints too far apart: " + std::to_string(d));
    HomotopyPath h{f, g, {}, {}, {}, &c};
    GaugeOptions go{false};
    h.c1 = gauge_correct(f.v1, g.v1, identity_morphism(c.X, f.n()), c.xeta, go);
    h.c2 = gauge_correct(f.v2, g.v2, identity_morphism(c.X, f.n()), c.xeta, go);
    h.c0 = gauge_correct(f.v0, g.v0, identity_morphism(c.Y, f.m()), c.yeta, go);
    for (int mu : c.Y->index) principal_log_unitary(f.u.u[mu].adjoint() * g.u.u[mu]);
    return h;
}

// X with k prism layers over Y glued at level 0; every simplex of Y spans a join with its
// copy one level up. The new pair is (M_k, Y x {k}).
struct CylinderModel {
    std::shared_ptr<const Complex> base;
    std::shared_ptr<const Complex> K;
    int layers = 0;
    std::vector<int> ypos; // vertex -> position in Y or -1

    int vid(int y, int level) const {
        if (level == 0) return y;
        return base->n_vertices + (level - 1) * static_cast<int>(base->y_vertices.size()) + ypos[y];
    }
    Simplex lift(const Simplex& s, int level) const {
        Simplex r;
        for (int v : s) r.push_back(vid(v, level));
        std::sort(r.begin(), r.end());
        return r;
    }
};

inline CylinderModel build_cylinder(std::shared_ptr<const Complex> base, int k) {
    if (k < 1) throw Error(ErrorKind::NotCylinder, "at least one layer is needed");
    CylinderModel m;
    m.base = base;
    m.layers = k;
    m.ypos.assign(base->n_vertices, -1);
    for (size_t i = 0; i < base->y_vertices.size(); ++i) m.ypos[base->y_vertices[i]] = static_cast<int>(i);
    const int ny = static_cast<int>(base->y_vertices.size());
    std::vector<Simplex> maxi = base->maximal();
    std::vector<Simplex> ymax;
    for (const auto& s : base->simplices) {
        if (!base->in_y(s)) continue;
        bool top = true;
        for (const auto& t : base->simplices)
            if (t.size() > s.size() && base->in_y(t) && std::includes(t.begin(), t.end(), s.begin(), s.end())) {
                top = false;
                break;
            }
        if (top) ymax.push_back(s);
    }
    for (int l = 0; l < k; ++l)
        for (const auto& s : ymax) {
            Simplex a = m.lift(s, l), b = m.lift(s, l + 1);
            a.insert(a.end(), b.begin(), b.end());
            maxi.push_back(a);
        }
    std::vector<int> top_y;
    for (int y : base->y_vertices) top_y.push_back(m.vid(y, k));
    m.K = make_complex(base->n_vertices + k * ny, maxi, top_y, m.vid(base->basepoint, k));
    return m;
}

// Flatten a relative bundle (v, w, u) on the k-layer cylinder to a stably relative bundle on
// (X, Y) whose stabilizer collects the 2k level slices.
inline RelativeBundle cylinder_flatten(const CylinderModel& cm, const Cocycle& v, const Cocycle& w,
                                       const Morphism& u, const PairContext& c) {
    if (v.cover->K != cm.K || w.cover->K != cm.K)
        throw Error(ErrorKind::NotCylinder, "cocycles do not live on the cylinder model");
    if (u.cover->K != cm.K) throw Error(ErrorKind::NotCylinder, "morphism not on the far end");
    const Complex& M = *cm.K;
    const int n = v.dim, k = cm.layers;
    auto on_x = [&](const Cocycle& z) {
        return make_cocycle(c.X, n, [&](int a, int b, int sid) {
            return z.at(a, b, M.id((*c.K)[sid]));
        });
    };
    auto slice = [&](const Cocycle& z, int l) {
        return make_cocycle(c.Y, n, [&](int a, int b, int sid) {
            return z.at(cm.vid(a, l), cm.vid(b, l), M.id(cm.lift((*c.K)[sid], l)));
        });
    };
    auto vertical = [&](int mu, int l) {
        int a = cm.vid(mu, l), b = cm.vid(mu, l + 1);
        return M.id({std::min(a, b), std::max(a, b)});
    };
    RelativeBundle r;
    r.v1 = on_x(v);
    r.v2 = on_x(w);
    r.v0 = identity_cocycle(c.Y, 0);
    for (int l = 1; l <= k; ++l) r.v0 = direct_sum(r.v0, slice(v, l));
    for (int l = k; l >= 1; --l) r.v0 = direct_sum(r.v0, slice(w, l));
    r.u = Morphism{c.Y, std::vector<Mat>(c.K->n_vertices)};
    for (int mu : c.Y->index) {
        std::vector<Mat> ul(2 * k + 1);
        for (int l = 0; l < k; ++l)
            ul[l] = v.at(cm.vid(mu, l + 1), cm.vid(mu, l), vertical(mu, l));
        ul[k] = u.u[cm.vid(mu, k)];
        for (int l = k + 1; l <= 2 * k; ++l) {
            int j = 2 * k - l;
            ul[l] = w.at(cm.vid(mu, j), cm.vid(mu, j + 1), vertical(mu, j));
        }
        Mat big = Mat::Zero((2 * k + 1) * n, (2 * k + 1) * n);
        big.block(0, 2 * k * n, n, n) = ul[2 * k];
        for (int l = 1; l <= 2 * k; ++l) big.block(l * n, (l - 1) * n, n, n) = ul[l - 1];
        r.u.u[mu] = big;
    }
    return r;
}

// pullback of a cocycle on X along the retraction of the cylinder
inline Cocycle cylinder_pullback(const CylinderModel& cm, const Cocycle& v,
                                 std::shared_ptr<const StarCover> cover) {
    const Complex& M = *cm.K;
    std::vector<int> q(M.n_vertices);
    for (int x = 0; x < cm.base->n_vertices; ++x) {
        q[x] = x;
        if (cm.ypos[x] >= 0)
            for (int l = 1; l <= cm.layers; ++l) q[cm.vid(x, l)] = x;
    }
    return make_cocycle(cover, v.dim, [&](int a, int b, int sid) {
        if (q[a] == q[b]) return identity(v.dim);
        Simplex s;
        for (int x : M[sid]) s.push_back(q[x]);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        return v.at(q[a], q[b], cm.base->id(s));
    });
}

}  // namespace af
