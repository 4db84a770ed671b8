#pragma once

#include "almostflat/simplicial.hpp"

#include <functional>
#include <random>

namespace af {

// Transition values v_ab(x) for a<b at every sample x of the pair; v_ab maps b-coordinates to
// a-coordinates, v_ba = v_ab^*, v_aa = 1.
struct Cocycle {
    std::shared_ptr<const StarCover> cover;
    int dim = 0;
    std::vector<std::vector<Mat>> vals;

    Mat at(int a, int b, int sid) const {
        if (a == b) return identity(dim);
        int e = cover->edge_id(a, b);
        if (e < 0) throw Error(ErrorKind::InvalidArgument, "pair is not an edge of the nerve");
        int p = cover->sample_pos(e, sid);
        if (p < 0) throw Error(ErrorKind::InvalidArgument, "sample is not in the overlap");
        return a < b ? vals[e][p] : Mat(vals[e][p].adjoint());
    }
};

// constant unitaries per index, u: v1 -> v2 when u_a v1_ab u_b^* ~ v2_ab
struct Morphism {
    std::shared_ptr<const StarCover> cover;
    std::vector<Mat> u; // per vertex; empty when inactive
};

// morphism values depending on the sample point
struct FieldMorphism {
    std::shared_ptr<const StarCover> cover;
    std::vector<std::vector<Mat>> u; // per vertex, aligned with vertex_samples

    const Mat& at(int mu, int sid) const {
        int p = cover->vertex_sample_pos(mu, sid);
        if (p < 0) throw Error(ErrorKind::InvalidArgument, "sample is not in the set");
        return u[mu][p];
    }
};

// square roots of a partition of unity, evaluated at samples; aligned with cover->local
struct PartitionRoot {
    std::vector<std::vector<double>> w;
};

// values on nerve edges, constant on overlaps
struct EdgeFamily {
    std::shared_ptr<const StarCover> cover;
    int dim = 0;
    std::vector<Mat> val; // per edge id, a<b
    Mat at(int a, int b) const {
        if (a == b) return identity(dim);
        int e = cover->edge_id(a, b);
        if (e < 0) throw Error(ErrorKind::InvalidArgument, "pair is not an edge of the nerve");
        return a < b ? val[e] : Mat(val[e].adjoint());
    }
};

inline PartitionRoot uniform_partition(const StarCover& c) {
    PartitionRoot p;
    p.w.resize(c.K->size());
    for (int s = 0; s < c.K->size(); ++s) {
        const auto k = c.local[s].size();
        p.w[s].assign(k, k ? 1.0 / std::sqrt(static_cast<double>(k)) : 0.0);
    }
    return p;
}

inline PartitionRoot random_partition(const StarCover& c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(0.2, 1.0);
    PartitionRoot p;
    p.w.resize(c.K->size());
    for (int s = 0; s < c.K->size(); ++s) {
        auto& w = p.w[s];
        w.resize(c.local[s].size());
        double n2 = 0;
        for (auto& x : w) {
            x = d(rng);
            n2 += x * x;
        }
        for (auto& x : w) x /= std::sqrt(n2);
    }
    return p;
}

template <class F>
Cocycle make_cocycle(std::shared_ptr<const StarCover> c, int dim, F f) {
    Cocycle v{c, dim, {}};
    v.vals.resize(c->n_edges());
    for (int e = 0; e < c->n_edges(); ++e) {
        auto [a, b] = c->edges[e];
        for (int sid : c->edge_samples[e]) v.vals[e].push_back(f(a, b, sid));
    }
    return v;
}

inline Cocycle identity_cocycle(std::shared_ptr<const StarCover> c, int dim) {
    return make_cocycle(c, dim, [dim](int, int, int) { return identity(dim); });
}

// values of v on a cover whose overlaps and samples are contained in those of v
inline Cocycle restrict_to(const Cocycle& v, std::shared_ptr<const StarCover> c) {
    return make_cocycle(c, v.dim, [&](int a, int b, int sid) { return v.at(a, b, sid); });
}

inline double flatness(const Cocycle& v) {
    double m = 0;
    for (const auto& vs : v.vals)
        for (size_t i = 0; i < vs.size(); ++i)
            for (size_t j = i + 1; j < vs.size(); ++j) m = std::max(m, op_norm(vs[i] - vs[j]));
    return m;
}

inline double unitarity_defect(const Cocycle& v) {
    double m = 0;
    for (const auto& vs : v.vals)
        for (const auto& x : vs) m = std::max(m, unitarity_defect(x));
    return m;
}

// max |v_ab v_bc - v_ac| at common samples
inline double cocycle_residual(const Cocycle& v) {
    const StarCover& c = *v.cover;
    double m = 0;
    for (int sid = 0; sid < c.K->size(); ++sid) {
        const auto& L = c.local[sid];
        if (!c.admissible[sid] || L.size() < 3) continue;
        for (size_t i = 0; i < L.size(); ++i)
            for (size_t j = i + 1; j < L.size(); ++j)
                for (size_t l = j + 1; l < L.size(); ++l)
                    m = std::max(m, op_norm(v.at(L[i], L[j], sid) * v.at(L[j], L[l], sid) -
                                            v.at(L[i], L[l], sid)));
    }
    return m;
}

// max over nerve triangles and independent sample choices of |v_ab(x) v_bc(y) - v_ac(z)|
inline double triangle_defect(const Cocycle& v) {
    const StarCover& c = *v.cover;
    double m = 0;
    for (const auto& t : c.triangles) {
        int eab = c.edge_id(t[0], t[1]), ebc = c.edge_id(t[1], t[2]), eac = c.edge_id(t[0], t[2]);
        for (const auto& x : v.vals[eab])
            for (const auto& y : v.vals[ebc]) {
                Mat xy = x * y;
                for (const auto& z : v.vals[eac]) m = std::max(m, op_norm(xy - z));
            }
    }
    return m;
}

// the same quantity at the basepoint samples of a tree
inline double triangle_defect(const Cocycle& v, const NerveTree& t) {
    const StarCover& c = *v.cover;
    auto at = [&](int a, int b) { return v.at(a, b, t.base_sample[c.edge_id(a, b)]); };
    double m = 0;
    for (const auto& x : c.triangles)
        m = std::max(m, op_norm(at(x[0], x[1]) * at(x[1], x[2]) - at(x[0], x[2])));
    return m;
}

inline double distance(const Cocycle& v, const Cocycle& w) {
    if (v.dim != w.dim) throw Error(ErrorKind::DimMismatch, "cocycle ranks differ");
    double m = 0;
    for (size_t e = 0; e < v.vals.size(); ++e)
        for (size_t p = 0; p < v.vals[e].size(); ++p)
            m = std::max(m, op_norm(v.vals[e][p] - w.vals[e][p]));
    return m;
}

inline double distance(const Morphism& a, const Morphism& b) {
    double m = 0;
    for (size_t i = 0; i < a.u.size(); ++i)
        if (a.u[i].size() && b.u[i].size()) m = std::max(m, op_norm(a.u[i] - b.u[i]));
    return m;
}

inline double distance(const FieldMorphism& a, const FieldMorphism& b) {
    double m = 0;
    for (size_t i = 0; i < a.u.size(); ++i)
        for (size_t p = 0; p < a.u[i].size(); ++p) m = std::max(m, op_norm(a.u[i][p] - b.u[i][p]));
    return m;
}

inline double distance(const FieldMorphism& a, const Morphism& b) {
    double m = 0;
    for (size_t i = 0; i < a.u.size(); ++i)
        for (size_t p = 0; p < a.u[i].size(); ++p) m = std::max(m, op_norm(a.u[i][p] - b.u[i]));
    return m;
}

inline Morphism identity_morphism(std::shared_ptr<const StarCover> c, int dim) {
    Morphism m{c, std::vector<Mat>(c->K->n_vertices)};
    for (int v : c->index) m.u[v] = identity(dim);
    return m;
}

inline Morphism adjoint(const Morphism& u) {
    Morphism r = u;
    for (auto& x : r.u) x = x.adjoint().eval();
    return r;
}

// (a after b)
inline Morphism compose(const Morphism& a, const Morphism& b) {
    Morphism r = a;
    for (size_t i = 0; i < r.u.size(); ++i)
        if (a.u[i].size()) r.u[i] = a.u[i] * b.u[i];
    return r;
}

inline Cocycle unitary_act(const Morphism& u, const Cocycle& v) {
    int dim = v.dim;
    for (int i : v.cover->index) dim = static_cast<int>(u.u[i].rows());
    return make_cocycle(v.cover, dim, [&](int a, int b, int sid) {
        return Mat(u.u[a] * v.at(a, b, sid) * u.u[b].adjoint());
    });
}

inline double hom_defect(const Cocycle& v1, const Cocycle& v2, const Morphism& u) {
    double m = 0;
    const StarCover& c = *v1.cover;
    for (int e = 0; e < c.n_edges(); ++e) {
        auto [a, b] = c.edges[e];
        for (size_t p = 0; p < c.edge_samples[e].size(); ++p)
            m = std::max(m, op_norm(u.u[a] * v1.vals[e][p] * u.u[b].adjoint() - v2.vals[e][p]));
    }
    return m;
}

inline double hom_defect(const Cocycle& v1, const Cocycle& v2, const FieldMorphism& u) {
    double m = 0;
    const StarCover& c = *v1.cover;
    for (int e = 0; e < c.n_edges(); ++e) {
        auto [a, b] = c.edges[e];
        for (size_t p = 0; p < c.edge_samples[e].size(); ++p) {
            int sid = c.edge_samples[e][p];
            m = std::max(m, op_norm(u.at(a, sid) * v1.vals[e][p] * u.at(b, sid).adjoint() -
                                    v2.vals[e][p]));
        }
    }
    return m;
}

inline Cocycle direct_sum(const Cocycle& a, const Cocycle& b) {
    return make_cocycle(a.cover, a.dim + b.dim, [&](int x, int y, int sid) {
        return direct_sum(a.at(x, y, sid), b.at(x, y, sid));
    });
}

inline Morphism direct_sum(const Morphism& a, const Morphism& b) {
    Morphism r = a;
    for (size_t i = 0; i < r.u.size(); ++i)
        if (a.u[i].size() || b.u[i].size()) r.u[i] = direct_sum(a.u[i], b.u[i]);
    return r;
}

// Frame of a cocycle at one sample: the projection p and the isometries psi_mu, mu in local list.
struct Frame {
    Mat p;
    std::vector<Mat> psi;
};

inline Frame frame_at(const Cocycle& v, const PartitionRoot& eta, int sid) {
    const auto& L = v.cover->local[sid];
    const auto& w = eta.w[sid];
    const int k = static_cast<int>(L.size()), n = v.dim;
    Frame f;
    f.p = Mat::Zero(k * n, k * n);
    f.psi.assign(k, Mat::Zero(k * n, n));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Mat vij = v.at(L[i], L[j], sid);
            f.p.block(i * n, j * n, n, n) = w[i] * w[j] * vij;
            f.psi[j].block(i * n, 0, n, n) = w[i] * vij;
        }
    return f;
}

struct GaugeOptions {
    bool strict = true;
};

// exact threshold on the intertwining defect for the gauge correction
inline double gauge_threshold(const StarCover& c) {
    double n = c.n_index();
    return 1.0 / (3.0 * (n * n + 1.0));
}

// Gauge correction of an approximate morphism u: v1 -> v2 between exact cocycles.
// Output satisfies ubar_a(x) v1_ab(x) ubar_b(x)^* = v2_ab(x) and equals u at the centre of each star.
inline FieldMorphism gauge_correct(const Cocycle& v1, const Cocycle& v2, const Morphism& u,
                                   const PartitionRoot& eta, GaugeOptions opt = {},
                                   const NumericPolicy& pol = default_policy()) {
    if (v1.dim != v2.dim) throw Error(ErrorKind::DimMismatch, "cocycle ranks differ");
    const StarCover& c = *v1.cover;
    if (opt.strict) {
        double eps = std::max({flatness(v1), flatness(v2), hom_defect(v1, v2, u)});
        double thr = gauge_threshold(c);
        if (!(eps < thr))
            throw Error(ErrorKind::EpsilonTooLarge, "intertwining defect " + std::to_string(eps) +
                                                        " not below " + std::to_string(thr));
    }
    const int n = v1.dim;
    FieldMorphism out{v1.cover, std::vector<std::vector<Mat>>(c.K->n_vertices)};
    for (int mu : c.index) out.u[mu].assign(c.vertex_samples[mu].size(), Mat(n, n));
    if (n == 0) return out;
    Cocycle v1u = unitary_act(u, v1);
    for (int sid = 0; sid < c.K->size(); ++sid) {
        if (!c.admissible[sid]) continue;
        const auto& L = c.local[sid];
        const int k = static_cast<int>(L.size());
        if (k == 0) continue;
        if (k == 1) {
            out.u[L[0]][c.vertex_sample_pos(L[0], sid)] = u.u[L[0]];
            continue;
        }
        Frame f1 = frame_at(v1u, eta, sid), f2 = frame_at(v2, eta, sid);
        Mat m = f1.p * f2.p * f1.p;
        m = (m + m.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Mat> es(m);
        const int N = k * n;
        double lam = es.eigenvalues()(N - n);
        if (!(lam > pol.singularity_tol))
            throw Error(ErrorKind::SingularPolar,
                        "projections too far apart (eigenvalue " + std::to_string(lam) + ")");
        Mat E = es.eigenvectors().rightCols(n);
        Eigen::VectorXd d = es.eigenvalues().tail(n).array().rsqrt();
        Mat r = E * d.cast<cd>().asDiagonal() * E.adjoint();
        Mat w = f2.p * f1.p * r;
        for (int i = 0; i < k; ++i) {
            int mu = L[i];
            out.u[mu][c.vertex_sample_pos(mu, sid)] = f2.psi[i].adjoint() * w * f1.psi[i] * u.u[mu];
        }
    }
    return out;
}

// s -> ua exp(s log(ua^* ub)) for two exact morphisms with the same ends
inline FieldMorphism gauge_homotopy(const FieldMorphism& ua, const FieldMorphism& ub, double s,
                                    const NumericPolicy& pol = default_policy()) {
    FieldMorphism r = ua;
    for (size_t i = 0; i < ua.u.size(); ++i)
        for (size_t p = 0; p < ua.u[i].size(); ++p) {
            Mat l = principal_log_unitary(ua.u[i][p].adjoint() * ub.u[i][p], pol);
            r.u[i][p] = ua.u[i][p] * exp_skew(s * l, pol);
        }
    return r;
}

// gauge making v the identity at the basepoint samples of tree edges
inline Morphism normalize_tree(const Cocycle& v, const NerveTree& t) {
    const StarCover& c = *v.cover;
    Morphism u{v.cover, std::vector<Mat>(c.K->n_vertices)};
    for (int x : t.order) {
        if (x == t.base) {
            u.u[x] = identity(v.dim);
            continue;
        }
        int p = t.parent[x];
        int e = c.edge_id(p, x);
        u.u[x] = u.u[p] * v.at(p, x, t.base_sample[e]);
    }
    return u;
}

struct Trivialization {
    Morphism u;   // in Hom(1, v)
    int max_fill = 0;
    double bound = 0;
};

// products of transition values along tree paths
inline Trivialization trivialize(const Cocycle& v, const NerveTree& t) {
    FillTable ft = fill_loops(t);
    if (!ft.all_fillable())
        throw Error(ErrorKind::NotSimplyConnected, "nerve has an unfillable generator loop");
    const StarCover& c = *v.cover;
    Trivialization tr;
    tr.u = Morphism{v.cover, std::vector<Mat>(c.K->n_vertices)};
    for (int x : t.order) {
        if (x == t.base) {
            tr.u.u[x] = identity(v.dim);
            continue;
        }
        int p = t.parent[x];
        tr.u.u[x] = v.at(x, p, t.base_sample[c.edge_id(p, x)]) * tr.u.u[p];
    }
    tr.max_fill = ft.max_count();
    tr.bound = 3.0 * std::max(1, tr.max_fill) * flatness(v);
    return tr;
}

struct PolarOptions {
    bool strict = true;
};

// max over nerve triangles of |w_ab w_bc - w_ac|
inline double triangle_defect(const EdgeFamily& w) {
    double m = 0;
    for (const auto& t : w.cover->triangles)
        m = std::max(m, op_norm(w.at(t[0], t[1]) * w.at(t[1], t[2]) - w.at(t[0], t[2])));
    return m;
}

// Exact cocycle near an almost multiplicative edge family. The frames of w at a sample are
// compressed to the dominant rank-n eigenspace of their averaged projection and polar-normalized.
inline Cocycle polar_round(const EdgeFamily& w, const PartitionRoot& eta, PolarOptions opt = {},
                           const NumericPolicy& pol = default_policy()) {
    if (opt.strict) {
        double eps = triangle_defect(w);
        if (!(eps < 0.5))
            throw Error(ErrorKind::EpsilonTooLarge,
                        "triangle defect " + std::to_string(eps) + " not below 1/2");
    }
    const StarCover& c = *w.cover;
    const int n = w.dim;
    if (n == 0) return identity_cocycle(w.cover, 0);
    std::vector<std::vector<Mat>> phi(c.K->size());
    for (int sid : c.multi_samples()) {
        const auto& L = c.local[sid];
        const auto& eta_s = eta.w[sid];
        const int k = static_cast<int>(L.size());
        std::vector<Mat> psi(k, Mat::Zero(k * n, n));
        Mat g = Mat::Zero(k * n, k * n);
        for (int j = 0; j < k; ++j) {
            for (int i = 0; i < k; ++i) psi[j].block(i * n, 0, n, n) = eta_s[i] * w.at(L[i], L[j]);
            g += eta_s[j] * eta_s[j] * psi[j] * psi[j].adjoint();
        }
        g = (g + g.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Mat> es(g);
        Mat E = es.eigenvectors().rightCols(n);
        for (int j = 0; j < k; ++j) phi[sid].push_back(polar_unitary(E.adjoint() * psi[j], pol));
    }
    return make_cocycle(w.cover, n, [&](int a, int b, int sid) {
        const auto& L = c.local[sid];
        auto ia = std::lower_bound(L.begin(), L.end(), a) - L.begin();
        auto ib = std::lower_bound(L.begin(), L.end(), b) - L.begin();
        return Mat(phi[sid][ia].adjoint() * phi[sid][ib]);
    });
}

struct Extension {
    Cocycle v;                       // on the full cover
    double c3 = 0;                   // 2 max C1 C2 over the added sets
    std::vector<int> added;
    std::map<int, FieldMorphism> local; // per added vertex, exact trivialization on its star
};

// Extend a cocycle given on the stars of J to the full star cover.
inline Extension extend_subcover(const Cocycle& v, std::shared_ptr<const StarCover> full,
                                 GaugeOptions opt = {}) {
    const StarCover& sub = *v.cover;
    const Complex& K = *full->K;
    for (int sid : full->multi_samples()) {
        const auto& S = K[sid];
        if (std::none_of(S.begin(), S.end(), [&](int x) { return sub.active[x] != 0; }))
            throw Error(ErrorKind::CannotExtend, "the subcover misses a sample point");
    }
    Extension ext;
    const int n = v.dim;
    for (int sigma : full->index) {
        if (sub.active[sigma]) continue;
        auto lc = local_cover(full->K, sub.index, sigma);
        if (lc->index.empty()) throw Error(ErrorKind::CannotExtend, "isolated added star");
        NerveTree t;
        try {
            t = build_tree(lc, lc->index.front());
        } catch (const Error& e) {
            throw Error(ErrorKind::CannotExtend, std::string("local nerve: ") + e.what());
        }
        FillTable ft = fill_loops(t);
        if (!ft.all_fillable())
            throw Error(ErrorKind::CannotExtend,
                        "local nerve at vertex " + std::to_string(sigma) + " is not fillable");
        Cocycle vs = restrict_to(v, lc);
        Trivialization tr = trivialize(vs, t);
        ext.local.emplace(sigma, gauge_correct(identity_cocycle(lc, n), vs, tr.u,
                                               uniform_partition(*lc), opt));
        double i = lc->n_index();
        ext.c3 = std::max(ext.c3, 2.0 * (i * i + 1.0) * 3.0 * std::max(1, ft.max_count()));
        ext.added.push_back(sigma);
    }
    ext.v = make_cocycle(full, n, [&](int a, int b, int sid) -> Mat {
        bool ia = sub.active[a], ib = sub.active[b];
        if (ia && ib) return v.at(a, b, sid);
        if (ia) return ext.local.at(b).at(a, sid);
        if (ib) return ext.local.at(a).at(b, sid).adjoint();
        int rho = -1;
        for (int x : K[sid])
            if (sub.active[x]) {
                rho = x;
                break;
            }
        return ext.local.at(a).at(rho, sid).adjoint() * ext.local.at(b).at(rho, sid);
    });
    return ext;
}

// extend u: v -> v' from J using the extended cocycles
inline Morphism extend_morphism(const Cocycle& vt, const Cocycle& vt2, const Morphism& u,
                                const StarCover& sub) {
    const StarCover& full = *vt.cover;
    Morphism r{vt.cover, std::vector<Mat>(full.K->n_vertices)};
    for (int mu : full.index) {
        if (sub.active[mu]) {
            r.u[mu] = u.u[mu];
            continue;
        }
        int rho = -1;
        for (int x : sub.index)
            if (full.edge_id(mu, x) >= 0) {
                rho = x;
                break;
            }
        if (rho < 0) throw Error(ErrorKind::CannotExtend, "added star meets no star of J");
        int sid = full.edge_samples[full.edge_id(mu, rho)].front();
        r.u[mu] = vt2.at(mu, rho, sid) * u.u[rho] * vt.at(mu, rho, sid).adjoint();
    }
    return r;
}

}  // namespace af
