#pragma once

#include "almostflat/matcore.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace af {

using Simplex = std::vector<int>;

// Finite simplicial complex with a distinguished full subcomplex Y and a basepoint in Y.
// Simplices are stored with all faces, sorted lexicographically; a simplex id is its rank.
struct Complex {
    int n_vertices = 0;
    std::vector<Simplex> simplices;
    std::map<Simplex, int> ids;
    std::vector<int> y_vertices;
    std::vector<char> in_y_vertex;
    int basepoint = 0;

    int id(const Simplex& s) const {
        auto it = ids.find(s);
        return it == ids.end() ? -1 : it->second;
    }
    bool contains(const Simplex& s) const { return ids.count(s) > 0; }
    const Simplex& operator[](int i) const { return simplices[i]; }
    int size() const { return static_cast<int>(simplices.size()); }

    int dim() const {
        int d = -1;
        for (const auto& s : simplices) d = std::max(d, static_cast<int>(s.size()) - 1);
        return d;
    }
    bool in_y(const Simplex& s) const {
        return std::all_of(s.begin(), s.end(), [&](int v) { return in_y_vertex[v] != 0; });
    }
    int euler() const {
        int e = 0;
        for (const auto& s : simplices) e += (s.size() % 2 == 1) ? 1 : -1;
        return e;
    }
    int euler_y() const {
        int e = 0;
        for (const auto& s : simplices)
            if (in_y(s)) e += (s.size() % 2 == 1) ? 1 : -1;
        return e;
    }
    std::vector<Simplex> maximal() const {
        std::vector<Simplex> out;
        for (const auto& s : simplices) {
            bool top = true;
            for (const auto& t : simplices)
                if (t.size() > s.size() && std::includes(t.begin(), t.end(), s.begin(), s.end())) {
                    top = false;
                    break;
                }
            if (top) out.push_back(s);
        }
        return out;
    }
};

namespace detail {

inline bool connected(int n, const std::vector<char>& active,
                      const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges)
        if (active[a] && active[b]) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
    int start = -1, count = 0;
    for (int v = 0; v < n; ++v)
        if (active[v]) {
            if (start < 0) start = v;
            ++count;
        }
    if (start < 0) return true;
    std::vector<char> seen(n, 0);
    std::deque<int> q{start};
    seen[start] = 1;
    int reached = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                q.push_back(w);
            }
    }
    return reached == count;
}

}  // namespace detail

inline std::shared_ptr<Complex> make_complex(int n_vertices, std::vector<Simplex> maximal,
                                             std::vector<int> y_vertices, int basepoint) {
    auto k = std::make_shared<Complex>();
    k->n_vertices = n_vertices;
    std::set<Simplex> all;
    for (auto s : maximal) {
        std::sort(s.begin(), s.end());
        if (s.empty() || std::adjacent_find(s.begin(), s.end()) != s.end())
            throw Error(ErrorKind::InvalidArgument, "simplex with repeated or no vertices");
        for (int v : s)
            if (v < 0 || v >= n_vertices)
                throw Error(ErrorKind::InvalidArgument, "vertex id out of range");
        const int m = static_cast<int>(s.size());
        if (m > 20) throw Error(ErrorKind::InvalidArgument, "simplex dimension too large");
        for (unsigned mask = 1; mask < (1u << m); ++mask) {
            Simplex f;
            for (int i = 0; i < m; ++i)
                if (mask & (1u << i)) f.push_back(s[i]);
            all.insert(f);
        }
    }
    for (int v = 0; v < n_vertices; ++v)
        if (!all.count(Simplex{v}))
            throw Error(ErrorKind::InvalidArgument, "vertex " + std::to_string(v) + " in no simplex");
    k->simplices.assign(all.begin(), all.end());
    for (int i = 0; i < k->size(); ++i) k->ids[k->simplices[i]] = i;

    std::sort(y_vertices.begin(), y_vertices.end());
    y_vertices.erase(std::unique(y_vertices.begin(), y_vertices.end()), y_vertices.end());
    k->in_y_vertex.assign(n_vertices, 0);
    for (int v : y_vertices) {
        if (v < 0 || v >= n_vertices) throw Error(ErrorKind::InvalidArgument, "Y vertex out of range");
        k->in_y_vertex[v] = 1;
    }
    k->y_vertices = y_vertices;
    if (y_vertices.empty())
        throw Error(ErrorKind::InvalidArgument, "subcomplex Y is empty");
    if (basepoint < 0 || basepoint >= n_vertices || !k->in_y_vertex[basepoint])
        throw Error(ErrorKind::BasepointNotInSubcomplex,
                    "basepoint " + std::to_string(basepoint) + " is not a vertex of Y");
    k->basepoint = basepoint;

    std::vector<std::pair<int, int>> edges;
    for (const auto& s : k->simplices)
        if (s.size() == 2) edges.emplace_back(s[0], s[1]);
    std::vector<char> all_on(n_vertices, 1);
    if (!detail::connected(n_vertices, all_on, edges))
        throw Error(ErrorKind::NotConnected, "complex is not connected");
    if (!detail::connected(n_vertices, k->in_y_vertex, edges))
        throw Error(ErrorKind::NotConnected, "subcomplex Y is not connected");
    return k;
}

// Open-star cover restricted to an index set and to admissible sample simplices.
// Sample points of an intersection of stars are the admissible simplices containing all its centres.
struct StarCover {
    std::shared_ptr<const Complex> K;
    std::vector<char> active;     // per vertex
    std::vector<char> admissible; // per simplex id
    std::vector<int> index;       // active vertices, ascending
    std::vector<std::pair<int, int>> edges;
    std::map<std::pair<int, int>, int> edge_ids;
    std::vector<std::vector<int>> edge_samples;
    std::vector<std::vector<int>> vertex_samples;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::vector<int>> local; // per simplex: active vertices it contains

    int n_index() const { return static_cast<int>(index.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }
    int edge_id(int a, int b) const {
        if (a > b) std::swap(a, b);
        auto it = edge_ids.find({a, b});
        return it == edge_ids.end() ? -1 : it->second;
    }
    int sample_pos(int e, int sid) const {
        const auto& v = edge_samples[e];
        auto it = std::lower_bound(v.begin(), v.end(), sid);
        return (it != v.end() && *it == sid) ? static_cast<int>(it - v.begin()) : -1;
    }
    int vertex_sample_pos(int mu, int sid) const {
        const auto& v = vertex_samples[mu];
        auto it = std::lower_bound(v.begin(), v.end(), sid);
        return (it != v.end() && *it == sid) ? static_cast<int>(it - v.begin()) : -1;
    }
    // sample simplices whose local vertex list has at least two entries
    std::vector<int> multi_samples() const {
        std::vector<int> out;
        for (int s = 0; s < K->size(); ++s)
            if (admissible[s] && local[s].size() >= 2) out.push_back(s);
        return out;
    }
};

template <class Pred>
std::shared_ptr<StarCover> make_cover(std::shared_ptr<const Complex> K, std::vector<char> active,
                                      Pred admissible) {
    auto c = std::make_shared<StarCover>();
    c->K = K;
    c->active = std::move(active);
    c->admissible.assign(K->size(), 0);
    c->local.assign(K->size(), {});
    for (int v = 0; v < K->n_vertices; ++v)
        if (c->active[v]) c->index.push_back(v);
    c->vertex_samples.assign(K->n_vertices, {});
    std::map<std::pair<int, int>, std::vector<int>> es;
    std::set<std::array<int, 3>> tris;
    for (int sid = 0; sid < K->size(); ++sid) {
        const Simplex& s = (*K)[sid];
        if (!admissible(s)) continue;
        c->admissible[sid] = 1;
        auto& loc = c->local[sid];
        for (int v : s)
            if (c->active[v]) loc.push_back(v);
        for (size_t i = 0; i < loc.size(); ++i) {
            c->vertex_samples[loc[i]].push_back(sid);
            for (size_t j = i + 1; j < loc.size(); ++j) {
                es[{loc[i], loc[j]}].push_back(sid);
                for (size_t l = j + 1; l < loc.size(); ++l) tris.insert({loc[i], loc[j], loc[l]});
            }
        }
    }
    for (auto& [e, samples] : es) {
        c->edge_ids[e] = static_cast<int>(c->edges.size());
        c->edges.push_back(e);
        c->edge_samples.push_back(samples);
    }
    c->triangles.assign(tris.begin(), tris.end());
    return c;
}

inline std::shared_ptr<StarCover> star_cover(std::shared_ptr<const Complex> K) {
    return make_cover(K, std::vector<char>(K->n_vertices, 1), [](const Simplex&) { return true; });
}

inline std::shared_ptr<StarCover> y_cover(std::shared_ptr<const Complex> K) {
    return make_cover(K, K->in_y_vertex, [K](const Simplex& s) { return K->in_y(s); });
}

// stars of the vertices in J, sampled on all simplices
inline std::shared_ptr<StarCover> sub_cover(std::shared_ptr<const Complex> K,
                                            const std::vector<int>& J) {
    std::vector<char> act(K->n_vertices, 0);
    for (int v : J) act.at(v) = 1;
    return make_cover(K, act, [](const Simplex&) { return true; });
}

// the cover of the star of sigma by its intersections with the stars of J
inline std::shared_ptr<StarCover> local_cover(std::shared_ptr<const Complex> K,
                                              const std::vector<int>& J, int sigma) {
    std::vector<char> act(K->n_vertices, 0);
    for (int v : J)
        if (v != sigma && K->contains({std::min(v, sigma), std::max(v, sigma)})) act.at(v) = 1;
    return make_cover(K, act, [sigma](const Simplex& s) {
        return std::binary_search(s.begin(), s.end(), sigma);
    });
}

struct NerveTree {
    std::shared_ptr<const StarCover> cover;
    int base = 0;
    std::vector<int> parent;                // per vertex, -1 at base or when inactive
    std::vector<int> order;                 // BFS order
    std::vector<char> tree_edge;            // per edge id
    std::vector<int> base_sample;           // per edge id
    std::vector<std::vector<int>> path;     // base .. vertex

    bool is_tree_edge(int a, int b) const {
        int e = cover->edge_id(a, b);
        return e >= 0 && tree_edge[e];
    }
    int diameter() const {
        int d = 0;
        for (int v : order) d = std::max(d, static_cast<int>(path[v].size()) - 1);
        return 2 * d;
    }
};

// BFS spanning tree of the nerve; vertices in `first` are exhausted before the rest
inline NerveTree build_tree(std::shared_ptr<const StarCover> cover, int base,
                            const std::vector<char>& first = {}) {
    const Complex& K = *cover->K;
    if (base < 0 || base >= K.n_vertices || !cover->active[base])
        throw Error(ErrorKind::BasepointNotInSubcomplex, "basepoint is not an index of the cover");
    std::vector<char> pri = first.empty() ? std::vector<char>(K.n_vertices, 0) : first;
    if (!first.empty() && !pri[base])
        throw Error(ErrorKind::BasepointNotInSubcomplex, "basepoint outside the preferred subcomplex");

    NerveTree t;
    t.cover = cover;
    t.base = base;
    t.parent.assign(K.n_vertices, -1);
    t.path.assign(K.n_vertices, {});
    t.tree_edge.assign(cover->n_edges(), 0);
    std::vector<std::vector<int>> adj(K.n_vertices);
    for (auto [a, b] : cover->edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& l : adj) std::sort(l.begin(), l.end());

    std::vector<char> seen(K.n_vertices, 0);
    auto bfs = [&](std::deque<int> q, bool restrict) {
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : adj[v]) {
                if (seen[w] || (restrict && !pri[w])) continue;
                seen[w] = 1;
                t.parent[w] = v;
                t.order.push_back(w);
                t.tree_edge[cover->edge_id(v, w)] = 1;
                q.push_back(w);
            }
        }
    };
    seen[base] = 1;
    t.order.push_back(base);
    if (!first.empty()) bfs(std::deque<int>{base}, true);
    bfs(std::deque<int>(t.order.begin(), t.order.end()), false);
    for (int v : cover->index)
        if (!seen[v]) throw Error(ErrorKind::NotConnected, "nerve of the cover is not connected");
    for (int v : t.order) {
        t.path[v] = (v == base) ? std::vector<int>{base} : t.path[t.parent[v]];
        if (v != base) t.path[v].push_back(v);
    }

    t.base_sample.assign(cover->n_edges(), -1);
    for (int e = 0; e < cover->n_edges(); ++e) {
        auto [a, b] = cover->edges[e];
        const auto& smp = cover->edge_samples[e];
        t.base_sample[e] = smp.front();
        if (pri[a] && pri[b])
            for (int sid : smp)
                if (K.in_y(K[sid]) || first.empty()) {
                    t.base_sample[e] = sid;
                    break;
                }
    }
    return t;
}

// letters are +-(g+1) for generator g
using Word = std::vector<int>;

inline Word reduce_word(const Word& w) {
    Word out;
    for (int l : w) {
        if (!out.empty() && out.back() == -l) out.pop_back();
        else out.push_back(l);
    }
    return out;
}

inline Word inverse_word(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (int& l : out) l = -l;
    return out;
}

// one generator per non-tree edge (a<b), read as the loop base -> b -> a -> base
struct Generators {
    std::vector<int> edge_of;
    std::vector<int> gen_of_edge;
    int size() const { return static_cast<int>(edge_of.size()); }
};

inline Generators make_generators(const NerveTree& t) {
    Generators g;
    g.gen_of_edge.assign(t.cover->n_edges(), -1);
    for (int e = 0; e < t.cover->n_edges(); ++e)
        if (!t.tree_edge[e]) {
            g.gen_of_edge[e] = g.size();
            g.edge_of.push_back(e);
        }
    return g;
}

// word of the oriented edge a -> b in the generators (empty for tree edges)
inline Word edge_word(const NerveTree& t, const Generators& g, int a, int b) {
    int e = t.cover->edge_id(a, b);
    if (e < 0) throw Error(ErrorKind::InvalidArgument, "not an edge of the nerve");
    int gi = g.gen_of_edge[e];
    if (gi < 0) return {};
    return {a < b ? gi + 1 : -(gi + 1)};
}

// relator of the oriented triangle a<b<c: s_ab s_bc s_ac^-1
inline Word triangle_word(const NerveTree& t, const Generators& g, const std::array<int, 3>& tri) {
    Word w = edge_word(t, g, tri[0], tri[1]);
    Word w2 = edge_word(t, g, tri[1], tri[2]);
    Word w3 = edge_word(t, g, tri[2], tri[0]);
    w.insert(w.end(), w2.begin(), w2.end());
    w.insert(w.end(), w3.begin(), w3.end());
    return reduce_word(w);
}

struct FillStep {
    std::vector<int> path;
    std::array<int, 3> triangle;
};

// Fillings of the edge loops by triangle elimination starting from the tree.
// fills[e] lists the triangles used for edge e; unfillable edges are flagged.
struct FillTable {
    std::vector<std::vector<FillStep>> fills;
    std::vector<char> fillable;
    int max_count() const {
        size_t m = 0;
        for (size_t e = 0; e < fills.size(); ++e)
            if (fillable[e]) m = std::max(m, fills[e].size());
        return static_cast<int>(m);
    }
    bool all_fillable() const {
        return std::all_of(fillable.begin(), fillable.end(), [](char c) { return c != 0; });
    }
};

inline FillTable fill_loops(const NerveTree& t) {
    const StarCover& c = *t.cover;
    FillTable ft;
    ft.fills.assign(c.n_edges(), {});
    ft.fillable.assign(c.n_edges(), 0);
    for (int e = 0; e < c.n_edges(); ++e)
        if (t.tree_edge[e]) ft.fillable[e] = 1;
    bool progress = true;
    while (progress) {
        progress = false;
        for (const auto& tri : c.triangles) {
            int es[3] = {c.edge_id(tri[0], tri[1]), c.edge_id(tri[1], tri[2]),
                         c.edge_id(tri[0], tri[2])};
            int open = -1, n_open = 0;
            for (int e : es)
                if (!ft.fillable[e]) {
                    open = e;
                    ++n_open;
                }
            if (n_open != 1) continue;
            auto& f = ft.fills[open];
            f.push_back({t.path[tri[0]], tri});
            for (int e : es)
                if (e != open) f.insert(f.end(), ft.fills[e].begin(), ft.fills[e].end());
            ft.fillable[open] = 1;
            progress = true;
        }
    }
    return ft;
}

inline std::vector<FillStep> loop_fill(const NerveTree& t, int a, int b) {
    int e = t.cover->edge_id(a, b);
    if (e < 0) throw Error(ErrorKind::InvalidArgument, "not an edge of the nerve");
    FillTable ft = fill_loops(t);
    if (!ft.fillable[e])
        throw Error(ErrorKind::NotFillable, "no filling found for the loop through edge " +
                                                std::to_string(a) + "-" + std::to_string(b));
    return ft.fills[e];
}

inline void require_simply_connected(const NerveTree& t) {
    FillTable ft = fill_loops(t);
    if (!ft.all_fillable())
        throw Error(ErrorKind::NotSimplyConnected, "nerve has an unfillable generator loop");
}

}  // namespace af
