#pragma once

#include "almostflat/families.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>

namespace af::io {

using json = nlohmann::json;

inline constexpr int kVersion = 1;

[[noreturn]] inline void schema(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::Schema, where + ": " + what);
}

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) schema(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) schema(where, std::string("missing field '") + key + "'");
    return *it;
}

inline int int_field(const json& j, const char* key, const std::string& where) {
    const json& x = field(j, key, where);
    if (!x.is_number_integer()) schema(where + "." + key, "expected an integer");
    return x.get<int>();
}

inline std::vector<int> int_list(const json& j, const std::string& where) {
    if (!j.is_array()) schema(where, "expected an array of integers");
    std::vector<int> out;
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) schema(where + "[" + std::to_string(i) + "]", "expected an integer");
        out.push_back(j[i].get<int>());
    }
    return out;
}

inline uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string digest(const std::string& bytes) {
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << fnv1a(bytes);
    return s.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Schema, "cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline json parse(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        schema(where, e.what());
    }
}

// ---- matrices ----

inline json to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(r);
    }
    return rows;
}

inline Mat matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) schema(where, "matrix must be an array of rows");
    const int r = static_cast<int>(j.size());
    int c = -1;
    Mat m;
    for (int i = 0; i < r; ++i) {
        const json& row = j[i];
        if (!row.is_array()) schema(where, "row " + std::to_string(i) + " is not an array");
        if (c < 0) {
            c = static_cast<int>(row.size());
            m.resize(r, c);
        }
        if (static_cast<int>(row.size()) != c) schema(where, "ragged matrix");
        for (int k = 0; k < c; ++k) {
            const json& z = row[k];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                schema(where, "entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not [re, im]");
            double re = z[0].get<double>(), im = z[1].get<double>();
            if (!std::isfinite(re) || !std::isfinite(im)) schema(where, "non-finite entry");
            m(i, k) = cd(re, im);
        }
    }
    if (r == 0) m.resize(0, 0);
    return m;
}

inline Mat unitary_from_json(const json& j, int dim, const std::string& where,
                             const NumericPolicy& pol = default_policy()) {
    Mat m = matrix_from_json(j, where);
    if (m.rows() != dim || m.cols() != dim)
        schema(where, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    double d = unitarity_defect(m);
    if (!(d <= std::max(pol.unitarity_tol, 1e-9)))
        schema(where, "matrix is not unitary (defect " + std::to_string(d) + ")");
    return m;
}

// ---- documents ----

inline json document(const std::string& kind, json payload) {
    return json{{"kind", kind}, {"version", kVersion}, {"payload", std::move(payload)}};
}

inline const json& payload_of(const json& doc, const std::string& kind, const std::string& where) {
    const json& k = field(doc, "kind", where);
    if (!k.is_string() || k.get<std::string>() != kind)
        schema(where + ".kind", "expected '" + kind + "'");
    if (int_field(doc, "version", where) != kVersion) schema(where + ".version", "unsupported version");
    return field(doc, "payload", where);
}

inline std::string kind_of(const json& doc, const std::string& where) {
    const json& k = field(doc, "kind", where);
    if (!k.is_string()) schema(where + ".kind", "expected a string");
    return k.get<std::string>();
}

inline json complex_payload(const Complex& K) {
    json maxi = json::array();
    for (const auto& s : K.maximal()) maxi.push_back(s);
    return json{{"n_vertices", K.n_vertices},
                {"maximal", maxi},
                {"y_vertices", K.y_vertices},
                {"basepoint", K.basepoint}};
}

inline std::shared_ptr<const Complex> complex_from_payload(const json& p, const std::string& where) {
    int n = int_field(p, "n_vertices", where);
    const json& mx = field(p, "maximal", where);
    if (!mx.is_array()) schema(where + ".maximal", "expected an array");
    std::vector<Simplex> maxi;
    for (size_t i = 0; i < mx.size(); ++i) maxi.push_back(int_list(mx[i], where + ".maximal[" + std::to_string(i) + "]"));
    auto y = int_list(field(p, "y_vertices", where), where + ".y_vertices");
    int base = int_field(p, "basepoint", where);
    return make_complex(n, maxi, y, base);
}

// inline payload, complex document, or path to a complex document
inline std::shared_ptr<const Complex> complex_ref(const json& j, const std::string& where,
                                                  const std::string& dir = ".") {
    if (j.is_string()) {
        std::string path = j.get<std::string>();
        if (!path.empty() && path[0] != '/') path = dir + "/" + path;
        json doc = parse(read_file(path), path);
        return complex_from_payload(payload_of(doc, "complex", path), path + ".payload");
    }
    if (j.is_object() && j.contains("kind")) return complex_from_payload(payload_of(j, "complex", where), where + ".payload");
    return complex_from_payload(j, where);
}

inline json records(const Cocycle& v) {
    json out = json::array();
    const StarCover& c = *v.cover;
    for (int e = 0; e < c.n_edges(); ++e) {
        auto [a, b] = c.edges[e];
        for (size_t p = 0; p < c.edge_samples[e].size(); ++p)
            out.push_back(json{{"mu", a}, {"nu", b}, {"sample", (*c.K)[c.edge_samples[e][p]]},
                               {"matrix", to_json(v.vals[e][p])}});
    }
    return out;
}

inline Cocycle cocycle_from_records(const json& recs, std::shared_ptr<const StarCover> c, int dim,
                                    const std::string& where) {
    Cocycle v = identity_cocycle(c, dim);
    if (!recs.is_array()) schema(where, "expected an array of records");
    for (size_t i = 0; i < recs.size(); ++i) {
        std::string w = where + "[" + std::to_string(i) + "]";
        const json& r = recs[i];
        int a = int_field(r, "mu", w), b = int_field(r, "nu", w);
        Simplex s = int_list(field(r, "sample", w), w + ".sample");
        std::sort(s.begin(), s.end());
        int e = c->edge_id(a, b);
        if (a == b || e < 0) schema(w, "(mu, nu) is not an overlap of the cover");
        int sid = c->K->id(s);
        int p = sid < 0 ? -1 : c->sample_pos(e, sid);
        if (p < 0) schema(w + ".sample", "not a sample of the overlap");
        Mat m = unitary_from_json(field(r, "matrix", w), dim, w + ".matrix");
        v.vals[e][p] = a < b ? m : Mat(m.adjoint());
    }
    return v;
}

inline json morphism_records(const Morphism& u) {
    json out = json::array();
    for (int mu : u.cover->index) out.push_back(json{{"mu", mu}, {"matrix", to_json(u.u[mu])}});
    return out;
}

inline Morphism morphism_from_records(const json& recs, std::shared_ptr<const StarCover> c, int dim,
                                      const std::string& where) {
    Morphism u = identity_morphism(c, dim);
    if (!recs.is_array()) schema(where, "expected an array of records");
    for (size_t i = 0; i < recs.size(); ++i) {
        std::string w = where + "[" + std::to_string(i) + "]";
        int mu = int_field(recs[i], "mu", w);
        if (mu < 0 || mu >= c->K->n_vertices || !c->active[mu]) schema(w + ".mu", "not an index of the cover");
        u.u[mu] = unitary_from_json(field(recs[i], "matrix", w), dim, w + ".matrix");
    }
    return u;
}

inline json cocycle_doc(const Cocycle& v, bool on_y = false) {
    return document("cocycle", json{{"complex", complex_payload(*v.cover->K)},
                                    {"cover", on_y ? "y" : "star"},
                                    {"fiber_dim", v.dim},
                                    {"records", records(v)}});
}

inline Cocycle cocycle_from_doc(const json& doc, const std::string& where, const std::string& dir = ".") {
    const json& p = payload_of(doc, "cocycle", where);
    auto K = complex_ref(field(p, "complex", where), where + ".complex", dir);
    std::string cov = p.value("cover", "star");
    if (cov != "star" && cov != "y") schema(where + ".cover", "expected 'star' or 'y'");
    auto c = cov == "y" ? y_cover(K) : star_cover(K);
    int n = int_field(p, "fiber_dim", where);
    if (n < 0) schema(where + ".fiber_dim", "negative");
    return cocycle_from_records(field(p, "records", where), c, n, where + ".records");
}

inline json bundle_doc(const RelativeBundle& f) {
    return document("relative_bundle", json{{"complex", complex_payload(*f.v1.cover->K)},
                                            {"n", f.n()},
                                            {"m", f.m()},
                                            {"v1", records(f.v1)},
                                            {"v2", records(f.v2)},
                                            {"v0", records(f.v0)},
                                            {"u", morphism_records(f.u)}});
}

struct LoadedBundle {
    PairContext ctx;
    RelativeBundle f;
};

inline LoadedBundle bundle_from_doc(const json& doc, const std::string& where, const std::string& dir = ".") {
    const json& p = payload_of(doc, "relative_bundle", where);
    auto K = complex_ref(field(p, "complex", where), where + ".complex", dir);
    LoadedBundle b{make_context(K), {}};
    int n = int_field(p, "n", where), m = int_field(p, "m", where);
    if (n < 0 || m < 0) schema(where, "negative rank");
    b.f.v1 = cocycle_from_records(field(p, "v1", where), b.ctx.X, n, where + ".v1");
    b.f.v2 = cocycle_from_records(field(p, "v2", where), b.ctx.X, n, where + ".v2");
    b.f.v0 = cocycle_from_records(field(p, "v0", where), b.ctx.Y, m, where + ".v0");
    b.f.u = morphism_from_records(field(p, "u", where), b.ctx.Y, n + m, where + ".u");
    return b;
}

// generator values keyed by the nerve edge of the generator
inline json rep_records(const QuasiRep& pi, const NerveTree& t, const Generators& g) {
    json out = json::array();
    for (int i = 0; i < g.size(); ++i) {
        auto [a, b] = t.cover->edges[g.edge_of[i]];
        out.push_back(json{{"edge", {a, b}}, {"matrix", to_json(pi.gen[i])}});
    }
    return out;
}

inline QuasiRep rep_from_records(const json& recs, const NerveTree& t, const Generators& g, int dim,
                                 const std::string& where) {
    QuasiRep pi{dim, std::vector<Mat>(g.size(), identity(dim))};
    if (!recs.is_array()) schema(where, "expected an array of records");
    for (size_t i = 0; i < recs.size(); ++i) {
        std::string w = where + "[" + std::to_string(i) + "]";
        auto e = int_list(field(recs[i], "edge", w), w + ".edge");
        if (e.size() != 2) schema(w + ".edge", "expected two vertices");
        int id = t.cover->edge_id(e[0], e[1]);
        if (id < 0 || g.gen_of_edge[id] < 0) schema(w + ".edge", "not a generator edge");
        Mat m = unitary_from_json(field(recs[i], "matrix", w), dim, w + ".matrix");
        pi.gen[g.gen_of_edge[id]] = e[0] < e[1] ? m : Mat(m.adjoint());
    }
    return pi;
}

inline json generator_list(const QuasiRep& pi) {
    json out = json::array();
    for (const auto& g : pi.gen) out.push_back(to_json(g));
    return out;
}

inline QuasiRep rep_from_list(const json& list, int dim, const std::string& where) {
    if (!list.is_array()) schema(where, "expected an array of matrices");
    QuasiRep pi{dim, {}};
    for (size_t i = 0; i < list.size(); ++i)
        pi.gen.push_back(unitary_from_json(list[i], dim, where + "[" + std::to_string(i) + "]"));
    return pi;
}

inline json relative_rep_doc(const RelativeQuasiRep& p, const PairContext& c) {
    return document("quasirep",
                    json{{"complex", complex_payload(*c.K)},
                         {"n", p.pi1.dim},
                         {"m", p.pi0.dim},
                         {"pi1", rep_records(p.pi1, c.xtree, c.xgens)},
                         {"pi2", rep_records(p.pi2, c.xtree, c.xgens)},
                         {"pi0", rep_records(p.pi0, c.ytree, c.ygens)},
                         {"u", to_json(p.u)}});
}

struct LoadedRep {
    PairContext ctx;
    RelativeQuasiRep p;
};

inline LoadedRep relative_rep_from_doc(const json& doc, const std::string& where, const std::string& dir = ".") {
    const json& p = payload_of(doc, "quasirep", where);
    auto K = complex_ref(field(p, "complex", where), where + ".complex", dir);
    LoadedRep r{make_context(K), {}};
    int n = int_field(p, "n", where), m = int_field(p, "m", where);
    r.p.pi1 = rep_from_records(field(p, "pi1", where), r.ctx.xtree, r.ctx.xgens, n, where + ".pi1");
    r.p.pi2 = rep_from_records(field(p, "pi2", where), r.ctx.xtree, r.ctx.xgens, n, where + ".pi2");
    r.p.pi0 = rep_from_records(field(p, "pi0", where), r.ctx.ytree, r.ctx.ygens, m, where + ".pi0");
    r.p.u = unitary_from_json(field(p, "u", where), n + m, where + ".u");
    return r;
}

inline json covering_doc(const FiniteCovering& c) {
    return document("covering", json{{"total", complex_payload(*c.total)},
                                     {"base", complex_payload(*c.base)},
                                     {"projection", c.proj}});
}

inline FiniteCovering covering_from_doc(const json& doc, const std::string& where, const std::string& dir = ".") {
    const json& p = payload_of(doc, "covering", where);
    auto total = complex_ref(field(p, "total", where), where + ".total", dir);
    auto base = complex_ref(field(p, "base", where), where + ".base", dir);
    return make_covering(total, base, int_list(field(p, "projection", where), where + ".projection"));
}

inline json connection_doc(const DiscreteConnection& c) {
    json recs = json::array();
    for (const auto& [e, g] : c.g) recs.push_back(json{{"edge", {e.first, e.second}}, {"matrix", to_json(g)}});
    return document("connection", json{{"complex", complex_payload(*c.K)}, {"dim", c.dim}, {"records", recs}});
}

inline DiscreteConnection connection_from_doc(const json& doc, const std::string& where,
                                              const std::string& dir = ".") {
    const json& p = payload_of(doc, "connection", where);
    auto K = complex_ref(field(p, "complex", where), where + ".complex", dir);
    int n = int_field(p, "dim", where);
    DiscreteConnection c = identity_connection(K, n);
    const json& recs = field(p, "records", where);
    if (!recs.is_array()) schema(where + ".records", "expected an array");
    for (size_t i = 0; i < recs.size(); ++i) {
        std::string w = where + ".records[" + std::to_string(i) + "]";
        auto e = int_list(field(recs[i], "edge", w), w + ".edge");
        if (e.size() != 2 || e[0] == e[1] || !K->contains({std::min(e[0], e[1]), std::max(e[0], e[1])}))
            schema(w + ".edge", "not an edge of the complex");
        Mat m = unitary_from_json(field(recs[i], "matrix", w), n, w + ".matrix");
        c.g[{std::min(e[0], e[1]), std::max(e[0], e[1])}] = e[0] < e[1] ? m : Mat(m.adjoint());
    }
    return c;
}

}  // namespace af::io
