// afb: generate instances, audit bundles, run round trips, constructions and class readouts.

#include "almostflat/io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace af;
using io::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct Report {
    std::string command;
    json checks = json::array();
    json values = json::object();
    json provenance = json::object();
    bool pass = true;

    void check(const std::string& anchor, double measured, double bound) {
        bool ok = measured <= bound;
        pass = pass && ok;
        checks.push_back({{"anchor", anchor}, {"measured", measured}, {"bound", bound}, {"pass", ok}});
    }
    void check_eq(const std::string& anchor, long a, long b) {
        bool ok = a == b;
        pass = pass && ok;
        checks.push_back({{"anchor", anchor}, {"measured", a}, {"expected", b}, {"pass", ok}});
    }
};

struct Common {
    std::string format = "json";
    std::string out;
    unsigned long long seed = 0;
    double eps = 1e-2;
};

void emit_text(const json& j, std::ostream& os) {
    const json& p = j["payload"];
    os << "command: " << p["command"].get<std::string>() << "\n";
    for (const auto& [k, v] : p["values"].items()) os << "  " << k << " = " << v.dump() << "\n";
    for (const auto& c : p["checks"]) {
        os << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["anchor"].get<std::string>() << ": "
           << c["measured"].dump();
        if (c.contains("bound")) os << " <= " << c["bound"].dump();
        if (c.contains("expected")) os << " == " << c["expected"].dump();
        os << "\n";
    }
    os << "input digest: " << p["provenance"].value("input_digest", "-") << "\n";
}

void write_doc(const json& doc, const std::string& path) {
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::Schema, "cannot write '" + path + "'");
    f << doc.dump(1) << "\n";
}

int finish(Report& r, const Common& c) {
    r.provenance["seed"] = c.seed;
    r.provenance["version"] = kToolVersion;
    json doc = io::document("report", {{"command", r.command},
                                       {"pass", r.pass},
                                       {"values", r.values},
                                       {"checks", r.checks},
                                       {"provenance", r.provenance}});
    if (c.format == "text") emit_text(doc, std::cout);
    else if (r.command.rfind("construct", 0) != 0 && !c.out.empty()) write_doc(doc, c.out);
    else std::cout << doc.dump(1) << "\n";
    return r.pass ? 0 : 1;
}

struct Input {
    json doc;
    std::string dir;
    std::string digest;
};

Input load(const std::string& path) {
    std::string text = io::read_file(path);
    auto slash = path.find_last_of('/');
    return {io::parse(text, path), slash == std::string::npos ? "." : path.substr(0, slash), io::digest(text)};
}

// ---- gen ----

int cmd_gen(const std::string& family, const std::string& kind, int dim, int m, int k, int d, bool eps_set,
            const Common& c) {
    std::mt19937_64 rng(c.seed);
    json doc;
    if (family == "almost_commuting") {
        QuasiRep uv = almost_commuting(d);
        doc = io::document("quasirep", {{"dim", d}, {"generators", io::generator_list(uv)},
                                        {"coords", {{1, 0}, {0, 1}}}});
    } else if (family == "clutching_chern") {
        auto ctx = make_context(disk_pair());
        doc = io::bundle_doc(clutching_chern(ctx, k, eps_set ? c.eps : 0.0, &rng));
    } else if (family == "cover2_circle") {
        doc = io::covering_doc(cover2_circle());
    } else if (family == "cover2_torus7") {
        doc = io::covering_doc(cover2_torus7());
    } else {
        auto K = complex_family(family);
        auto ctx = make_context(K);
        if (kind == "complex") doc = io::document("complex", io::complex_payload(*K));
        else if (kind == "cocycle") doc = io::cocycle_doc(random_eps_flat(ctx.X, dim, c.eps, rng));
        else if (kind == "relative_bundle") doc = io::bundle_doc(random_relative(ctx, dim, m, c.eps, rng));
        else if (kind == "quasirep") doc = io::relative_rep_doc(random_relative_rep(ctx, dim, m, c.eps, rng), ctx);
        else if (kind == "connection") doc = io::connection_doc(random_connection(K, dim, c.eps, rng));
        else throw Error(ErrorKind::InvalidArgument, "unknown instance kind '" + kind + "'");
    }
    if (c.out.empty()) std::cout << doc.dump(1) << "\n";
    else write_doc(doc, c.out);
    return 0;
}

// ---- audit ----

void audit_cocycle(Report& r, const std::string& name, const Cocycle& v, const NerveTree* t) {
    double eps = flatness(v);
    r.values[name + ".flatness"] = eps;
    r.values[name + ".cocycle_residual"] = cocycle_residual(v);
    r.values[name + ".unitarity_defect"] = unitarity_defect(v);
    r.check(name + ": triangle defect below 3 eps (all samples)", triangle_defect(v), 3 * eps + 1e-9);
    if (t) r.check(name + ": triangle defect below 3 eps (tree samples)", triangle_defect(v, *t), 3 * eps + 1e-9);
    r.check(name + ": exact cocycle identity", cocycle_residual(v), 1e-9);
}

int cmd_audit(const std::string& path, const Common& c) {
    Input in = load(path);
    Report r{"audit"};
    r.provenance["input_digest"] = in.digest;
    std::string kind = io::kind_of(in.doc, path);
    if (kind == "cocycle") {
        Cocycle v = io::cocycle_from_doc(in.doc, path, in.dir);
        NerveTree t = build_tree(v.cover, v.cover->index.front());
        audit_cocycle(r, "v", v, &t);
    } else if (kind == "relative_bundle") {
        auto b = io::bundle_from_doc(in.doc, path, in.dir);
        FlatnessCertificate cert = measure(b.f, b.ctx);
        r.values["eps_v1"] = cert.eps_v1;
        r.values["eps_v2"] = cert.eps_v2;
        r.values["eps_v0"] = cert.eps_v0;
        r.values["eps_u"] = cert.eps_u;
        r.values["overall"] = cert.overall;
        audit_cocycle(r, "v1", b.f.v1, &b.ctx.xtree);
        audit_cocycle(r, "v2", b.f.v2, &b.ctx.xtree);
        audit_cocycle(r, "v0", b.f.v0, &b.ctx.ytree);
    } else if (kind == "quasirep") {
        const json& p = io::payload_of(in.doc, "quasirep", path);
        if (p.contains("generators")) {
            int dim = io::int_field(p, "dim", path);
            QuasiRep pi = io::rep_from_list(p["generators"], dim, path + ".generators");
            std::vector<std::vector<long>> coords;
            for (const auto& x : io::field(p, "coords", path)) coords.push_back(x.get<std::vector<long>>());
            if (coords.size() != pi.gen.size()) io::schema(path + ".coords", "one vector per generator");
            r.values["rep_defect"] = rep_defect(pi, abelian_oracle(coords));
        } else {
            auto l = io::relative_rep_from_doc(in.doc, path, in.dir);
            auto ox = abelian_oracle(group_coords(l.ctx.xtree, l.ctx.xgens));
            auto oy = abelian_oracle(group_coords(l.ctx.ytree, l.ctx.ygens));
            RelativeRepDefect d = relative_rep_defect(l.p, l.ctx, ox, oy);
            r.values["pi1_defect"] = d.pi1;
            r.values["pi2_defect"] = d.pi2;
            r.values["pi0_defect"] = d.pi0;
            r.values["u_defect"] = d.u;
            r.values["overall"] = d.overall;
        }
    } else if (kind == "connection") {
        DiscreteConnection conn = io::connection_from_doc(in.doc, path, in.dir);
        r.values["curvature_defect"] = curvature_defect(conn);
    } else if (kind == "covering") {
        FiniteCovering cov = io::covering_from_doc(in.doc, path, in.dir);
        r.values["sheets"] = cov.sheets;
    } else if (kind == "complex") {
        auto K = io::complex_from_payload(io::payload_of(in.doc, "complex", path), path);
        auto ctx = make_context(K);
        r.values["vertices"] = K->n_vertices;
        r.values["euler"] = K->euler();
        r.values["generators"] = ctx.xgens.size();
        r.values["y_generators"] = ctx.ygens.size();
        r.values["max_fill"] = fill_loops(ctx.xtree).max_count();
    } else {
        io::schema(path + ".kind", "unsupported kind '" + kind + "'");
    }
    return finish(r, c);
}

// ---- roundtrip ----

std::optional<int> try_class(const RelativeBundle& f, const PairContext& ctx, Report& r, const std::string& key) {
    try {
        int k = k_class(f, ctx).relative_chern;
        r.values[key] = k;
        return k;
    } catch (const Error& e) {
        r.values[key] = std::string("unavailable: ") + e.what();
        return std::nullopt;
    }
}

int cmd_roundtrip(const std::string& path, bool relaxed, const Common& c) {
    Input in = load(path);
    Report r{"roundtrip"};
    r.provenance["input_digest"] = in.digest;
    std::string kind = io::kind_of(in.doc, path);
    PolarOptions po{!relaxed};
    if (kind == "relative_bundle") {
        auto b = io::bundle_from_doc(in.doc, path, in.dir);
        double eps = measure(b.f, b.ctx).overall;
        RelativeBundle nf = normalize_relative(b.f, b.ctx).f;
        RelativeBundle back = bold_beta(bold_alpha(nf, b.ctx), b.ctx, po);
        double d = distance(back, nf);
        r.values["eps"] = eps;
        r.values["distance"] = d;
        r.values["ratio"] = eps > 0 ? json(d / eps) : json(nullptr);
        if (b.ctx.K->dim() == 2) {
            auto k0 = try_class(b.f, b.ctx, r, "class_before");
            auto k1 = try_class(back, b.ctx, r, "class_after");
            if (k0 && k1) r.check_eq("class preserved by the monodromy round trip", *k1, *k0);
        }
        if (eps == 0) r.check("exact sector round trip", d, 1e-9);
    } else if (kind == "quasirep") {
        auto l = io::relative_rep_from_doc(in.doc, path, in.dir);
        RelativeQuasiRep back = bold_alpha(bold_beta(l.p, l.ctx, po), l.ctx);
        double d = distance(back, l.p);
        r.values["distance"] = d;
        try {
            auto ox = abelian_oracle(group_coords(l.ctx.xtree, l.ctx.xgens));
            auto oy = abelian_oracle(group_coords(l.ctx.ytree, l.ctx.ygens));
            double eps = relative_rep_defect(l.p, l.ctx, ox, oy).overall;
            r.values["eps"] = eps;
            r.values["ratio"] = eps > 0 ? json(d / eps) : json(nullptr);
        } catch (const Error& e) {
            r.values["eps"] = std::string("unavailable: ") + e.what();
        }
    } else {
        io::schema(path + ".kind", "expected a relative bundle or quasi-representation");
    }
    return finish(r, c);
}

// ---- construct ----

int cmd_construct(const std::string& sub, const std::string& path, const std::string& cocycle_path, int layers,
                  int dim, bool relaxed, const Common& c) {
    Input in = load(path);
    Report r{"construct " + sub};
    r.provenance["input_digest"] = in.digest;
    json out;
    if (sub == "double") {
        auto b = io::bundle_from_doc(in.doc, path, in.dir);
        DoubleComplex d = build_double(b.ctx.K);
        double eps = measure(b.f, b.ctx).overall;
        double I = b.ctx.X->n_index();
        Cocycle vh = unfold_to_double(b.f, d, b.ctx, {!relaxed});
        RelativeBundle back = fold_to_relative(vh, d, b.ctx);
        r.values["eps"] = eps;
        r.values["euler_double"] = d.K->euler();
        r.check("double: unfolded cocycle is (C1+1) eps flat", flatness(vh), (I * I + 2) * eps + 1e-9);
        r.check("double: fold after unfold within C1 eps", distance(back, b.f), (I * I + 1) * eps + 1e-9);
        out = io::cocycle_doc(vh);
    } else if (sub == "cylinder") {
        auto b = io::bundle_from_doc(in.doc, path, in.dir);
        if (b.f.m() != 0) throw Error(ErrorKind::StabilizedRep, "cylinder input must be relative");
        CylinderModel cm = build_cylinder(b.ctx.K, layers);
        PairContext mc = make_context(cm.K);
        RelativeBundle lifted{cylinder_pullback(cm, b.f.v1, mc.X), cylinder_pullback(cm, b.f.v2, mc.X),
                              identity_cocycle(mc.Y, 0), Morphism{mc.Y, std::vector<Mat>(cm.K->n_vertices)}};
        for (int mu : b.ctx.Y->index) lifted.u.u[cm.vid(mu, layers)] = b.f.u.u[mu];
        double eps = measure(lifted, mc).overall;
        RelativeBundle flat = cylinder_flatten(cm, lifted.v1, lifted.v2, lifted.u, b.ctx);
        r.values["eps"] = eps;
        r.values["layers"] = layers;
        r.check("cylinder: flattened bundle is 2 eps flat", measure(flat, b.ctx).overall, 2 * eps + 1e-9);
        out = io::bundle_doc(flat);
    } else if (sub == "pushforward") {
        FiniteCovering cov = io::covering_from_doc(in.doc, path, in.dir);
        Cocycle v;
        if (!cocycle_path.empty()) {
            Input ci = load(cocycle_path);
            v = io::cocycle_from_doc(ci.doc, cocycle_path, ci.dir);
            if (v.cover->K->simplices != cov.total->simplices)
                throw Error(ErrorKind::ComplexMismatch, "cocycle does not live on the total space");
            v = restrict_to(v, star_cover(cov.total));
            Cocycle w = make_cocycle(star_cover(cov.total), v.dim, [&](int a, int b, int sid) { return v.at(a, b, sid); });
            v = w;
        } else {
            std::mt19937_64 rng(c.seed);
            v = random_eps_flat(star_cover(cov.total), dim, c.eps, rng);
        }
        FiniteCovering cv = cov;
        cv.total = v.cover->K;
        Cocycle pv = covering_pushforward(cv, v, star_cover(cov.base));
        r.values["sheets"] = cov.sheets;
        r.values["flatness_total"] = flatness(v);
        r.values["flatness_base"] = flatness(pv);
        r.check("pushforward: flatness preserved", std::abs(flatness(pv) - flatness(v)), 1e-12);
        out = io::cocycle_doc(pv);
    } else if (sub == "holonomy") {
        DiscreteConnection conn = io::connection_from_doc(in.doc, path, in.dir);
        Cocycle v = holonomy_to_cech(conn, star_cover(conn.K));
        double curv = curvature_defect(conn);
        r.values["curvature_defect"] = curv;
        r.values["flatness"] = flatness(v);
        r.values["bigon_constant"] = bigon_constant(*conn.K);
        r.check("holonomy: exact cocycle identity", cocycle_residual(v), 1e-9);
        r.check("holonomy: flatness below bigon area times curvature", flatness(v),
                bigon_constant(*conn.K) * curv + 1e-12);
        out = io::cocycle_doc(v);
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown construction '" + sub + "'");
    }
    write_doc(out, c.out);
    return finish(r, c);
}

int cmd_class(const std::string& path, const Common& c) {
    Input in = load(path);
    Report r{"class"};
    r.provenance["input_digest"] = in.digest;
    auto b = io::bundle_from_doc(in.doc, path, in.dir);
    SurfaceKClass k = k_class(b.f, b.ctx);
    r.values["relative_chern"] = k.relative_chern;
    r.values["raw"] = k.raw;
    r.values["residue"] = k.residue;
    r.values["rank"] = b.f.n();
    return finish(r, c);
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Schema:
    case ErrorKind::UnknownFamily:
    case ErrorKind::InvalidArgument:
    case ErrorKind::BasepointNotInSubcomplex:
    case ErrorKind::NotConnected:
    case ErrorKind::DimMismatch:
    case ErrorKind::NotUnitary:
    case ErrorKind::ComplexMismatch:
    case ErrorKind::BadCovering:
    case ErrorKind::NoBoundary:
    case ErrorKind::StabilizedRep:
    case ErrorKind::NotCylinder:
        return 2;
    default:
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"almost flat bundles and quasi-representations"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--format", common.format, "report format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--out", common.out, "output document path");
    app.add_option("--seed", common.seed, "random seed");
    auto* eps_opt = app.add_option("--eps", common.eps, "flatness scale of generated instances");

    std::string family, kind = "complex";
    int dim = 1, m = 0, k = 1, d = 4, layers = 1;
    auto* gen = app.add_subcommand("gen", "generate an instance document");
    gen->add_option("--family", family, "instance family")->required();
    gen->add_option("--kind", kind, "complex, cocycle, relative_bundle, quasirep or connection");
    gen->add_option("--dim", dim, "fibre dimension");
    gen->add_option("--m", m, "stabilizer rank");
    gen->add_option("--k", k, "clutching winding");
    gen->add_option("--d", d, "clock and shift dimension");

    std::string file, sub, cocycle_file;
    bool relaxed = false;
    auto* audit = app.add_subcommand("audit", "measure defects of a document");
    audit->add_option("file", file)->required();
    auto* rt = app.add_subcommand("roundtrip", "monodromy round trip");
    rt->add_option("file", file)->required();
    rt->add_flag("--relaxed", relaxed, "skip the literal precondition thresholds");
    auto* cons = app.add_subcommand("construct", "double, cylinder, pushforward or holonomy");
    cons->add_option("construction", sub)->required()->check(
        CLI::IsMember({"double", "cylinder", "pushforward", "holonomy"}));
    cons->add_option("file", file)->required();
    cons->add_option("--layers", layers, "cylinder layers");
    cons->add_option("--cocycle", cocycle_file, "cocycle on the total space");
    cons->add_option("--dim", dim, "fibre dimension of a generated cocycle");
    cons->add_flag("--relaxed", relaxed, "skip the literal precondition thresholds");
    auto* cls = app.add_subcommand("class", "relative first Chern number of a surface bundle");
    cls->add_option("file", file)->required();

    for (auto* s : {gen, audit, rt, cons, cls}) {
        s->add_option("--format", common.format)->check(CLI::IsMember({"json", "text"}));
        s->add_option("--out", common.out);
        s->add_option("--seed", common.seed);
        s->add_option("--eps", common.eps);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    bool eps_set = eps_opt->count() > 0 || gen->get_option("--eps")->count() > 0;
    try {
        if (*gen) return cmd_gen(family, kind, dim, m, k, d, eps_set, common);
        if (*audit) return cmd_audit(file, common);
        if (*rt) return cmd_roundtrip(file, relaxed, common);
        if (*cons) return cmd_construct(sub, file, cocycle_file, layers, dim, relaxed, common);
        if (*cls) return cmd_class(file, common);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
