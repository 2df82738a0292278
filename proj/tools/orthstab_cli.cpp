// orthstab command-line front end. Every subcommand writes one compact JSON
// document; errors go to stderr as {"error": {...}} with a fixed exit code.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "orthstab/json_io.hpp"
#include "orthstab/orthstab.hpp"

using namespace orthstab;
using io::Json;

namespace {

struct Config {
    std::string ring, form, target, morphism, module, out;
    std::uint32_t ell = 0;
    std::size_t horizon = 0;
    std::uint64_t budget = 0;
    unsigned threads = 1;
    std::uint64_t seed = 0;

    std::string object, v, w, I, family = "X";
    std::size_t limit = 0, n_max = 2, N = 1, k = 1, start = 1, stop = 4, probe = 0, samples = 0, scan = 0;
    bool text = false, sweep = false;
};

RingPtr ring_opt(const Config& c) { return c.ring.empty() ? nullptr : io::ring_from_json(io::read_file(c.ring)); }

EnumOptions enum_opt(const Config& c) {
    EnumOptions o;
    if (c.budget) o.budget = c.budget;
    o.threads = std::max(1u, c.threads);
    return o;
}

HomologyOptions hom_opt(const Config& c) {
    HomologyOptions o;
    if (c.budget) o.budget = c.budget;
    return o;
}

std::string need(const std::string& v, const char* flag) {
    if (v.empty()) throw UsageError(std::string("missing ") + flag);
    return v;
}

/// "3", "3:1" or "3:1,2": rank then 1-based nonsquare factors.
ClassLabel parse_object(const Ring& R, const std::string& s) {
    if (s.empty()) throw UsageError("missing object (rank[:i,j,...])");
    Json j;
    const auto colon = s.find(':');
    try {
        j["rank"] = std::stoll(s.substr(0, colon));
        Json ns = Json::array();
        if (colon != std::string::npos) {
            std::stringstream ss(s.substr(colon + 1));
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) ns.push_back(std::stoll(tok));
        }
        j["nonsquare"] = ns;
    } catch (const std::logic_error&) {
        throw UsageError("bad object '" + s + "'");
    }
    return io::label_from_json(R, j);
}

FactorMask parse_mask(const Ring& R, const std::string& s) {
    return s.empty() ? 0 : parse_object(R, "1:" + s).nonsquare;
}

Json mask_to_json(FactorMask m) { return ClassLabel{1, m}.nonsquare_list(); }

Json one_based(const std::vector<std::size_t>& v) {
    Json out = Json::array();
    for (auto x : v) out.push_back(x + 1);
    return out;
}

Json profile_to_json(const AdaptedProfile& p) {
    Json out = Json::array();
    for (const auto& s : p.pivots) out.push_back(one_based(s));
    return out;
}

Json dims_json(const std::vector<std::size_t>& v) { return Json(v); }

Module load_module(const Config& c) {
    auto p = io::module_from_json(io::read_file(need(c.module, "--module")), ring_opt(c));
    if (c.ell) p.ell = c.ell;
    if (c.horizon) p.horizon = c.horizon;
    return Module(std::move(p), enum_opt(c));
}

struct MorphismFile {
    RingPtr ring;
    Json doc;
    // "matrix" is accepted for "f"; source and target may be bare Gram matrices or form objects
    Matrix get(const char* key, std::size_t cols = 0) const {
        const bool alias = std::string(key) == "f" && !doc.contains("f") && doc.contains("matrix");
        const Json& j = io::field(doc, alias ? "matrix" : key);
        return io::matrix_from_json(*ring, j.is_object() ? io::field(j, "gram") : j, cols);
    }
    OrthForm form(const char* key) const { return OrthForm::validate(ring, get(key)); }
};

MorphismFile load_morphism(const Config& c) {
    MorphismFile m;
    m.doc = io::read_file(need(c.morphism, "--morphism"));
    m.ring = m.doc.contains("ring") ? io::ring_from_json(m.doc.at("ring")) : ring_opt(c);
    if (!m.ring && m.doc.contains("source") && m.doc.at("source").contains("ring")) m.ring = io::ring_from_json(m.doc.at("source").at("ring"));
    if (!m.ring) throw UsageError("morphism file needs a ring (in the file or via --ring)");
    return m;
}

OrthForm load_form(const Config& c, const std::string& path) { return io::form_from_json(io::read_file(path), ring_opt(c)); }

// -- subcommands ---------------------------------------------------------------

Json cmd_classify(const Config& c) {
    const auto F = load_form(c, need(c.form, "--form"));
    return Json{{"label", io::label_to_json(canonical_form(F).label)}};
}

Json cmd_canon(const Config& c) {
    const auto F = load_form(c, need(c.form, "--form"));
    const auto cf = canonical_form(F);
    const auto& R = *F.ring;
    return Json{{"label", io::label_to_json(cf.label)},
                {"transform", io::matrix_to_json(R, cf.T)},
                {"canonical", io::matrix_to_json(R, OrthForm::standard(F.ring, cf.label).gram)}};
}

Json cmd_isom_enum(const Config& c) {
    const auto S = load_form(c, need(c.form, "--form"));
    const auto T = c.target.empty() ? S : io::form_from_json(io::read_file(c.target), S.ring);
    const auto all = enumerate_isometries(S, T, enum_opt(c));
    Json list = Json::array();
    for (std::size_t i = 0; i < all.size() && (c.limit == 0 || i < c.limit); ++i) list.push_back(io::matrix_to_json(*S.ring, all[i]));
    return Json{{"source", io::label_to_json(S.label)}, {"target", io::label_to_json(T.label)}, {"count", all.size()}, {"isometries", list}};
}

Json cmd_group(const Config& c) {
    const auto F = load_form(c, need(c.form, "--form"));
    auto G = std::make_shared<const OrthGroup>(OrthGroup::build(F, enum_opt(c)));
    const auto T = GroupTable::from_orth(G);
    Json gens = Json::array();
    for (auto g : T.generators()) gens.push_back(io::matrix_to_json(*F.ring, G->element(g)));
    return Json{{"order", G->order()}, {"label", io::label_to_json(F.label)}, {"generators", gens}};
}

Json cmd_factor_surj(const Config& c) {
    const auto m = load_morphism(c);
    const auto s = factor_surjection(*m.ring, m.get("f"));
    return Json{{"f1", io::matrix_to_json(*m.ring, s.f1)}, {"f2", io::matrix_to_json(*m.ring, s.f2)}, {"pivots", profile_to_json(s.profile)}};
}

Json cmd_factor_isom(const Config& c) {
    const auto m = load_morphism(c);
    const auto src = m.form("source"), tgt = m.form("target");
    const auto s = factor_isometry(src, tgt, m.get("f", src.rank()));
    const auto& R = *m.ring;
    return Json{{"f1", io::matrix_to_json(R, s.f1)},
                {"f2", io::matrix_to_json(R, s.f2)},
                {"beta", io::matrix_to_json(R, s.beta.gram)},
                {"pivots", profile_to_json(s.profile)}};
}

Json deleted_json(const Ring& R, const std::vector<std::vector<std::size_t>>& del) {
    if (R.num_factors() == 1) return one_based(del[0]);
    Json out = Json::array();
    for (const auto& d : del) out.push_back(one_based(d));
    return out;
}

std::pair<MorphismKey, MorphismKey> load_keys(const MorphismFile& m) {
    const Matrix B = m.get("source");
    return {MorphismKey::make(m.ring, B, m.get("f", B.rows)), MorphismKey::make(m.ring, B, m.get("g", B.rows))};
}

Json cmd_wpo_cmp(const Config& c) {
    const auto m = load_morphism(c);
    const auto [f, g] = load_keys(m);
    const bool p = precedes(f, g);
    Json out{{"precedes", p}};
    if (p)
        out["deleted_rows"] = deleted_json(*m.ring, *find_deletion(*m.ring, f.matrix, g.matrix));
    else
        out["deleted_rows"] = nullptr;
    return out;
}

Json cmd_insertion(const Config& c) {
    const auto m = load_morphism(c);
    const auto [f, g] = load_keys(m);
    const auto r = check_order_compat(f, g, c.samples, c.seed);
    return Json{{"phi", io::matrix_to_json(*m.ring, r.phi)},
                {"deleted_rows", deleted_json(*m.ring, r.deleted)},
                {"phi_f_is_g", r.phi_f_is_g},
                {"preserves_form", r.preserves_form},
                {"row_adapted", r.phi_row_adapted},
                {"smaller_checked", r.smaller_checked},
                {"violations", r.violations}};
}

Json cmd_module_eval(const Config& c) {
    const Module M = load_module(c);
    const auto& P = M.presentation();
    Json rows = Json::array();
    for (std::size_t n = 0; n <= P.horizon; ++n)
        for (const auto& l : labels_of_rank(*P.ring, n)) rows.push_back(Json{{"rank", n}, {"nonsquare", l.nonsquare_list()}, {"dim", M.dim(l)}});
    Json out{{"ell", P.ell}, {"horizon", P.horizon}, {"generators", P.generators.size()}, {"relations", P.relations.size()}, {"dims", rows}};
    if (c.sweep) {
        const auto s = stability_sweep(M);
        auto opt = [](const std::optional<std::size_t>& o) { return o ? Json(*o) : Json(nullptr); };
        out["injective_onset"] = opt(s.injective_onset);
        out["surjective_onset"] = opt(s.surjective_onset);
    }
    return out;
}

Json sigma_json(const SigmaComplex& s, FactorMask I) {
    return Json{{"object", io::label_to_json(s.object)}, {"I", mask_to_json(I)},          {"n_max", s.n_max},
                {"hom_sizes", dims_json(s.hom_sizes)},   {"dims", dims_json(s.dims)},     {"ranks", dims_json(s.ranks)},
                {"dd_zero", s.dd_zero},                  {"homology", dims_json(s.homology)}, {"exact", s.exact_low()}};
}

Json cmd_sigma(const Config& c) {
    const Module M = load_module(c);
    const auto& R = *M.presentation().ring;
    const FactorMask I = parse_mask(R, c.I);
    if (c.scan) {
        const auto sc = sigma_scan(M, I, c.scan, true);
        Json list = Json::array();
        for (const auto& s : sc.complexes) list.push_back(sigma_json(s, I));
        return Json{{"first_exact_rank", sc.first_exact_rank ? Json(*sc.first_exact_rank) : Json(nullptr)}, {"complexes", list}};
    }
    return sigma_json(sigma_complex(M, I, c.n_max, parse_object(R, c.object)), I);
}

Json cmd_kan(const Config& c) {
    const Module M = load_module(c);
    const auto r = kan_extend(M, c.N, parse_object(*M.presentation().ring, c.object), c.budget ? c.budget : 50'000'000);
    return Json{{"object", io::label_to_json(r.object)}, {"N", c.N},
                {"pairs", r.pairs},                      {"total_dim", r.total_dim},
                {"relations", r.relations},              {"colimit_dim", r.colimit_dim},
                {"target_dim", r.target_dim},            {"comparison_rank", r.comparison_rank},
                {"iso", r.iso()}};
}

Json cmd_torsion(const Config& c) {
    const Module M = load_module(c);
    const auto r = torsion(M, parse_object(*M.presentation().ring, c.object), c.probe ? c.probe : M.presentation().horizon);
    Json ks = Json::array();
    for (const auto& [W, d] : r.kernels) ks.push_back(Json{{"target", io::label_to_json(W)}, {"kernel_dim", d}});
    return Json{{"object", io::label_to_json(r.object)},
                {"module_dim", r.module_dim},
                {"torsion_dim", r.torsion_dim},
                {"kernels", ks},
                {"union_is_subspace", r.union_is_subspace}};
}

Json cmd_homology(const Config& c) {
    const Module M = load_module(c);
    const ClassLabel V = parse_object(*M.presentation().ring, c.object);
    const auto mr = module_rep(M, V);
    const auto h = homology_dims(mr.rep, c.k, hom_opt(c));
    return Json{{"object", io::label_to_json(V)},        {"ell", M.field().p},
                {"group_order", h.group_order},          {"module_dim", h.module_dim},
                {"generators", h.generators},            {"dims", dims_json(h.dims)},
                {"coinvariants", h.coinvariants},        {"boundary_ranks", dims_json(h.boundary_ranks)},
                {"columns", h.columns}};
}

Json cmd_stability_scan(const Config& c, std::string& text) {
    const Module M = load_module(c);
    const auto tables = stability_scan(M, c.family, c.start, c.stop, c.k, hom_opt(c));
    Json out = Json::array();
    std::ostringstream os;
    for (const auto& t : tables) {
        Json rows = Json::array();
        os << "family " << t.family << "  l=" << t.ell << "  k=" << t.k << '\n';
        for (const auto& r : t.rows) {
            rows.push_back(Json{{"n", r.n}, {"dim_source", r.dim_source}, {"dim_target", r.dim_target}, {"map_rank", r.map_rank}});
            os << "  n=" << r.n << "  " << r.dim_source << " -> " << r.dim_target << "  rank " << r.map_rank << '\n';
        }
        os << "  stable from " << (t.stable_from ? std::to_string(*t.stable_from) : std::string("-")) << (t.functorial ? "" : "  NOT FUNCTORIAL")
           << '\n';
        out.push_back(Json{{"family", t.family},
                           {"ell", t.ell},
                           {"k", t.k},
                           {"rows", rows},
                           {"stable_from", t.stable_from ? Json(*t.stable_from) : Json(nullptr)},
                           {"functorial", t.functorial}});
    }
    text = os.str();
    return out;
}

Json cmd_shapiro(const Config& c) {
    const RingPtr R = ring_opt(c);
    if (!R) throw UsageError("shapiro needs --ring");
    const auto r = shapiro_check(R, parse_object(*R, c.v), parse_object(*R, c.w), c.k, c.ell ? c.ell : 2, hom_opt(c), enum_opt(c));
    return Json{{"V", io::label_to_json(r.V)},        {"W", io::label_to_json(r.W)}, {"ell", r.ell},
                {"aut_sum", r.aut_sum},               {"aut_w", r.aut_w},            {"hom", r.hom},
                {"left", dims_json(r.left)},          {"right", dims_json(r.right)}, {"agree", r.agree()}};
}

const char* code_name(int code) {
    switch (code) {
        case 2: return "usage";
        case 3: return "domain";
        case 4: return "budget";
        case 5: return "property";
        default: return "internal";
    }
}

int fail(int code, const std::string& msg) {
    std::cerr << Json{{"error", {{"code", code_name(code)}, {"exit", code}, {"message", msg}}}}.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    Config c;
    CLI::App app{"orthstab: orthogonal modules over finite rings"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--ring", c.ring, "ring spec JSON file");
    app.add_option("--form", c.form, "form JSON file");
    app.add_option("--target", c.target, "target form JSON file (isom-enum)");
    app.add_option("--morphism", c.morphism, "morphism JSON file");
    app.add_option("--module", c.module, "module presentation JSON file");
    app.add_option("--ell", c.ell, "coefficient prime");
    app.add_option("--horizon", c.horizon, "rank horizon (overrides the module file)");
    app.add_option("--budget", c.budget, "work budget");
    app.add_option("--threads", c.threads, "worker threads");
    app.add_option("--out", c.out, "write the report here instead of stdout");
    app.add_option("--seed", c.seed, "random seed for sampled checks");

    std::map<std::string, CLI::App*> subs;
    const std::pair<const char*, const char*> commands[] = {
        {"classify", "isometry class label of --form"},
        {"canon", "label, transform and canonical Gram matrix of --form"},
        {"isom-enum", "all isometries --form -> --target (default: automorphisms)"},
        {"group", "order and generators of Aut(--form)"},
        {"factor-surj", "column-adapted factorization of a surjection (--morphism)"},
        {"factor-isom", "factorization of an isometry source -> target (--morphism)"},
        {"wpo-cmp", "compare keys f and g over source B (--morphism)"},
        {"insertion", "insertion map and order compatibility for f <= g (--morphism)"},
        {"module-eval", "dimension table of --module"},
        {"sigma", "Sigma complex homology at --object"},
        {"kan", "truncated left Kan extension at --object"},
        {"torsion", "torsion subspace at --object"},
        {"homology", "group homology of Aut(--object) with module coefficients"},
        {"stability-scan", "induced maps on homology along a family"},
        {"shapiro", "both sides of the Shapiro comparison for --V, --W"},
    };
    for (auto [name, help] : commands) subs[name] = app.add_subcommand(name, help);
    subs["isom-enum"]->add_option("--limit", c.limit, "list at most this many (0 = all)");
    subs["module-eval"]->add_flag("--sweep", c.sweep, "add injective and surjective onsets over the horizon");
    subs["insertion"]->add_option("--samples", c.samples, "sampled smaller keys (0 = all)");
    for (const char* name : {"sigma", "kan", "torsion", "homology"}) subs[name]->add_option("--object", c.object, "rank[:i,j,...]");
    subs["sigma"]->add_option("--I", c.I, "nonsquare factors of x_I, comma separated");
    subs["sigma"]->add_option("--n-max", c.n_max, "top degree");
    subs["sigma"]->add_option("--scan", c.scan, "scan identity objects up to this rank");
    subs["kan"]->add_option("--N", c.N, "truncation rank");
    subs["torsion"]->add_option("--probe", c.probe, "largest target rank probed");
    subs["homology"]->add_option("--k", c.k, "top degree (<= 2)");
    subs["stability-scan"]->add_option("--family", c.family, "X, XY or interleave");
    subs["stability-scan"]->add_option("--start", c.start, "first source rank");
    subs["stability-scan"]->add_option("--stop", c.stop, "last target rank");
    subs["stability-scan"]->add_option("--k", c.k, "top degree (<= 1)");
    subs["stability-scan"]->add_flag("--text", c.text, "plain-text summary instead of JSON");
    subs["shapiro"]->add_option("--V", c.v, "rank[:i,j,...]");
    subs["shapiro"]->add_option("--W", c.w, "rank[:i,j,...]");
    subs["shapiro"]->add_option("--k", c.k, "top degree (<= 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, e.what());
    }

    try {
        std::string name;
        for (auto& [n, s] : subs)
            if (s->parsed()) name = n;
        Json out;
        std::string text;
        if (name == "classify") out = cmd_classify(c);
        else if (name == "canon") out = cmd_canon(c);
        else if (name == "isom-enum") out = cmd_isom_enum(c);
        else if (name == "group") out = cmd_group(c);
        else if (name == "factor-surj") out = cmd_factor_surj(c);
        else if (name == "factor-isom") out = cmd_factor_isom(c);
        else if (name == "wpo-cmp") out = cmd_wpo_cmp(c);
        else if (name == "insertion") out = cmd_insertion(c);
        else if (name == "module-eval") out = cmd_module_eval(c);
        else if (name == "sigma") out = cmd_sigma(c);
        else if (name == "kan") out = cmd_kan(c);
        else if (name == "torsion") out = cmd_torsion(c);
        else if (name == "homology") out = cmd_homology(c);
        else if (name == "stability-scan") out = cmd_stability_scan(c, text);
        else if (name == "shapiro") out = cmd_shapiro(c);
        else return fail(2, "unknown subcommand");

        const std::string body = c.text && !text.empty() ? text : out.dump() + "\n";
        if (c.out.empty()) {
            std::cout << body;
        } else {
            std::ofstream f(c.out, std::ios::binary);
            if (!f) return fail(2, "cannot write '" + c.out + "'");
            f << body;
        }
        return 0;
    } catch (const Error& e) {
        return fail(e.exit_code(), e.what());
    } catch (const Json::exception& e) {
        return fail(2, std::string("bad JSON input: ") + e.what());
    } catch (const std::exception& e) {
        return fail(1, e.what());
    }
}
