// Acceptance run: one line per criterion, nonzero exit if any criterion fails
// or overruns its time limit.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "oracles.hpp"
#include "orthstab/orthstab.hpp"

using namespace orthstab;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream note;
    void expect(bool cond, const std::string& what) {
        if (!cond && ok) note << "FAILED: " << what << "; ";
        ok = ok && cond;
    }
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.note << "exception: " << e.what() << "; ";
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > limit_s) {
        c.ok = false;
        c.note << "over time limit; ";
    }
    if (!c.ok) ++failures;
    std::printf("[%s] %2d %-28s %7.1fs / %4.0fs  %s\n", c.ok ? "PASS" : "FAIL", id, name.c_str(), dt, limit_s, c.note.str().c_str());
    std::fflush(stdout);
}

Matrix mat(std::initializer_list<std::initializer_list<Elem>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t r = 0;
    for (auto& row : rows) {
        std::size_t c = 0;
        for (auto e : row) m(r, c++) = e;
        ++r;
    }
    return m;
}

std::vector<ClassLabel> labels_upto(const Ring& R, std::size_t max_rank) {
    std::vector<ClassLabel> out{{0, 0}};
    for (std::size_t n = 1; n <= max_rank; ++n)
        for (FactorMask m = 0; m <= R.all_factors(); ++m) out.push_back({n, m});
    return out;
}

// -- 1 ---------------------------------------------------------------------------

void classification(Check& c) {
    struct Case {
        RingPtr R;
        std::size_t max_rank;
        std::size_t brute_rank;  // pairwise brute-force isometry existence up to this rank
    };
    const std::vector<Case> cases{{Ring::zmod(45), 2, 2}, {Ring::gf(3), 3, 3}, {Ring::gf(5), 3, 0}, {Ring::zmod(9), 2, 2}};
    std::size_t brute_pairs = 0;
    for (const auto& [R, max_rank, brute_rank] : cases)
        for (std::size_t n = 1; n <= max_rank; ++n) {
            const auto orbits = oracle::congruence_orbits(*R, n);
            std::map<std::uint32_t, ClassLabel> orbit_label;
            std::map<std::uint32_t, std::vector<Matrix>> members;
            std::set<ClassLabel> labels;
            for (std::uint64_t code = 0; code < orbits.size(); ++code) {
                Matrix g = oracle::symmetric_from_code(*R, n, code);
                if (!R->is_unit(oracle::det_expand(*R, g))) continue;
                const auto l = canonical_form(OrthForm::validate(R, g)).label;
                auto [it, fresh] = orbit_label.emplace(orbits[code], l);
                c.expect(it->second == l, "an isometry class carries two labels");
                labels.insert(l);
                auto& mem = members[orbits[code]];
                if (mem.size() < 2) mem.push_back(g);
            }
            c.expect(orbit_label.size() == labels.size(), "two isometry classes share a label");
            c.expect(labels.size() == (std::size_t{1} << R->num_factors()),
                     R->describe() + " rank " + std::to_string(n) + " has " + std::to_string(labels.size()) + " classes");
            if (n > brute_rank) continue;
            std::vector<Matrix> sample;
            for (auto& [o, m] : members) sample.insert(sample.end(), m.begin(), m.end());
            for (const auto& a : sample)
                for (const auto& b : sample) {
                    const bool want = oracle::brute_isometry_exists(*R, a, b);
                    c.expect(is_isometric(OrthForm::validate(R, a), OrthForm::validate(R, b)) == want, "is_isometric disagrees with brute force");
                    ++brute_pairs;
                }
        }
    c.note << "Z/45: 4 classes at ranks 1,2; GF(3), GF(5): 2 classes at ranks 1..3; " << brute_pairs << " brute-force pairs";
}

// -- 2 ---------------------------------------------------------------------------

void hensel(Check& c) {
    std::mt19937_64 rng(2);
    std::size_t forms = 0;
    for (auto R : {Ring::gf(3), Ring::gf(5), Ring::gf(3, 2, {1, 0, 1}), Ring::zmod(9), Ring::zmod(27), Ring::zmod(45)})
        for (int t = 0; t < 500; ++t) {
            const std::size_t n = 1 + t % 3;
            const Matrix g = oracle::random_form(*R, n, rng);
            const auto cf = canonical_form(OrthForm::validate(R, g));
            c.expect(congruence(*R, cf.T, g) == OrthForm::standard(R, cf.label).gram, "T^t B T differs from the canonical target over " + R->describe());
            ++forms;
        }
    c.note << forms << " forms";
}

// -- 3 ---------------------------------------------------------------------------

std::size_t count_factorizations(const Ring& R, const Matrix& f) {
    const std::size_t n = f.rows, m = f.cols;
    std::size_t count = 0;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
        std::vector<std::size_t> S;
        for (std::size_t j = 0; j < m; ++j)
            if ((mask >> j) & 1u) S.push_back(j);
        const Matrix f2 = f.select_columns(S);
        if (!R.is_unit(oracle::det_expand(R, f2))) continue;
        const Matrix f1 = mul(R, inverse(R, f2), f);
        auto p = is_column_adapted(R, f1);
        if (p && p->pivots.front() == S) ++count;
    }
    return count;
}

void adapted(Check& c) {
    std::size_t surj = 0;
    for (auto R : {Ring::gf(3), Ring::zmod(9)})
        for (auto [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 1}, {2, 2}, {3, 2}}) {
            std::uint64_t total = 1;
            for (std::size_t k = 0; k < m * n; ++k) total *= R->size();
            Matrix f(n, m);
            for (std::uint64_t code = 0; code < total; ++code) {
                std::uint64_t x = code;
                for (auto& e : f.data) e = static_cast<Elem>(x % R->size()), x /= R->size();
                if (!is_surjective(*R, f)) continue;
                const auto s = factor_surjection(*R, f);
                const bool valid = mul(*R, s.f2, s.f1) == f && is_column_adapted(*R, s.f1).has_value() && is_invertible(*R, s.f2);
                c.expect(valid, "factor_surjection returned an invalid pair");
                c.expect(count_factorizations(*R, f) == 1, "factorization is not unique");
                ++surj;
            }
        }
    auto R = Ring::zmod(9);
    auto p = is_column_adapted(*R, mat({{3, 1, 0, 5, 0}, {6, 0, 1, 2, 0}, {0, 0, 0, 3, 1}}));
    c.expect(p && p->common() == std::vector<std::size_t>{1, 2, 4}, "3x5 example pivots are not {2,3,5}");
    c.note << surj << " surjections; 3x5 example S_c = {2,3,5}";
}

// -- 4 ---------------------------------------------------------------------------

void insertion(Check& c) {
    {
        auto R = Ring::gf(5);
        const Matrix B = Matrix::diagonal({2, 1, 1});
        const auto f = MorphismKey::make(R, B, mat({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
        const auto g = MorphismKey::make(R, B, mat({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 2, 0}, {0, 0, 1}, {2, 4, 0}}));
        const Matrix phi = insertion_map(*R, f.matrix, g.matrix);
        c.expect(phi == mat({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {1, 0, 2, 0}, {0, 0, 0, 1}, {2, 0, 4, 0}}), "toy phi has the wrong shape");
        c.expect(check_order_compat(f, g).ok(), "toy instance fails a bullet");
    }
    auto R = Ring::gf(3);
    std::vector<std::pair<MorphismKey, MorphismKey>> pairs;
    for (const Matrix& B : {Matrix::identity(*R, 1), Matrix::diagonal({2}), Matrix::identity(*R, 2), Matrix::diagonal({1, 2})}) {
        std::vector<std::vector<MorphismKey>> by_n(6);
        for (std::size_t n = B.rows; n <= 5; ++n) by_n[n] = enumerate_keys(R, B, n);
        for (std::size_t n = B.rows; n <= 5; ++n)
            for (std::size_t np = n + 1; np <= 5; ++np)
                for (const auto& f : by_n[n])
                    for (const auto& g : by_n[np])
                        if (precedes(f, g)) pairs.emplace_back(f, g);
    }
    std::mt19937_64 rng(4);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    if (pairs.size() > 200) pairs.resize(200);
    c.expect(pairs.size() == 200, "fewer than 200 valid pairs");
    std::size_t smaller = 0;
    for (const auto& [f, g] : pairs) {
        const auto rep = check_order_compat(f, g);
        c.expect(rep.phi_f_is_g && rep.preserves_form, "phi f = g or form preservation fails");
        c.expect(rep.violations == 0 && rep.phi_row_adapted, "a bullet fails on a smaller key");
        smaller += rep.smaller_checked;
    }
    c.note << "toy phi reproduced; " << pairs.size() << " random pairs, " << smaller << " smaller keys checked";
}

// -- 5 ---------------------------------------------------------------------------

void order_axioms(Check& c) {
    auto R = Ring::gf(3);
    std::size_t total = 0;
    for (const Matrix& B : {Matrix::identity(*R, 1), Matrix::diagonal({2}), Matrix::identity(*R, 2), Matrix::diagonal({1, 2})}) {
        std::vector<MorphismKey> keys;
        for (std::size_t n = B.rows; n <= 4; ++n)
            for (auto& k : enumerate_keys(R, B, n)) keys.push_back(std::move(k));
        const std::size_t N = keys.size();
        total += N;
        std::vector<std::vector<char>> pre(N, std::vector<char>(N)), less(N, std::vector<char>(N));
        std::vector<std::vector<Word>> words(N);
        for (std::size_t i = 0; i < N; ++i) {
            words[i] = word_embed(keys[i]);
            for (std::size_t j = 0; j < N; ++j) pre[i][j] = precedes(keys[i], keys[j]), less[i][j] = total_less(keys[i], keys[j]);
        }
        std::set<std::vector<Word>> distinct(words.begin(), words.end());
        c.expect(distinct.size() == N, "word_embed is not injective");
        for (std::size_t i = 0; i < N; ++i) {
            c.expect(pre[i][i], "not reflexive");
            c.expect(!less[i][i], "total order not strict");
            for (std::size_t j = 0; j < N; ++j) {
                if (i != j) {
                    c.expect(!(pre[i][j] && pre[j][i]), "not antisymmetric");
                    c.expect(less[i][j] != less[j][i], "total order not total");
                }
                if (pre[i][j] && i != j) c.expect(less[i][j], "total order does not extend the partial order");
                if (pre[i][j]) {
                    bool sub = true;
                    for (std::size_t f = 0; f < words[i].size(); ++f) sub = sub && word_subsequence(words[i][f], words[j][f]);
                    c.expect(sub, "word_embed is not order-preserving");
                }
                for (std::size_t k = 0; k < N; ++k) {
                    if (pre[i][j] && pre[j][k]) c.expect(pre[i][k], "partial order not transitive");
                    if (less[i][j] && less[j][k]) c.expect(less[i][k], "total order not transitive");
                }
            }
        }
    }
    c.note << total << " keys";
}

// -- 6 ---------------------------------------------------------------------------

void separation(Check& c) {
    const auto r = fuzz_init_separation(Ring::gf(3), {2, 5}, 50, 3, 6);
    c.expect(r.instances == 50 && r.witnesses == 50 && r.violations == 0, "separation failed");
    c.note << r.witnesses << "/" << r.instances << " witnesses, " << r.violations << " violations";
}

// -- 7 ---------------------------------------------------------------------------

void transitivity(Check& c) {
    std::size_t orbits = 0, counts = 0;
    for (auto [R, wmax, summax] : std::vector<std::tuple<RingPtr, std::size_t, std::size_t>>{{Ring::gf(3), 3, 5}, {Ring::gf(5), 2, 4}}) {
        for (auto w : labels_upto(*R, wmax)) {
            const auto W = OrthForm::standard(R, w);
            const auto G = OrthGroup::build(W);
            for (auto v : labels_upto(*R, w.rank)) {
                const auto V = OrthForm::standard(R, v);
                const auto hom = enumerate_isometries(V, W);
                if (hom.empty()) continue;
                std::set<Matrix> orbit;
                for (const auto& g : G.elements()) orbit.insert(mul(*R, g, hom.front()));
                c.expect(orbit.size() == hom.size(), "Aut(W) is not transitive on Hom(V, W)");
                ++orbits;
            }
            for (auto v : labels_upto(*R, summax - w.rank)) {
                const auto hc = hom_count(OrthForm::standard(R, v), W);
                c.expect(hc.agree(), "|Hom(V, V+W)| != |Aut(V+W)| / |Aut(W)|");
                ++counts;
            }
        }
    }
    c.note << orbits << " Hom sets single-orbit; " << counts << " count identities (rank V+W <= 5 over GF(3), <= 4 over GF(5))";
}

// -- 8 ---------------------------------------------------------------------------

void sigma(Check& c) {
    auto R = Ring::gf(3);
    std::size_t built = 0;
    for (auto pres : {ModulePresentation::representable(R, 2, 4, {1, 0}), ModulePresentation::representable(R, 5, 4, {2, 0}),
                      ModulePresentation::constant(R, 2, 4)}) {
        Module M(pres);
        for (FactorMask I : {0u, 1u})
            for (auto V : labels_upto(*R, 4)) {
                const auto sc = sigma_complex(M, I, 2, V);
                c.expect(sc.dd_zero, "d d != 0");
                ++built;
            }
    }
    Module P(ModulePresentation::representable(R, 2, 4, {1, 0}));
    const auto at3 = sigma_complex(P, 0, 2, {3, 0});
    c.expect(at3.homology == std::vector<std::size_t>{0, 0}, "not exact at the rank-3 identity");
    const auto scan = sigma_scan(P, 0, 4, true);
    c.expect(scan.first_exact_rank.has_value(), "no first-exact rank");
    c.note << built << " complexes with dd = 0; exact at rank-3 identity; first exact rank (identity objects) = "
           << (scan.first_exact_rank ? std::to_string(*scan.first_exact_rank) : std::string("none"));
}

// -- 9 ---------------------------------------------------------------------------

void kan(Check& c) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 2, 4, {1, 0}));
    const auto r3 = kan_extend(P, 3, {4, 0});
    c.expect(r3.iso(), "N = 3 colimit does not match M(V)");
    const auto r1 = kan_extend(P, 1, {4, 0});
    c.note << "N=3: colim " << r3.colimit_dim << " = M(V) " << r3.target_dim << "; N=1: colim " << r1.colimit_dim << " vs " << r1.target_dim
           << (r1.iso() ? " (iso)" : " (mismatch)");
}

// -- 10 --------------------------------------------------------------------------

void homology(Check& c) {
    std::size_t instances = 0, coprime = 0, shapiro = 0;
    {
        auto G = std::make_shared<const OrthGroup>(OrthGroup::build(OrthForm::identity(Ring::gf(3), 2)));
        auto T = std::make_shared<const GroupTable>(GroupTable::from_orth(G));
        const auto h = homology_dims(trivial_rep(T, 3), 2);
        c.expect(G->order() == 8 && h.dims == std::vector<std::size_t>{1, 0, 0}, "|G| = 8, l = 3 does not vanish");
        ++instances;
    }
    // coprime vanishing on module coefficients
    for (auto [p, ells] : std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>>{{3, {5, 7}}, {5, {3, 7}}}) {
        auto R = Ring::gf(p);
        for (auto ell : ells)
            for (auto pres : {ModulePresentation::representable(R, ell, 3, {1, 0}), ModulePresentation::representable(R, ell, 3, {1, 1}),
                              ModulePresentation::constant(R, ell, 3)}) {
                Module M(pres);
                for (auto V : labels_upto(*R, p == 3 ? 3 : 2)) {
                    const auto mr = module_rep(M, V);
                    const std::size_t order = mr.orth->order();
                    const std::size_t k = order <= 50 ? 2 : 1;
                    const auto h = homology_dims(mr.rep, k);
                    ++instances;
                    if (std::gcd<std::size_t>(order, ell) != 1) continue;
                    ++coprime;
                    for (std::size_t j = 1; j <= k; ++j) c.expect(h.dims[j] == 0, "coprime homology does not vanish");
                }
            }
    }
    {
        auto R = Ring::gf(3);
        Module P(ModulePresentation::representable(R, 2, 3, {1, 0}));
        for (std::size_t n = 1; n <= 3; ++n) {
            const auto h = homology_dims(module_rep(P, {n, 0}).rep, 0);
            c.expect(h.dims[0] == 1 && h.coinvariants == 1, "H_0(Aut(X^n); P_X) != 1");
            ++instances;
        }
    }
    for (auto [p, ells] : std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>>{{3, {2, 5}}, {5, {2, 3}}}) {
        auto R = Ring::gf(p);
        for (auto V : labels_upto(*R, 4))
            for (auto W : labels_upto(*R, 4 - V.rank)) {
                EnumOptions big;
                big.budget = 100'000'000;
                const auto S = direct_sum(OrthForm::standard(R, V), OrthForm::standard(R, W));
                if (count_isometries(S, S, big) > 2500) continue;
                for (auto ell : ells) {
                    const auto s = shapiro_check(R, V, W, 1, ell);
                    c.expect(s.agree(), "Shapiro fails at GF(" + std::to_string(p) + ") V rank " + std::to_string(V.rank) + " W rank " +
                                            std::to_string(W.rank) + " l = " + std::to_string(ell));
                    shapiro += 1;
                    instances += 2;
                }
            }
    }
    c.note << instances << " bar complexes (dd = 0, H_0 = coinvariants), " << coprime << " coprime, " << shapiro << " Shapiro instances at k <= 1";
}

// -- 11 --------------------------------------------------------------------------

std::pair<int, std::string> run_cli(const std::string& args) {
    const std::string cmd = std::string(ORTHSTAB_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

void cli(Check& c) {
    const std::string F = ORTHSTAB_FIXTURES;
    const std::vector<std::string> runs{
        "classify --form " + F + "/form_diag23_gf5.json",
        "canon --form " + F + "/form_z45.json",
        "isom-enum --form " + F + "/form_id2_gf3.json --target " + F + "/form_id3_gf3.json",
        "group --form " + F + "/form_id2_gf3.json",
        "factor-surj --morphism " + F + "/surjection_gf3.json",
        "factor-isom --morphism " + F + "/isometry_gf3.json",
        "wpo-cmp --morphism " + F + "/toy_wpo.json",
        "insertion --morphism " + F + "/toy_wpo.json",
        "module-eval --module " + F + "/module_torsion_gf3.json",
        "sigma --module " + F + "/module_px_gf3.json --object 3",
        "kan --module " + F + "/module_px_gf3.json --object 3 --N 2",
        "torsion --module " + F + "/module_torsion_gf3.json --object 1",
        "homology --module " + F + "/module_px_gf3.json --object 2 --k 2",
        "stability-scan --module " + F + "/module_px_gf3.json --start 1 --stop 3 --k 1",
        "shapiro --ring " + F + "/gf3.json --V 1 --W 1:1 --k 1",
    };
    for (const auto& a : runs) {
        const auto x = run_cli(a), y = run_cli(a);
        c.expect(x.first == 0, "nonzero exit: " + a);
        c.expect(x == y, "output differs between runs: " + a);
    }
    c.note << runs.size() << " subcommands byte-identical across two runs";
}

}  // namespace

int main() {
    criterion(1, "classification count", 120, classification);
    criterion(2, "canonical congruence", 60, hensel);
    criterion(3, "adapted factorization", 180, adapted);
    criterion(4, "insertion-map bullets", 120, insertion);
    criterion(5, "order axioms", 120, order_axioms);
    criterion(6, "init-term separation", 120, separation);
    criterion(7, "transitivity and counting", 300, transitivity);
    criterion(8, "sigma complex", 300, sigma);
    criterion(9, "kan comparison", 600, kan);
    criterion(10, "homology engine", 600, homology);
    criterion(11, "cli determinism", 60, cli);
    std::printf("%d criteria failed\n", failures);
    return failures ? 1 : 0;
}
