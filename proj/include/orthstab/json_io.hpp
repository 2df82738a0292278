#pragma once

// JSON readers and writers for rings, elements, matrices, forms, morphism files
// and module presentations. Output objects keep insertion order so that reports
// are byte-stable.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "form.hpp"
#include "ori_module.hpp"
#include "ring.hpp"

namespace orthstab::io {

using Json = nlohmann::ordered_json;

inline Json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw UsageError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw UsageError(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline std::int64_t as_int(const Json& j, const char* what) {
    if (!j.is_number_integer()) throw UsageError(std::string(what) + " must be an integer");
    return j.get<std::int64_t>();
}

// -- rings ---------------------------------------------------------------------

inline RingPtr ring_from_json(const Json& j) {
    if (j.is_object() && j.contains("zmod")) return Ring::zmod(static_cast<std::uint64_t>(as_int(j.at("zmod"), "zmod")));
    std::vector<LocalRingSpec> specs;
    for (const auto& f : field(j, "factors")) {
        const std::string kind = field(f, "kind").get<std::string>();
        const auto p = static_cast<std::uint32_t>(as_int(field(f, "p"), "p"));
        const auto k = f.contains("k") ? static_cast<std::uint32_t>(as_int(f.at("k"), "k")) : 1u;
        if (kind == "zpk") {
            specs.push_back(LocalRingSpec::zpk(p, k));
        } else if (kind == "gf") {
            std::vector<std::uint32_t> mod;
            if (f.contains("modulus"))
                for (const auto& c : f.at("modulus")) mod.push_back(static_cast<std::uint32_t>(as_int(c, "modulus entry")));
            specs.push_back(LocalRingSpec::gf(p, k, std::move(mod)));
        } else {
            throw UsageError("unknown factor kind '" + kind + "'");
        }
    }
    if (specs.empty()) throw UsageError("ring needs at least one factor");
    return Ring::make(std::move(specs));
}

inline Json ring_to_json(const Ring& R) {
    if (R.zmod_modulus()) return Json{{"zmod", R.zmod_modulus()}};
    Json fs = Json::array();
    for (std::size_t i = 0; i < R.num_factors(); ++i) {
        const auto& s = R.factor(i).spec;
        Json f{{"kind", s.kind == LocalKind::zpk ? "zpk" : "gf"}, {"p", s.p}, {"k", s.k}};
        if (!s.modulus.empty()) f["modulus"] = s.modulus;
        fs.push_back(std::move(f));
    }
    return Json{{"factors", std::move(fs)}};
}

// -- elements and matrices -----------------------------------------------------

/// An integer (reduced into the ring), or one entry per factor: an integer for
/// Z/p^k and GF(p), a coefficient list (constant term first) for GF(p^k).
inline Elem elem_from_json(const Ring& R, const Json& j) {
    if (j.is_number_integer()) return R.from_int(j.get<std::int64_t>());
    if (!j.is_array() || j.size() != R.num_factors()) throw UsageError("element must be an integer or one entry per factor");
    std::vector<Elem> parts;
    for (std::size_t i = 0; i < R.num_factors(); ++i) {
        const auto& f = R.factor(i);
        const Json& e = j[i];
        Elem code = 0;
        if (e.is_number_integer()) {
            const std::int64_t v = e.get<std::int64_t>();
            const std::int64_t mod = f.spec.kind == LocalKind::gf ? f.spec.p : static_cast<std::int64_t>(f.size);
            code = static_cast<Elem>(((v % mod) + mod) % mod);
        } else if (e.is_array() && f.spec.kind == LocalKind::gf) {
            if (e.size() > f.spec.k) throw UsageError("too many coefficients for GF(p^k)");
            Elem scale = 1;
            for (const auto& c : e) {
                const std::int64_t v = as_int(c, "coefficient");
                code += static_cast<Elem>(((v % f.spec.p) + f.spec.p) % f.spec.p) * scale;
                scale *= f.spec.p;
            }
        } else {
            throw UsageError("bad element entry for factor " + std::to_string(i + 1));
        }
        parts.push_back(code);
    }
    return R.from_parts(parts);
}

/// Integers for Z/m and single-factor rings with scalar entries; per-factor arrays otherwise.
inline Json elem_to_json(const Ring& R, Elem a) {
    if (R.zmod_modulus()) return R.to_zmod_integer(a);
    auto part = [&](std::size_t i) -> Json {
        const auto& f = R.factor(i);
        Elem v = R.part(a, i);
        if (f.spec.kind == LocalKind::zpk || f.spec.k == 1) return v;
        Json c = Json::array();
        for (std::uint32_t t = 0; t < f.spec.k; ++t) c.push_back(v % f.spec.p), v /= f.spec.p;
        return c;
    };
    if (R.num_factors() == 1 && (R.factor(0).spec.kind == LocalKind::zpk || R.factor(0).spec.k == 1)) return part(0);
    Json out = Json::array();
    for (std::size_t i = 0; i < R.num_factors(); ++i) out.push_back(part(i));
    return out;
}

/// Rows of entries. An empty list is a 0 x cols matrix when cols is given.
inline Matrix matrix_from_json(const Ring& R, const Json& j, std::size_t cols_if_empty = 0) {
    if (!j.is_array()) throw UsageError("matrix must be a list of rows");
    if (j.empty()) return Matrix(0, cols_if_empty);
    const std::size_t cols = j[0].size();
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ShapeError("matrix rows have different lengths");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = elem_from_json(R, j[r][c]);
    }
    return m;
}

inline Json matrix_to_json(const Ring& R, const Matrix& m) {
    Json out = Json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(elem_to_json(R, m(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

// -- labels and forms ----------------------------------------------------------

inline Json label_to_json(const ClassLabel& l) { return Json{{"rank", l.rank}, {"nonsquare", l.nonsquare_list()}}; }

inline ClassLabel label_from_json(const Ring& R, const Json& j) {
    ClassLabel l;
    l.rank = static_cast<std::size_t>(as_int(field(j, "rank"), "rank"));
    if (j.contains("label") || j.contains("nonsquare")) {
        for (const auto& i : j.contains("label") ? j.at("label") : j.at("nonsquare")) {
            const auto k = as_int(i, "nonsquare index");
            if (k < 1 || static_cast<std::size_t>(k) > R.num_factors()) throw UsageError("nonsquare index out of range");
            l.nonsquare |= FactorMask{1} << (k - 1);
        }
    }
    if (l.rank == 0 && l.nonsquare) throw DomainError("rank-0 label has an empty nonsquare set");
    return l;
}

/// {"ring": ..., "gram": [[...]]}; the ring may be supplied separately.
inline OrthForm form_from_json(const Json& j, RingPtr ring = nullptr) {
    if (j.contains("ring")) ring = ring_from_json(j.at("ring"));
    if (!ring) throw UsageError("form needs a ring (in the file or via --ring)");
    return OrthForm::validate(ring, matrix_from_json(*ring, field(j, "gram")));
}

// -- module presentations ------------------------------------------------------

/// {"ell", "horizon", "generators": [{"rank", "label"}], "relations": [{"target"?,
/// "terms": [{"gen", "morphism", "coeff"}]}]}. A relation without a target lands
/// on the square class of its rank (label []).
inline ModulePresentation module_from_json(const Json& j, RingPtr ring = nullptr) {
    if (j.contains("ring")) ring = ring_from_json(j.at("ring"));
    if (!ring) throw UsageError("module needs a ring (in the file or via --ring)");
    ModulePresentation p;
    p.ring = ring;
    p.ell = static_cast<std::uint32_t>(as_int(field(j, "ell"), "ell"));
    p.horizon = static_cast<std::size_t>(as_int(field(j, "horizon"), "horizon"));
    std::size_t n = 0;
    for (const auto& g : field(j, "generators")) {
        const ClassLabel l = label_from_json(*ring, g);
        p.generators.push_back({l, g.contains("tag") ? g.at("tag").get<std::string>() : "g" + std::to_string(n)});
        ++n;
    }
    if (j.contains("relations"))
        for (const auto& r : j.at("relations")) {
            Relation rel;
            bool have_target = r.contains("target");
            if (have_target) rel.target = label_from_json(*ring, r.at("target"));
            for (const auto& t : field(r, "terms")) {
                RelationTerm term;
                const auto g = as_int(field(t, "gen"), "gen");
                if (g < 0 || static_cast<std::size_t>(g) >= p.generators.size()) throw UsageError("relation refers to a missing generator");
                term.gen = static_cast<std::size_t>(g);
                term.morphism = matrix_from_json(*ring, field(t, "morphism"), p.generators[term.gen].object.rank);
                term.coeff = t.contains("coeff") ? as_int(t.at("coeff"), "coeff") : 1;
                if (!have_target) {
                    rel.target = {term.morphism.rows, 0};
                    have_target = true;
                }
                rel.terms.push_back(std::move(term));
            }
            if (!have_target) throw UsageError("relation with no terms needs a target");
            p.relations.push_back(std::move(rel));
        }
    return p;
}

inline std::string dump(const Json& j) { return j.dump(); }

}  // namespace orthstab::io
