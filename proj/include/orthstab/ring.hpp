#pragma once

// Finite commutative rings with 2 a unit, presented as ordered products of
// local factors Z/p^k and GF(p^k).
//
// Elements are encoded as a single code in [0, |R|): a mixed-radix number
// whose most significant digit is factor 0. Inside a factor, Z/p^k uses the
// canonical integer in [0, p^k) and GF(p^k) uses sum c_j p^j over the
// coefficient vector (constant term first). Numeric order of codes is
// therefore lexicographic order on per-factor representative tuples.

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace orthstab {

using Elem = std::uint32_t;
/// Set of factor indices (bit i = factor i, 0-based).
using FactorMask = std::uint32_t;

enum class LocalKind {
    zpk,
    gf,
    general_local,  // reserved; not constructible in this version
};

struct LocalRingSpec {
    LocalKind kind = LocalKind::zpk;
    std::uint32_t p = 3;
    std::uint32_t k = 1;
    /// Monic modulus, constant term first, k+1 entries. Only for gf with k > 1.
    std::vector<std::uint32_t> modulus;

    friend bool operator==(const LocalRingSpec&, const LocalRingSpec&) = default;

    static LocalRingSpec zpk(std::uint32_t p, std::uint32_t k) { return {LocalKind::zpk, p, k, {}}; }
    static LocalRingSpec gf(std::uint32_t p, std::uint32_t k = 1, std::vector<std::uint32_t> modulus = {}) {
        return {LocalKind::gf, p, k, std::move(modulus)};
    }
};

namespace detail {

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::uint64_t ipow(std::uint64_t b, unsigned e) {
    std::uint64_t r = 1;
    while (e--) r *= b;
    return r;
}

// Polynomials over GF(p), constant term first, no trailing zeros.
using Poly = std::vector<std::uint32_t>;

inline void poly_trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline Poly poly_mod(Poly a, const Poly& m, std::uint32_t p) {
    // m is monic
    poly_trim(a);
    const std::size_t dm = m.size() - 1;
    while (a.size() > dm) {
        const std::uint64_t c = a.back();
        const std::size_t shift = a.size() - 1 - dm;
        for (std::size_t j = 0; j <= dm; ++j)
            a[shift + j] = static_cast<std::uint32_t>((a[shift + j] + (p - c) * m[j]) % p);
        poly_trim(a);
    }
    return a;
}

/// True when the monic polynomial m of degree k <= 4 has no monic factor of
/// degree 1..k/2 over GF(p); exhaustive trial division.
inline bool is_irreducible(const Poly& m, std::uint32_t p) {
    const std::size_t k = m.size() - 1;
    for (std::size_t deg = 1; deg <= k / 2; ++deg) {
        const std::uint64_t count = ipow(p, static_cast<unsigned>(deg));
        for (std::uint64_t code = 0; code < count; ++code) {
            Poly d(deg + 1);
            std::uint64_t c = code;
            for (std::size_t j = 0; j < deg; ++j) {
                d[j] = static_cast<std::uint32_t>(c % p);
                c /= p;
            }
            d[deg] = 1;
            if (poly_mod(m, d, p).empty()) return false;
        }
    }
    return true;
}

inline std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m) {
    std::int64_t t = 0, nt = 1;
    std::int64_t r = static_cast<std::int64_t>(m), nr = static_cast<std::int64_t>(a % m);
    while (nr != 0) {
        const std::int64_t q = r / nr;
        t -= q * nt;
        std::swap(t, nt);
        r -= q * nr;
        std::swap(r, nr);
    }
    if (r != 1) return 0;
    if (t < 0) t += static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(t);
}

}  // namespace detail

class Ring {
    struct Private {};

public:
    struct Factor {
        LocalRingSpec spec;
        Elem size = 0;          // |R_i|
        Elem residue_size = 0;  // |R_i / m_i|
        std::uint32_t length = 1;  // nilpotency length of m_i (k for Z/p^k, 1 for fields)
        Elem stride = 1;
        std::vector<char> residue_square;  // residue code -> is a nonzero square
        Elem nonsquare = 0;                // minimal local code with nonsquare residue
    };

    static constexpr Elem kNoInverse = 0xffffffffu;
    static constexpr std::size_t kTableLimit = 1024;

    Ring(Private, std::vector<LocalRingSpec> specs, std::uint64_t zmod_modulus) : zmod_(zmod_modulus) {
        if (specs.empty()) throw UsageError("ring needs at least one local factor");
        if (specs.size() > 16) throw UsageError("at most 16 local factors supported");
        std::uint64_t total = 1;
        for (auto& s : specs) {
            Factor f;
            validate_spec(s);
            f.spec = s;
            if (s.kind == LocalKind::zpk) {
                f.size = static_cast<Elem>(detail::ipow(s.p, s.k));
                f.residue_size = s.p;
                f.length = s.k;
            } else {
                f.size = static_cast<Elem>(detail::ipow(s.p, s.k));
                f.residue_size = f.size;
                f.length = 1;
            }
            total *= f.size;
            if (total > (1ull << 31)) throw UsageError("ring too large (|R| must stay below 2^31)");
            factors_.push_back(std::move(f));
        }
        size_ = static_cast<Elem>(total);
        Elem stride = 1;
        for (std::size_t i = factors_.size(); i-- > 0;) {
            factors_[i].stride = stride;
            stride *= factors_[i].size;
        }
        for (std::size_t i = 0; i < factors_.size(); ++i) build_residue_squares(i);
        build_tables();
    }

    static std::shared_ptr<const Ring> make(std::vector<LocalRingSpec> specs) {
        return finish(std::make_shared<Ring>(Private{}, std::move(specs), 0));
    }

    /// Z/m for odd m >= 3, normalized to a product of Z/p^k in ascending p.
    static std::shared_ptr<const Ring> zmod(std::uint64_t m) {
        if (m < 3 || m % 2 == 0) throw UsageError("zmod requires an odd modulus >= 3 (2 must be a unit)");
        std::vector<LocalRingSpec> specs;
        std::uint64_t rest = m;
        for (std::uint64_t p = 3; p * p <= rest; p += 2) {
            std::uint32_t k = 0;
            while (rest % p == 0) {
                rest /= p;
                ++k;
            }
            if (k) specs.push_back(LocalRingSpec::zpk(static_cast<std::uint32_t>(p), k));
        }
        if (rest > 1) specs.push_back(LocalRingSpec::zpk(static_cast<std::uint32_t>(rest), 1));
        return finish(std::make_shared<Ring>(Private{}, std::move(specs), m));
    }

    static std::shared_ptr<const Ring> gf(std::uint32_t p, std::uint32_t k = 1, std::vector<std::uint32_t> modulus = {}) {
        return make({LocalRingSpec::gf(p, k, std::move(modulus))});
    }

    friend bool operator==(const Ring& a, const Ring& b) {
        if (a.factors_.size() != b.factors_.size()) return false;
        for (std::size_t i = 0; i < a.factors_.size(); ++i)
            if (!(a.factors_[i].spec == b.factors_[i].spec)) return false;
        return true;
    }

    Elem size() const { return size_; }
    std::size_t num_factors() const { return factors_.size(); }
    const Factor& factor(std::size_t i) const { return factors_.at(i); }
    std::uint64_t zmod_modulus() const { return zmod_; }
    FactorMask all_factors() const { return static_cast<FactorMask>((1ull << factors_.size()) - 1); }

    /// Single-factor ring R_i (shares arithmetic with factor i of this ring).
    const std::shared_ptr<const Ring>& factor_ring(std::size_t i) const { return factor_rings_.at(i); }

    Elem zero() const { return 0; }
    Elem one() const { return one_; }

    Elem part(Elem a, std::size_t i) const { return (a / factors_[i].stride) % factors_[i].size; }
    std::vector<Elem> parts(Elem a) const {
        std::vector<Elem> out(factors_.size());
        for (std::size_t i = 0; i < factors_.size(); ++i) out[i] = part(a, i);
        return out;
    }
    Elem from_parts(const std::vector<Elem>& parts) const {
        if (parts.size() != factors_.size()) throw UsageError("element needs one entry per factor");
        Elem code = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (parts[i] >= factors_[i].size) throw UsageError("element part out of range");
            code += parts[i] * factors_[i].stride;
        }
        return code;
    }

    /// Image of an integer under Z -> R.
    Elem from_int(std::int64_t n) const {
        Elem code = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const auto& f = factors_[i];
            const std::int64_t mod = f.spec.kind == LocalKind::zpk ? f.size : f.spec.p;
            std::int64_t r = n % mod;
            if (r < 0) r += mod;
            code += static_cast<Elem>(r) * f.stride;
        }
        return code;
    }

    // -- arithmetic ---------------------------------------------------------

    Elem add(Elem a, Elem b) const {
        if (!add_.empty()) return add_[static_cast<std::size_t>(a) * size_ + b];
        Elem out = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i)
            out += local_add(i, part(a, i), part(b, i)) * factors_[i].stride;
        return out;
    }
    Elem mul(Elem a, Elem b) const {
        if (!mul_.empty()) return mul_[static_cast<std::size_t>(a) * size_ + b];
        Elem out = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i)
            out += local_mul(i, part(a, i), part(b, i)) * factors_[i].stride;
        return out;
    }
    Elem neg(Elem a) const {
        if (!neg_.empty()) return neg_[a];
        Elem out = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) out += local_neg(i, part(a, i)) * factors_[i].stride;
        return out;
    }
    Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }

    bool is_unit(Elem a) const {
        if (!inv_.empty()) return inv_[a] != kNoInverse;
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (!local_is_unit(i, part(a, i))) return false;
        return true;
    }
    std::vector<bool> unit_flags(Elem a) const {
        std::vector<bool> out(factors_.size());
        for (std::size_t i = 0; i < factors_.size(); ++i) out[i] = local_is_unit(i, part(a, i));
        return out;
    }
    /// First factor where a is not a unit, if any.
    std::optional<std::size_t> nonunit_factor(Elem a) const {
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (!local_is_unit(i, part(a, i))) return i;
        return std::nullopt;
    }
    Elem inv(Elem a) const {
        if (!inv_.empty() && inv_[a] != kNoInverse) return inv_[a];
        Elem out = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const Elem pa = part(a, i);
            if (!local_is_unit(i, pa))
                throw DomainError("element " + to_string(a) + " is not invertible in factor " + std::to_string(i + 1));
            out += local_inv(i, pa) * factors_[i].stride;
        }
        return out;
    }

    // -- residues and squares -----------------------------------------------

    /// pi_i(a): residue code in R_i / m_i (GF(p) integer for Z/p^k, the element itself for GF).
    Elem residue(Elem a, std::size_t i) const {
        const Elem pa = part(a, i);
        return factors_[i].spec.kind == LocalKind::zpk ? pa % factors_[i].spec.p : pa;
    }

    bool residue_is_square(std::size_t i, Elem residue_code) const { return factors_[i].residue_square[residue_code] != 0; }

    /// Factors where the residue of the unit u is a nonsquare.
    FactorMask square_class(Elem u) const {
        FactorMask mask = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const Elem pa = part(u, i);
            if (!local_is_unit(i, pa))
                throw DomainError("square class of non-unit " + to_string(u) + " (factor " + std::to_string(i + 1) + ")");
            if (!residue_is_square(i, residue(u, i))) mask |= FactorMask{1} << i;
        }
        return mask;
    }

    /// A square root of the unit u, or nullopt when some residue is a nonsquare.
    /// Residue roots are found exhaustively, then lifted through powers of the
    /// maximal ideal with the simple-root Newton step v <- v - (v^2 - u)/(2v).
    /// Per factor the smaller of the two roots +-v is returned.
    std::optional<Elem> sqrt_unit(Elem u) const {
        if (square_class(u) != 0) return std::nullopt;
        Elem out = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const Elem ui = part(u, i);
            Elem v = residue_root(i, ui);
            for (std::uint32_t step = 0; step < 64 && local_mul(i, v, v) != ui; ++step) {
                const Elem f = local_add(i, local_mul(i, v, v), local_neg(i, ui));
                const Elem df = local_add(i, v, v);
                v = local_add(i, v, local_neg(i, local_mul(i, f, local_inv(i, df))));
            }
            if (local_mul(i, v, v) != ui) throw InternalError("Hensel lifting did not converge");
            out += std::min(v, local_neg(i, v)) * factors_[i].stride;
        }
        return out;
    }

    /// Minimal local code in factor i whose residue is a nonsquare.
    Elem canonical_nonsquare(std::size_t i) const { return factors_.at(i).nonsquare; }

    /// x_I: canonical nonsquare in each factor of I, 1 elsewhere.
    Elem nonsquare_unit(FactorMask mask) const {
        Elem out = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const Elem pa = (mask >> i) & 1u ? factors_[i].nonsquare : local_one(i);
            out += pa * factors_[i].stride;
        }
        return out;
    }

    // -- local (single factor) arithmetic -----------------------------------

    Elem local_one(std::size_t i) const { return 1; (void)i; }
    Elem local_add(std::size_t i, Elem a, Elem b) const {
        const auto& f = factors_[i];
        if (f.spec.kind == LocalKind::zpk || f.spec.k == 1) {
            const Elem s = a + b;
            return s >= f.size ? s - f.size : s;
        }
        Elem out = 0, scale = 1;
        const Elem p = f.spec.p;
        for (std::uint32_t j = 0; j < f.spec.k; ++j) {
            out += ((a % p + b % p) % p) * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        return out;
    }
    Elem local_neg(std::size_t i, Elem a) const {
        const auto& f = factors_[i];
        if (f.spec.kind == LocalKind::zpk || f.spec.k == 1) return a == 0 ? 0 : f.size - a;
        Elem out = 0, scale = 1;
        const Elem p = f.spec.p;
        for (std::uint32_t j = 0; j < f.spec.k; ++j) {
            out += ((p - a % p) % p) * scale;
            a /= p;
            scale *= p;
        }
        return out;
    }
    Elem local_mul(std::size_t i, Elem a, Elem b) const {
        const auto& f = factors_[i];
        if (f.spec.kind == LocalKind::zpk || f.spec.k == 1)
            return static_cast<Elem>((static_cast<std::uint64_t>(a) * b) % f.size);
        const std::uint32_t p = f.spec.p, k = f.spec.k;
        std::uint64_t da[8] = {}, db[8] = {}, prod[16] = {};
        for (std::uint32_t j = 0; j < k; ++j) {
            da[j] = a % p;
            db[j] = b % p;
            a /= p;
            b /= p;
        }
        for (std::uint32_t x = 0; x < k; ++x)
            for (std::uint32_t y = 0; y < k; ++y) prod[x + y] = (prod[x + y] + da[x] * db[y]) % p;
        for (std::uint32_t d = 2 * k - 2; d >= k; --d) {
            const std::uint64_t c = prod[d];
            if (c == 0) continue;
            prod[d] = 0;
            for (std::uint32_t j = 0; j < k; ++j) prod[d - k + j] = (prod[d - k + j] + (p - c) * f.spec.modulus[j]) % p;
        }
        Elem out = 0, scale = 1;
        for (std::uint32_t j = 0; j < k; ++j) {
            out += static_cast<Elem>(prod[j]) * scale;
            scale *= p;
        }
        return out;
    }
    bool local_is_unit(std::size_t i, Elem a) const {
        const auto& f = factors_[i];
        if (f.spec.kind == LocalKind::zpk) return a % f.spec.p != 0;
        return a != 0;
    }
    Elem local_inv(std::size_t i, Elem a) const {
        const auto& f = factors_[i];
        if (!local_is_unit(i, a)) throw DomainError("non-unit in factor " + std::to_string(i + 1));
        if (f.spec.kind == LocalKind::zpk || f.spec.k == 1) return static_cast<Elem>(detail::inv_mod(a, f.size));
        // a^(q-2) in GF(q)
        std::uint64_t e = f.size - 2;
        Elem base = a, r = 1;
        while (e) {
            if (e & 1) r = local_mul(i, r, base);
            base = local_mul(i, base, base);
            e >>= 1;
        }
        return r;
    }
    /// m-adic valuation in factor i (length() for zero).
    std::uint32_t local_valuation(std::size_t i, Elem a) const {
        const auto& f = factors_[i];
        if (a == 0) return f.length;
        if (f.spec.kind != LocalKind::zpk) return 0;
        std::uint32_t v = 0;
        while (a % f.spec.p == 0) {
            a /= f.spec.p;
            ++v;
        }
        return v;
    }
    /// b / a for v(b) >= v(a) in factor i: some c with a*c = b.
    Elem local_divide(std::size_t i, Elem b, Elem a) const {
        const auto& f = factors_[i];
        if (f.spec.kind != LocalKind::zpk) return local_mul(i, b, local_inv(i, a));
        const std::uint32_t va = local_valuation(i, a);
        if (local_valuation(i, b) < va) throw InternalError("local_divide: valuation too small");
        Elem pv = 1;
        for (std::uint32_t j = 0; j < va; ++j) pv *= f.spec.p;
        const Elem ua = a / pv, ub = b / pv;
        return local_mul(i, ub, local_inv(i, ua));
    }

    // -- printing -----------------------------------------------------------

    std::string part_to_string(std::size_t i, Elem a) const {
        const auto& f = factors_[i];
        if (f.spec.kind == LocalKind::zpk || f.spec.k == 1) return std::to_string(a);
        std::ostringstream os;
        os << '[';
        for (std::uint32_t j = 0; j < f.spec.k; ++j) {
            if (j) os << ',';
            os << a % f.spec.p;
            a /= f.spec.p;
        }
        os << ']';
        return os.str();
    }
    std::string to_string(Elem a) const {
        if (zmod_) return std::to_string(to_zmod_integer(a));
        if (factors_.size() == 1) return part_to_string(0, a);
        std::string s = "(";
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (i) s += ',';
            s += part_to_string(i, part(a, i));
        }
        return s + ")";
    }
    std::string describe() const {
        std::string s;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const auto& sp = factors_[i].spec;
            if (i) s += " x ";
            if (sp.kind == LocalKind::zpk)
                s += "Z/" + std::to_string(factors_[i].size);
            else
                s += "GF(" + std::to_string(factors_[i].size) + ")";
        }
        return s;
    }

    /// CRT integer for rings built from Z/m (0 <= result < m).
    std::uint64_t to_zmod_integer(Elem a) const {
        if (!zmod_) throw UsageError("ring was not built from Z/m");
        std::uint64_t x = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const std::uint64_t mi = factors_[i].size, Mi = zmod_ / mi;
            const std::uint64_t yi = detail::inv_mod(Mi % mi, mi);
            x = (x + static_cast<unsigned __int128>(part(a, i)) * Mi % zmod_ * yi % zmod_) % zmod_;
        }
        return x;
    }

private:
    static std::shared_ptr<const Ring> finish(std::shared_ptr<Ring> r) {
        if (r->factors_.size() == 1) {
            r->factor_rings_.push_back(r);
        } else {
            for (const auto& f : r->factors_) r->factor_rings_.push_back(make({f.spec}));
        }
        return r;
    }

    static void validate_spec(const LocalRingSpec& s) {
        if (s.kind == LocalKind::general_local)
            throw UsageError("general finite local rings are not supported in this version");
        if (!detail::is_prime(s.p)) throw UsageError("p = " + std::to_string(s.p) + " is not prime");
        if (s.p == 2) throw UsageError("p = 2 is excluded: 2 must be a unit");
        if (s.k < 1) throw UsageError("k must be positive");
        if (s.kind == LocalKind::gf && s.k > 1) {
            if (s.k > 4) throw UsageError("GF(p^k) supported for k <= 4 only");
            if (s.modulus.size() != s.k + 1) throw UsageError("GF(p^k) needs a monic modulus with k+1 coefficients");
            if (s.modulus.back() != 1) throw UsageError("modulus polynomial must be monic");
            for (auto c : s.modulus)
                if (c >= s.p) throw UsageError("modulus coefficient out of range");
            if (!detail::is_irreducible(s.modulus, s.p)) throw UsageError("modulus polynomial is reducible mod p");
        }
    }

    void build_residue_squares(std::size_t i) {
        auto& f = factors_[i];
        f.residue_square.assign(f.residue_size, 0);
        const bool prime_residue = f.spec.kind == LocalKind::zpk || f.spec.k == 1;
        for (Elem x = 1; x < f.residue_size; ++x) {
            const Elem sq = prime_residue ? static_cast<Elem>(static_cast<std::uint64_t>(x) * x % f.spec.p)
                                          : local_mul(i, x, x);
            f.residue_square[sq] = 1;
        }
        for (Elem c = 0; c < f.size; ++c) {
            const Elem r = f.spec.kind == LocalKind::zpk ? c % f.spec.p : c;
            if (r != 0 && !f.residue_square[r]) {
                f.nonsquare = c;
                break;
            }
        }
    }

    Elem residue_root(std::size_t i, Elem u) const {
        const auto& f = factors_[i];
        if (f.spec.kind == LocalKind::zpk) {
            const Elem r = u % f.spec.p;
            for (Elem x = 1; x < f.spec.p; ++x)
                if (static_cast<std::uint64_t>(x) * x % f.spec.p == r) return x;
        } else {
            for (Elem x = 1; x < f.size; ++x)
                if (local_mul(i, x, x) == u) return x;
        }
        throw InternalError("no residue square root");
    }

    void build_tables() {
        one_ = 0;
        for (const auto& f : factors_) one_ += f.stride;
        if (size_ <= (1u << 16)) {
            neg_.resize(size_);
            inv_.resize(size_);
            for (Elem a = 0; a < size_; ++a) {
                Elem n = 0, v = 0;
                bool unit = true;
                for (std::size_t i = 0; i < factors_.size(); ++i) {
                    const Elem pa = part(a, i);
                    n += local_neg(i, pa) * factors_[i].stride;
                    if (local_is_unit(i, pa))
                        v += local_inv(i, pa) * factors_[i].stride;
                    else
                        unit = false;
                }
                neg_[a] = n;
                inv_[a] = unit ? v : kNoInverse;
            }
        }
        if (size_ <= kTableLimit) {
            const std::size_t n = size_;
            add_.resize(n * n);
            mul_.resize(n * n);
            for (Elem a = 0; a < size_; ++a)
                for (Elem b = 0; b < size_; ++b) {
                    Elem s = 0, m = 0;
                    for (std::size_t i = 0; i < factors_.size(); ++i) {
                        s += local_add(i, part(a, i), part(b, i)) * factors_[i].stride;
                        m += local_mul(i, part(a, i), part(b, i)) * factors_[i].stride;
                    }
                    add_[a * n + b] = s;
                    mul_[a * n + b] = m;
                }
        }
    }

    std::vector<Factor> factors_;
    std::vector<std::shared_ptr<const Ring>> factor_rings_;
    Elem size_ = 0;
    Elem one_ = 1;
    std::uint64_t zmod_ = 0;
    std::vector<Elem> add_, mul_, neg_, inv_;
};

using RingPtr = std::shared_ptr<const Ring>;

/// An element together with its ring; arithmetic checks that rings agree.
class RingElem {
public:
    RingElem(RingPtr ring, Elem code) : ring_(std::move(ring)), code_(code) {
        if (!ring_) throw UsageError("RingElem without ring");
        if (code_ >= ring_->size()) throw UsageError("element code out of range");
    }
    static RingElem from_int(RingPtr ring, std::int64_t n) {
        const Elem c = ring->from_int(n);
        return RingElem(std::move(ring), c);
    }
    static RingElem from_parts(RingPtr ring, const std::vector<Elem>& parts) {
        const Elem c = ring->from_parts(parts);
        return RingElem(std::move(ring), c);
    }

    const Ring& ring() const { return *ring_; }
    const RingPtr& ring_ptr() const { return ring_; }
    Elem code() const { return code_; }
    std::vector<Elem> parts() const { return ring_->parts(code_); }

    friend RingElem operator+(const RingElem& a, const RingElem& b) { return {check(a, b), a.ring_->add(a.code_, b.code_)}; }
    friend RingElem operator-(const RingElem& a, const RingElem& b) { return {check(a, b), a.ring_->sub(a.code_, b.code_)}; }
    friend RingElem operator*(const RingElem& a, const RingElem& b) { return {check(a, b), a.ring_->mul(a.code_, b.code_)}; }
    friend bool operator==(const RingElem& a, const RingElem& b) { return check(a, b) && a.code_ == b.code_; }

    bool is_unit() const { return ring_->is_unit(code_); }
    std::vector<bool> unit_flags() const { return ring_->unit_flags(code_); }
    RingElem inverse() const { return {ring_, ring_->inv(code_)}; }
    Elem residue(std::size_t factor) const {
        if (factor >= ring_->num_factors()) throw UsageError("factor index out of range");
        return ring_->residue(code_, factor);
    }
    FactorMask square_class() const { return ring_->square_class(code_); }
    std::optional<RingElem> sqrt() const {
        auto r = ring_->sqrt_unit(code_);
        if (!r) return std::nullopt;
        return RingElem(ring_, *r);
    }
    std::string to_string() const { return ring_->to_string(code_); }

private:
    static const RingPtr& check(const RingElem& a, const RingElem& b) {
        if (a.ring_ != b.ring_ && !(*a.ring_ == *b.ring_)) throw UsageError("ring mismatch in arithmetic");
        return a.ring_;
    }

    RingPtr ring_;
    Elem code_;
};

}  // namespace orthstab
