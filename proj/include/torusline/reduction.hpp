#pragma once

/**
 * @file reduction.hpp
 * @brief Transporting tau values between tori, the sequences sigma_z(n) = tau_{z,n},
 * and their periods.
 *
 * tau_{xm,yn} = tau_{m,n} whenever gcd(x,y) = gcd(m,y) = gcd(n,x) = 1 and
 * (m,n) != (1,1). In particular prime-power factors of one coordinate whose
 * prime does not divide the other coordinate can be dropped, and sigma_z(n)
 * depends only on the part of n supported on the primes of z. A witness on a
 * torus stays valid on any torus whose dimensions are multiples, so
 * tau_{xm,yn} >= tau_{m,n}.
 */

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "torusline/cache.hpp"
#include "torusline/construction.hpp"
#include "torusline/numtheory.hpp"
#include "torusline/solver.hpp"
#include "torusline/torus.hpp"

namespace torusline {

struct GcdConditions {
    i64 gcd_x_y = 0;
    i64 gcd_m_y = 0;
    i64 gcd_n_x = 0;

    bool hold() const { return gcd_x_y == 1 && gcd_m_y == 1 && gcd_n_x == 1; }
};

/// tau(from) = tau(to) with from = (x*to.m, y*to.n).
struct ReductionStep {
    TorusDims from;
    TorusDims to;
    i64 x = 1;
    i64 y = 1;
    GcdConditions conditions;

    static ReductionStep make(const TorusDims& from, const TorusDims& to) {
        if (from.m % to.m != 0 || from.n % to.n != 0) {
            throw std::invalid_argument("reduction target must divide the source torus");
        }
        ReductionStep s{from, to, from.m / to.m, from.n / to.n, {}};
        s.conditions = {gcd(s.x, s.y), gcd(to.m, s.y), gcd(to.n, s.x)};
        s.validate();
        return s;
    }

    void validate() const {
        if (from.m != checked_mul(x, to.m) || from.n != checked_mul(y, to.n)) {
            throw std::logic_error("reduction step dimensions are inconsistent");
        }
        const GcdConditions actual{gcd(x, y), gcd(to.m, y), gcd(to.n, x)};
        if (!actual.hold()) {
            throw std::logic_error("reduction step violates gcd(x,y) = gcd(m,y) = gcd(n,x) = 1");
        }
        if (to.m == 1 && to.n == 1) {
            throw std::logic_error("reduction step targets the 1x1 torus");
        }
    }
};

struct StripResult {
    TorusDims reduced;
    std::vector<ReductionStep> steps;
};

/// Drops every prime power of m whose prime does not divide n, then the same
/// for n, one validated step per prime. Coprime inputs come back unchanged.
inline StripResult strip_coprime(const TorusDims& dims) {
    StripResult out{dims, {}};
    if (dims.gcd_mn() == 1) return out;
    TorusDims cur = dims;
    for (const auto& f : factorize(dims.m).factors) {
        if (dims.n % f.prime == 0) continue;
        const TorusDims next(cur.m / ipow(f.prime, f.exponent), cur.n);
        out.steps.push_back(ReductionStep::make(cur, next));
        cur = next;
    }
    for (const auto& f : factorize(dims.n).factors) {
        if (dims.m % f.prime == 0) continue;
        const TorusDims next(cur.m, cur.n / ipow(f.prime, f.exponent));
        out.steps.push_back(ReductionStep::make(cur, next));
        cur = next;
    }
    out.reduced = cur;
    return out;
}

/// The part of n supported on primes dividing z.
inline i64 core_wrt(i64 n, i64 z) {
    i64 core = 1;
    for (const auto& f : factorize(n).factors) {
        if (z % f.prime == 0) core = checked_mul(core, ipow(f.prime, f.exponent));
    }
    return core;
}

struct SigmaEntry {
    i64 z = 2;
    i64 n = 1;
    i64 value = 0;
    Method method = Method::search;
};

enum class PeriodKind { proved_prime_power, empirical };

inline std::string_view to_string(PeriodKind k) {
    return k == PeriodKind::proved_prime_power ? "proved_prime_power" : "empirical";
}

struct PeriodReport {
    i64 z = 2;
    i64 period = 1;
    PeriodKind kind = PeriodKind::empirical;
    std::vector<SigmaEntry> evidence;
    std::optional<i64> first_max_index;
};

/// Status of one class {n : gcd(n, M) = r} in a gcd-class table of sigma_z.
enum class ClassStatus {
    proved_bound,      // value meets 2 gcd(z, r); every multiple of r attains it
    proved_reduction,  // every class member has the same prime core as r
    proved_formula,    // the closed form gives the same value on the whole class
    representative,    // only verified at n = r; class-wide value is open
    out_of_budget,
};

inline std::string_view to_string(ClassStatus s) {
    switch (s) {
        case ClassStatus::proved_bound: return "proved_bound";
        case ClassStatus::proved_reduction: return "proved_reduction";
        case ClassStatus::proved_formula: return "proved_formula";
        case ClassStatus::representative: return "representative_only";
        case ClassStatus::out_of_budget: return "out_of_budget";
    }
    return "out_of_budget";
}

struct ClassCell {
    i64 representative = 1;  // r = gcd(n, M)
    std::optional<i64> value;
    std::optional<i64> best_so_far;  // when out of budget
    ClassStatus status = ClassStatus::out_of_budget;
};

/// Resolves tau values through reductions, closed forms, a cache and the
/// exact search, in that order. Results computed by search are cached.
class TauResolver {
public:
    explicit TauResolver(SearchOptions opts = {}, TauCache* cache = nullptr)
        : opts_(std::move(opts)), cache_(cache), memo_(std::make_unique<TauCache>("", silent())) {}

    const SearchOptions& options() const { return opts_; }

    TauResult resolve(const TorusDims& dims) {
        const auto start = std::chrono::steady_clock::now();
        if (dims.gcd_mn() == 1) {
            std::vector<Point> pts{{0, 0}};
            if (dims.m > 1) pts.push_back({1, 0});
            else if (dims.n > 1) pts.push_back({0, 1});
            TauResult r;
            r.dims = dims;
            r.value = static_cast<i64>(pts.size());
            r.witness = PointSet(dims, std::move(pts));
            r.method = Method::known_formula;
            r.elapsed = std::chrono::steady_clock::now() - start;
            return r;
        }
        const StripResult strip = strip_coprime(dims);
        if (strip.steps.empty()) return resolve_core(dims);
        for (const auto& step : strip.steps) step.validate();
        TauResult core = resolve_core(strip.reduced);
        TauResult r;
        r.dims = dims;
        r.value = core.value;
        r.witness = core.witness.lifted_to(dims);
        r.method = Method::reduction;
        if (!verify_no3(r.witness, opts_.enumeration_budget)) {
            throw std::logic_error("lifted witness is not valid on the larger torus");
        }
        r.elapsed = std::chrono::steady_clock::now() - start;
        return r;
    }

    SigmaEntry sigma(i64 z, i64 n) {
        check_z(z);
        if (n < 1) throw std::invalid_argument("sigma index must be positive");
        const i64 core = core_wrt(n, z);
        const TauResult r = resolve(TorusDims(z, core));
        const Method m = core != n ? Method::reduction : r.method;
        return {z, n, r.value, m};
    }

    std::vector<SigmaEntry> sigma_table(i64 z, i64 n_max) {
        check_z(z);
        std::vector<SigmaEntry> out;
        for (i64 n = 1; n <= n_max; ++n) out.push_back(sigma(z, n));
        return out;
    }

    /// Scans sigma_{p^a}(p^k) for k = 0, 1, ... until it reaches 2 p^a; that
    /// index is a period. The scan ends at k = (a-1)p + 2 at the latest, where
    /// the certified construction attains the maximum.
    PeriodReport period_prime_power(i64 p, int a) {
        if (!is_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
        if (a < 1) throw std::invalid_argument("exponent must be at least 1");
        const ConstructionSpec spec(p, a);
        const i64 z = spec.dims.m;
        const i64 top = 2 * z;
        const int last = static_cast<int>((a - 1) * p + 2);
        std::optional<i64> found;
        for (int k = 0; k <= last && !found; ++k) {
            const i64 n = ipow(p, k);
            if (k == last) {
                const auto cert = certify_construction(spec, opts_.enumeration_budget);
                if (!cert.tau()) {
                    throw std::runtime_error("construction failed to certify on " +
                                             std::to_string(spec.dims.m) + "x" +
                                             std::to_string(spec.dims.n));
                }
                remember_construction(spec, cert);
                found = n;
                break;
            }
            if (sigma(z, n).value == top) found = n;
        }
        PeriodReport rep;
        rep.z = z;
        rep.period = *found;
        rep.kind = PeriodKind::proved_prime_power;
        rep.first_max_index = *found;
        for (i64 n = 1; n <= *found; ++n) rep.evidence.push_back(sigma(z, n));
        return rep;
    }

    /// Smallest P <= bound/2 such that sigma_z(n) = sigma_z(n + P) whenever
    /// n + P <= bound, i.e. the window sigma_z(1..bound) repeats with period P.
    /// Observational only.
    std::optional<PeriodReport> period_empirical(i64 z, i64 bound) {
        check_z(z);
        if (bound < 1) throw std::invalid_argument("bound must be positive");
        const auto window = sigma_table(z, bound);
        for (i64 period = 1; period <= bound / 2; ++period) {
            bool ok = true;
            for (i64 n = 1; n + period <= bound && ok; ++n) {
                ok = window[static_cast<std::size_t>(n - 1)].value ==
                     window[static_cast<std::size_t>(n + period - 1)].value;
            }
            if (ok) {
                PeriodReport rep;
                rep.z = z;
                rep.period = period;
                rep.kind = PeriodKind::empirical;
                rep.evidence = window;
                return rep;
            }
        }
        return std::nullopt;
    }

    /// sigma_z over the classes gcd(n, modulus) = r for every divisor r of modulus.
    std::vector<ClassCell> gcd_class_table(i64 z, i64 modulus) {
        check_z(z);
        const auto zf = factorize(z);
        const auto mf = factorize(modulus);
        std::vector<ClassCell> out;
        for (i64 r = 1; r <= modulus; ++r) {
            if (modulus % r != 0) continue;
            ClassCell cell;
            cell.representative = r;
            try {
                cell.value = sigma(z, r).value;
            } catch (const search_budget_exhausted& e) {
                cell.best_so_far = static_cast<i64>(e.best_so_far().size());
                out.push_back(cell);
                continue;
            }
            cell.status = classify(z, r, *cell.value, zf, mf);
            out.push_back(cell);
        }
        return out;
    }

private:
    static TauCache::WarningSink silent() {
        return [](const std::string&) {};
    }

    static void check_z(i64 z) {
        if (z < 2) throw std::invalid_argument("sigma_z is defined for z greater than 1");
    }

    static ClassStatus classify(i64 z, i64 r, i64 value, const PrimeFactorization& zf,
                                const PrimeFactorization& mf) {
        auto cap = [&](i64 p) {
            for (const auto& f : mf.factors) {
                if (f.prime == p) return f.exponent;
            }
            return 0;
        };
        // On the class, v_p(n) = v_p(r) when v_p(r) is below the modulus
        // exponent and is only bounded below otherwise.
        bool exact = true;
        bool gcd_fixed = true;
        for (const auto& f : zf.factors) {
            const int v = valuation(r, f.prime);
            exact = exact && v < cap(f.prime);
            gcd_fixed = gcd_fixed && (v < cap(f.prime) || v >= f.exponent);
        }
        const i64 g = gcd(z, r);
        if (gcd_fixed && value == 2 * g) return ClassStatus::proved_bound;
        if (exact) return ClassStatus::proved_reduction;
        if (gcd_fixed && g == 1) return ClassStatus::proved_formula;
        if (gcd_fixed && is_prime(g)) {
            // The closed form only asks whether g^2 divides z or n.
            const int v = valuation(r, g);
            if (g == 2 || z % (g * g) == 0 || v < cap(g) || v >= 2) return ClassStatus::proved_formula;
        }
        return ClassStatus::representative;
    }

    void remember_construction(const ConstructionSpec& spec, const Certificate& cert) {
        TauResult r;
        r.dims = spec.dims;
        r.value = *cert.tau();
        r.witness = PointSet(spec.dims, cert.points);
        r.method = Method::bound_meet;
        r.elapsed = cert.elapsed;
        memo_->put(r);
    }

    std::optional<TauResult> lookup(const TorusDims& dims) const {
        if (auto r = memo_->get(dims)) return r;
        if (cache_) {
            if (auto r = cache_->get(dims)) {
                memo_->put(*r);
                return r;
            }
        }
        return std::nullopt;
    }

    /// Best known witness on a torus dividing `dims`, lifted onto it.
    std::optional<PointSet> best_divisor_seed(const TorusDims& dims) const {
        std::optional<PointSet> best;
        auto consider = [&](const std::vector<TauResult>& rs) {
            for (const auto& r : rs) {
                if (r.dims == dims) continue;
                if (!best || r.witness.size() > best->size()) best = r.witness.lifted_to(dims);
            }
        };
        consider(memo_->divisors_of(dims));
        if (cache_) consider(cache_->divisors_of(dims));
        return best;
    }

    TauResult resolve_core(const TorusDims& dims) {
        if (auto r = lookup(dims)) return *r;
        SearchOptions o = opts_;
        if (!o.seed_witness) o.seed_witness = best_divisor_seed(dims);
        TauResult r = tau_exact(dims, o);
        memo_->put(r);
        if (cache_) cache_->put(r);
        return r;
    }

    SearchOptions opts_;
    TauCache* cache_;
    std::unique_ptr<TauCache> memo_;
};

inline SigmaEntry sigma(i64 z, i64 n, const SearchOptions& opts = {}) {
    return TauResolver(opts).sigma(z, n);
}

inline std::vector<SigmaEntry> sigma_table(i64 z, i64 n_max, const SearchOptions& opts = {}) {
    return TauResolver(opts).sigma_table(z, n_max);
}

inline PeriodReport period_prime_power(i64 p, int a, const SearchOptions& opts = {}) {
    return TauResolver(opts).period_prime_power(p, a);
}

inline std::optional<PeriodReport> period_empirical(i64 z, i64 bound, const SearchOptions& opts = {}) {
    return TauResolver(opts).period_empirical(z, bound);
}

}  // namespace torusline
