#pragma once

/**
 * @file numtheory.hpp
 * @brief Exact 64-bit integer number theory: gcd/lcm, linear congruences,
 * Chinese remaindering and trial-division factorization.
 *
 * Every multiplication that can grow a value goes through checked_mul, which
 * throws std::overflow_error instead of wrapping.
 */

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace torusline {

using i64 = std::int64_t;

inline i64 checked_mul(i64 a, i64 b) {
    i64 r = 0;
    if (__builtin_mul_overflow(a, b, &r)) {
        throw std::overflow_error("integer overflow in " + std::to_string(a) + " * " +
                                  std::to_string(b));
    }
    return r;
}

inline i64 checked_add(i64 a, i64 b) {
    i64 r = 0;
    if (__builtin_add_overflow(a, b, &r)) {
        throw std::overflow_error("integer overflow in " + std::to_string(a) + " + " +
                                  std::to_string(b));
    }
    return r;
}

inline i64 checked_sub(i64 a, i64 b) {
    i64 r = 0;
    if (__builtin_sub_overflow(a, b, &r)) {
        throw std::overflow_error("integer overflow in " + std::to_string(a) + " - " +
                                  std::to_string(b));
    }
    return r;
}

/// Least non-negative residue of a modulo n (n >= 1).
constexpr i64 mod_floor(i64 a, i64 n) {
    i64 r = a % n;
    return r < 0 ? r + n : r;
}

/// gcd of the absolute values; gcd(0,0) = 0.
constexpr i64 gcd(i64 a, i64 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline i64 lcm(i64 a, i64 b) {
    if (a < 1 || b < 1) {
        throw std::invalid_argument("lcm requires positive arguments");
    }
    return checked_mul(a / gcd(a, b), b);
}

struct ExtendedGcd {
    i64 g;  // gcd(a, b) >= 0
    i64 x;  // a*x + b*y = g
    i64 y;
};

constexpr ExtendedGcd extended_gcd(i64 a, i64 b) {
    i64 old_r = a, r = b;
    i64 old_s = 1, s = 0;
    i64 old_t = 0, t = 1;
    while (r != 0) {
        i64 q = old_r / r;
        i64 tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
    }
    if (old_r < 0) {
        return {-old_r, -old_s, -old_t};
    }
    return {old_r, old_s, old_t};
}

/// a*b mod n without overflow for n < 2^62 (uses 128-bit intermediate).
constexpr i64 mul_mod(i64 a, i64 b, i64 n) {
    __int128 r = static_cast<__int128>(mod_floor(a, n)) * mod_floor(b, n);
    return static_cast<i64>(r % n);
}

/// The set {k : k ≡ residue (mod modulus)}, with 0 <= residue < modulus.
struct ResidueClass {
    i64 residue = 0;
    i64 modulus = 1;

    ResidueClass() = default;
    ResidueClass(i64 r, i64 m) : residue(0), modulus(m) {
        if (m < 1) {
            throw std::invalid_argument("residue class modulus must be positive");
        }
        residue = mod_floor(r, m);
    }

    bool contains(i64 k) const { return mod_floor(k, modulus) == residue; }

    friend bool operator==(const ResidueClass&, const ResidueClass&) = default;
};

/// All solutions of a*k ≡ b (mod n), or nullopt when gcd(a,n) does not divide b.
inline std::optional<ResidueClass> solve_linear_congruence(i64 a, i64 b, i64 n) {
    if (n < 1) {
        throw std::invalid_argument("congruence modulus must be positive");
    }
    a = mod_floor(a, n);
    b = mod_floor(b, n);
    const auto [g, x, y] = extended_gcd(a, n);
    if (g == 0) {
        // a ≡ 0 and n == 0 cannot happen (n >= 1); g == 0 only if a == n == 0.
        return std::nullopt;
    }
    if (b % g != 0) {
        return std::nullopt;
    }
    const i64 reduced = n / g;
    // a/g * x ≡ 1 (mod n/g)
    return ResidueClass(mul_mod(x, b / g, reduced), reduced);
}

/// Intersection of two residue classes; nullopt iff the residues disagree
/// modulo gcd of the moduli.
inline std::optional<ResidueClass> crt(const ResidueClass& r1, const ResidueClass& r2) {
    const i64 m = r1.modulus;
    const i64 n = r2.modulus;
    const auto [g, p, q] = extended_gcd(m, n);
    const i64 diff = r2.residue - r1.residue;
    if (diff % g != 0) {
        return std::nullopt;
    }
    const i64 l = lcm(m, n);
    // x = r1 + m * t, with m*t ≡ diff (mod n)  =>  t ≡ (diff/g) * p (mod n/g)
    const i64 ng = n / g;
    const i64 t = mul_mod(diff / g, p, ng);
    const __int128 x = static_cast<__int128>(r1.residue) + static_cast<__int128>(m) * t;
    return ResidueClass(static_cast<i64>(x % l), l);
}

struct PrimePower {
    i64 prime;
    int exponent;

    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Primes strictly increasing, exponents >= 1; empty for 1.
struct PrimeFactorization {
    std::vector<PrimePower> factors;

    i64 value() const {
        i64 v = 1;
        for (const auto& f : factors) {
            for (int e = 0; e < f.exponent; ++e) v = checked_mul(v, f.prime);
        }
        return v;
    }

    bool is_prime_power() const { return factors.size() == 1; }

    friend bool operator==(const PrimeFactorization&, const PrimeFactorization&) = default;
};

inline PrimeFactorization factorize(i64 n) {
    if (n < 1) {
        throw std::invalid_argument("factorize requires a positive integer");
    }
    PrimeFactorization out;
    for (i64 p = 2; p <= n / p; p += (p == 2 ? 1 : 2)) {
        if (n % p != 0) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.factors.push_back({p, e});
    }
    if (n > 1) out.factors.push_back({n, 1});
    return out;
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 d = 2; d <= n / d; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

/// p^e with overflow checking.
inline i64 ipow(i64 p, int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) r = checked_mul(r, p);
    return r;
}

/// Exponent of the largest power of p dividing n (n != 0).
inline int valuation(i64 n, i64 p) {
    int e = 0;
    while (n != 0 && n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

}  // namespace torusline
