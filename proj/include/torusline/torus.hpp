#pragma once

/**
 * @file torus.hpp
 * @brief Geometry of the discrete torus Z_m x Z_n.
 *
 * A line on the torus is the image of an integer line of Z^2 under
 * coordinatewise reduction. Equivalently it is a coset a + <d> of a cyclic
 * subgroup generated by a vector d that lifts to a primitive integer vector.
 * A reduced vector (u, v) has such a lift iff gcd(u, v, gcd(m, n)) = 1.
 *
 * Lines are stored canonically: the base is the lexicographically smallest
 * point of the coset and the generator is the lexicographically smallest
 * generator of the subgroup. Two lines are equal iff their point sets are.
 */

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "torusline/numtheory.hpp"

namespace torusline {

/// Full line enumeration is refused above this many cells unless a caller
/// passes a larger budget explicitly.
inline constexpr i64 kDefaultEnumerationBudget = 65536;

class budget_exceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An unreduced point of Z^2.
struct IntPair {
    i64 x = 0;
    i64 y = 0;

    friend auto operator<=>(const IntPair&, const IntPair&) = default;
};

/// A cell of a torus; coordinates are reduced by whoever constructs it.
struct Point {
    i64 x = 0;
    i64 y = 0;

    friend auto operator<=>(const Point&, const Point&) = default;
    friend std::ostream& operator<<(std::ostream& os, const Point& p) {
        return os << '(' << p.x << ',' << p.y << ')';
    }
};

struct TorusDims {
    i64 m = 1;
    i64 n = 1;

    TorusDims() = default;
    TorusDims(i64 width, i64 height) : m(width), n(height) {
        if (m < 1 || n < 1) {
            throw std::invalid_argument("torus dimensions must be positive, got " +
                                        std::to_string(m) + "x" + std::to_string(n));
        }
        (void)checked_mul(m, n);
    }

    i64 cells() const { return m * n; }
    i64 gcd_mn() const { return gcd(m, n); }
    TorusDims swapped() const { return {n, m}; }
    bool contains(const Point& p) const { return p.x >= 0 && p.x < m && p.y >= 0 && p.y < n; }

    /// Row-major cell index (rows are indexed by y).
    i64 index(const Point& p) const { return p.y * m + p.x; }
    Point point_at(i64 idx) const { return {idx % m, idx / m}; }

    friend bool operator==(const TorusDims&, const TorusDims&) = default;
    friend std::ostream& operator<<(std::ostream& os, const TorusDims& d) {
        return os << d.m << 'x' << d.n;
    }
};

inline Point project(const TorusDims& dims, IntPair p) {
    return {mod_floor(p.x, dims.m), mod_floor(p.y, dims.n)};
}

inline Point add(const TorusDims& dims, Point a, Point b) {
    return {(a.x + b.x) % dims.m, (a.y + b.y) % dims.n};
}

inline Point sub(const TorusDims& dims, Point a, Point b) {
    return {mod_floor(a.x - b.x, dims.m), mod_floor(a.y - b.y, dims.n)};
}

/// The reduction map T_{from} -> T_{to}; requires to.m | from.m and to.n | from.n.
inline Point torus_hom(const TorusDims& from, const TorusDims& to, Point p) {
    if (from.m % to.m != 0 || from.n % to.n != 0) {
        throw std::invalid_argument("torus_hom: target dimensions must divide source dimensions");
    }
    if (!from.contains(p)) {
        throw std::invalid_argument("torus_hom: point outside the source torus");
    }
    return {p.x % to.m, p.y % to.n};
}

/// True iff the reduced vector (u, v) is the image of a primitive integer vector.
/// The zero vector is accepted only on the 1x1 torus.
inline bool is_primitive(const TorusDims& dims, i64 u, i64 v) {
    u = mod_floor(u, dims.m);
    v = mod_floor(v, dims.n);
    if (u == 0 && v == 0) return dims.m == 1 && dims.n == 1;
    return gcd(gcd(u, v), dims.gcd_mn()) == 1;
}

struct Direction {
    i64 u = 0;
    i64 v = 0;

    friend auto operator<=>(const Direction&, const Direction&) = default;
    friend std::ostream& operator<<(std::ostream& os, const Direction& d) {
        return os << '<' << d.u << ',' << d.v << '>';
    }
};

inline Direction make_direction(const TorusDims& dims, i64 u, i64 v) {
    if (!is_primitive(dims, u, v)) {
        throw std::invalid_argument("direction (" + std::to_string(u) + "," + std::to_string(v) +
                                    ") is not primitive on the torus");
    }
    return {mod_floor(u, dims.m), mod_floor(v, dims.n)};
}

/// Order of d in Z_m x Z_n, i.e. the number of points on any line with direction d.
inline i64 line_length(const TorusDims& dims, const Direction& d) {
    if (!is_primitive(dims, d.u, d.v)) {
        throw std::invalid_argument("line_length: direction is not primitive");
    }
    const i64 u = mod_floor(d.u, dims.m);
    const i64 v = mod_floor(d.v, dims.n);
    return lcm(dims.m / gcd(dims.m, u), dims.n / gcd(dims.n, v));
}

/// Order of an arbitrary element of Z_m x Z_n.
inline i64 element_order(const TorusDims& dims, Point p) {
    return lcm(dims.m / gcd(dims.m, p.x), dims.n / gcd(dims.n, p.y));
}

/// Smallest k >= 0 with k*g = t in Z_m x Z_n, solved by congruences.
inline std::optional<i64> subgroup_member(const TorusDims& dims, const Direction& g, Point t) {
    const auto kx = solve_linear_congruence(g.u, t.x, dims.m);
    if (!kx) return std::nullopt;
    const auto ky = solve_linear_congruence(g.v, t.y, dims.n);
    if (!ky) return std::nullopt;
    const auto k = crt(*kx, *ky);
    if (!k) return std::nullopt;
    return k->residue;
}

/// The 3x3 determinant with columns (a,1), (b,1), (c,1).
inline i64 det3(IntPair a, IntPair b, IntPair c) {
    const i64 t1 = checked_mul(a.x, checked_sub(b.y, c.y));
    const i64 t2 = checked_mul(a.y, checked_sub(b.x, c.x));
    const i64 t3 = checked_sub(checked_mul(b.x, c.y), checked_mul(b.y, c.x));
    return checked_add(checked_sub(t1, t2), t3);
}

/// A cyclic subgroup generated by a primitive direction, with its elements in
/// generation order (0, g, 2g, ...).
struct Subgroup {
    Direction generator;
    std::vector<Point> elements;

    i64 length() const { return static_cast<i64>(elements.size()); }
};

namespace detail {

inline std::vector<Point> orbit(const TorusDims& dims, Point base, const Direction& d) {
    std::vector<Point> pts;
    Point p = base;
    do {
        pts.push_back(p);
        p = {(p.x + d.u) % dims.m, (p.y + d.v) % dims.n};
    } while (p != base);
    return pts;
}

/// Lexicographically smallest generator of <d>.
inline Direction canonical_generator(const TorusDims& dims, const Direction& d) {
    const i64 len = line_length(dims, d);
    Direction best = d;
    for (i64 k = 1; k < len; ++k) {
        if (gcd(k, len) != 1) continue;
        Direction cand{mul_mod(k, d.u, dims.m), mul_mod(k, d.v, dims.n)};
        if (cand < best) best = cand;
    }
    return best;
}

inline void check_budget(const TorusDims& dims, i64 budget, const char* what) {
    if (dims.cells() > budget) {
        throw budget_exceeded(std::string(what) + ": torus " + std::to_string(dims.m) + "x" +
                              std::to_string(dims.n) + " exceeds enumeration budget of " +
                              std::to_string(budget) + " cells");
    }
}

}  // namespace detail

class Line {
public:
    Line() = default;

    /// The line base + <d>, stored canonically.
    Line(const TorusDims& dims, Point base, const Direction& d) : dims_(dims) {
        if (!dims.contains(base)) {
            throw std::invalid_argument("line base outside the torus");
        }
        const Direction dd = make_direction(dims, d.u, d.v);
        generator_ = detail::canonical_generator(dims, dd);
        auto pts = detail::orbit(dims, base, generator_);
        base_ = *std::min_element(pts.begin(), pts.end());
        points_ = detail::orbit(dims, base_, generator_);
    }

    const TorusDims& dims() const { return dims_; }
    Point base() const { return base_; }
    Direction generator() const { return generator_; }
    const std::vector<Point>& points() const { return points_; }
    i64 size() const { return static_cast<i64>(points_.size()); }

    bool contains(Point p) const {
        return subgroup_member(dims_, generator_, sub(dims_, p, base_)).has_value();
    }

    friend bool operator==(const Line& a, const Line& b) {
        return a.dims_ == b.dims_ && a.base_ == b.base_ && a.generator_ == b.generator_;
    }
    friend bool operator<(const Line& a, const Line& b) {
        if (a.generator_ != b.generator_) return a.generator_ < b.generator_;
        return a.base_ < b.base_;
    }

private:
    TorusDims dims_;
    Direction generator_;
    Point base_;
    std::vector<Point> points_;
};

inline Line line_through(const TorusDims& dims, Point base, const Direction& d) {
    return Line(dims, base, d);
}

/// Every cyclic subgroup generated by a primitive direction, each once, keyed
/// by its lexicographically smallest generator and listed in that order.
inline std::vector<Subgroup> enumerate_subgroups(const TorusDims& dims,
                                                 i64 budget = kDefaultEnumerationBudget) {
    detail::check_budget(dims, budget, "enumerate_subgroups");
    std::vector<Subgroup> out;
    std::vector<char> seen(static_cast<std::size_t>(dims.cells()), 0);
    for (i64 u = 0; u < dims.m; ++u) {
        for (i64 v = 0; v < dims.n; ++v) {
            const Point d{u, v};
            if (seen[static_cast<std::size_t>(dims.index(d))]) continue;
            if (!is_primitive(dims, u, v)) continue;
            Subgroup sg{{u, v}, detail::orbit(dims, {0, 0}, {u, v})};
            const i64 len = sg.length();
            for (i64 k = 1; k <= len; ++k) {
                if (gcd(k, len) == 1) {
                    seen[static_cast<std::size_t>(
                        dims.index(sg.elements[static_cast<std::size_t>(k % len)]))] = 1;
                }
            }
            out.push_back(std::move(sg));
        }
    }
    return out;
}

/// All distinct lines of the torus. Lines are grouped by subgroup (parallel
/// class) in generator order, and within a class by base point.
inline std::vector<Line> enumerate_lines(const TorusDims& dims,
                                         i64 budget = kDefaultEnumerationBudget) {
    const auto subgroups = enumerate_subgroups(dims, budget);
    std::vector<Line> lines;
    std::vector<char> covered(static_cast<std::size_t>(dims.cells()));
    for (const auto& sg : subgroups) {
        std::fill(covered.begin(), covered.end(), 0);
        for (i64 x = 0; x < dims.m; ++x) {
            for (i64 y = 0; y < dims.n; ++y) {
                const Point base{x, y};
                if (covered[static_cast<std::size_t>(dims.index(base))]) continue;
                for (const auto& h : sg.elements) {
                    covered[static_cast<std::size_t>(dims.index(add(dims, base, h)))] = 1;
                }
                lines.emplace_back(dims, base, sg.generator);
            }
        }
    }
    return lines;
}

/// Enumerated line geometry of one torus, reused across many queries.
class LineGeometry {
public:
    explicit LineGeometry(const TorusDims& dims, i64 budget = kDefaultEnumerationBudget)
        : dims_(dims), subgroups_(enumerate_subgroups(dims, budget)) {}

    const TorusDims& dims() const { return dims_; }
    const std::vector<Subgroup>& subgroups() const { return subgroups_; }

    std::vector<Line> lines_through_pair(Point a, Point b) const {
        if (a == b) {
            throw std::invalid_argument("lines_through_pair: points must be distinct");
        }
        const Point s = sub(dims_, b, a);
        std::vector<Line> out;
        for (const auto& sg : subgroups_) {
            if (subgroup_member(dims_, sg.generator, s)) {
                out.emplace_back(dims_, a, sg.generator);
            }
        }
        return out;
    }

    /// Some line through a and b that also holds c, if any.
    std::optional<Line> common_line(Point a, Point b, Point c) const {
        const Point s = sub(dims_, b, a);
        const Point t = sub(dims_, c, a);
        for (const auto& sg : subgroups_) {
            if (subgroup_member(dims_, sg.generator, s) && subgroup_member(dims_, sg.generator, t)) {
                return Line(dims_, a, sg.generator);
            }
        }
        return std::nullopt;
    }

private:
    TorusDims dims_;
    std::vector<Subgroup> subgroups_;
};

inline std::vector<Line> lines_through_pair(const TorusDims& dims, Point a, Point b,
                                            i64 budget = kDefaultEnumerationBudget) {
    if (a == b) {
        throw std::invalid_argument("lines_through_pair: points must be distinct");
    }
    return LineGeometry(dims, budget).lines_through_pair(a, b);
}

/// Necessary condition for collinearity: D(a, b, c) ≡ 0 (mod gcd(m, n)) for the
/// reduced representatives.
inline bool det_filter_passes(const TorusDims& dims, Point a, Point b, Point c) {
    const i64 g = dims.gcd_mn();
    return mod_floor(det3({a.x, a.y}, {b.x, b.y}, {c.x, c.y}), g) == 0;
}

/// Exact collinearity without enumeration: b-a and c-a lie on a common line
/// through a iff they generate a cyclic subgroup of Z_m x Z_n. The subgroup
/// order is mn / gcd of the 2x2 minors of [s t (m,0) (0,n)]; it is cyclic iff
/// that order equals lcm(ord s, ord t).
inline bool spans_cyclic_subgroup(const TorusDims& dims, Point s, Point t) {
    const i64 m = dims.m;
    const i64 n = dims.n;
    const __int128 d = static_cast<__int128>(s.x) * t.y - static_cast<__int128>(s.y) * t.x;
    __int128 idx = static_cast<__int128>(m) * n;
    auto fold = [&idx](__int128 v) {
        if (v < 0) v = -v;
        while (v != 0) {
            __int128 r = idx % v;
            idx = v;
            v = r;
        }
    };
    fold(d);
    fold(static_cast<__int128>(m) * s.y);
    fold(static_cast<__int128>(n) * s.x);
    fold(static_cast<__int128>(m) * t.y);
    fold(static_cast<__int128>(n) * t.x);
    const __int128 order = static_cast<__int128>(m) * n / idx;
    const i64 os = element_order(dims, s);
    const i64 ot = element_order(dims, t);
    return order == static_cast<__int128>(os / gcd(os, ot)) * ot;
}

namespace detail {

inline void check_distinct_triple(const TorusDims& dims, Point a, Point b, Point c) {
    if (!dims.contains(a) || !dims.contains(b) || !dims.contains(c)) {
        throw std::invalid_argument("collinear: point outside the torus");
    }
    if (a == b || a == c || b == c) {
        throw std::invalid_argument("collinear: points must be pairwise distinct");
    }
}

}  // namespace detail

/// Collinearity decided against an already enumerated geometry: determinant
/// filter first, then membership of c in the lines through a and b.
inline bool collinear(const LineGeometry& geo, Point a, Point b, Point c) {
    detail::check_distinct_triple(geo.dims(), a, b, c);
    if (!det_filter_passes(geo.dims(), a, b, c)) return false;
    return geo.common_line(a, b, c).has_value();
}

/// Determinant filter, then an exact decision. Within the enumeration budget
/// the exact step tests c against the lines through a and b; beyond it the
/// cyclic-subgroup criterion is used.
inline bool collinear(const TorusDims& dims, Point a, Point b, Point c,
                      i64 budget = kDefaultEnumerationBudget) {
    detail::check_distinct_triple(dims, a, b, c);
    if (!det_filter_passes(dims, a, b, c)) return false;
    if (dims.cells() <= budget) {
        return LineGeometry(dims, budget).common_line(a, b, c).has_value();
    }
    return spans_cyclic_subgroup(dims, sub(dims, b, a), sub(dims, c, a));
}

/// For every line of the small torus, whether its full preimage under
/// torus_hom is a single line of the big torus. Checked by enumeration.
inline bool line_preimage_is_line(const TorusDims& from, const TorusDims& to,
                                  i64 budget = kDefaultEnumerationBudget) {
    if (from.m % to.m != 0 || from.n % to.n != 0) {
        throw std::invalid_argument("line_preimage_is_line: dimensions must divide");
    }
    detail::check_budget(from, budget, "line_preimage_is_line");
    struct VecHash {
        std::size_t operator()(const std::vector<i64>& v) const {
            std::size_t h = v.size();
            for (i64 x : v) h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            return h;
        }
    };
    std::unordered_set<std::vector<i64>, VecHash> big;
    for (const auto& line : enumerate_lines(from, budget)) {
        std::vector<i64> ids;
        ids.reserve(line.points().size());
        for (const auto& p : line.points()) ids.push_back(from.index(p));
        std::sort(ids.begin(), ids.end());
        big.insert(std::move(ids));
    }
    const i64 kx = from.m / to.m;
    const i64 ky = from.n / to.n;
    for (const auto& line : enumerate_lines(to, budget)) {
        std::vector<i64> ids;
        for (const auto& p : line.points()) {
            for (i64 i = 0; i < kx; ++i) {
                for (i64 j = 0; j < ky; ++j) {
                    ids.push_back(from.index({p.x + i * to.m, p.y + j * to.n}));
                }
            }
        }
        std::sort(ids.begin(), ids.end());
        if (!big.count(ids)) return false;
    }
    return true;
}

/// A set of distinct torus points.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(const TorusDims& dims) : dims_(dims) {}
    PointSet(const TorusDims& dims, std::vector<Point> pts) : dims_(dims), members_(std::move(pts)) {
        for (const auto& p : members_) {
            if (!dims_.contains(p)) {
                throw std::invalid_argument("point (" + std::to_string(p.x) + "," +
                                            std::to_string(p.y) + ") outside torus");
            }
        }
        std::sort(members_.begin(), members_.end());
        if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
            throw std::invalid_argument("point set contains duplicate points");
        }
    }

    const TorusDims& dims() const { return dims_; }
    const std::vector<Point>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool contains(Point p) const { return std::binary_search(members_.begin(), members_.end(), p); }

    /// Same coordinates on a torus whose dimensions are multiples of these.
    PointSet lifted_to(const TorusDims& big) const {
        if (big.m % dims_.m != 0 || big.n % dims_.n != 0) {
            throw std::invalid_argument("lifted_to: target dimensions must be multiples");
        }
        return PointSet(big, members_);
    }

    /// Coordinates swapped, on the transposed torus.
    PointSet transposed() const {
        std::vector<Point> pts;
        pts.reserve(members_.size());
        for (const auto& p : members_) pts.push_back({p.y, p.x});
        return PointSet(dims_.swapped(), std::move(pts));
    }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    TorusDims dims_;
    std::vector<Point> members_;
};

}  // namespace torusline
