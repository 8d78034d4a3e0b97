#pragma once

/**
 * @file construction.hpp
 * @brief Extremal configurations of 2p^a points on T_{p^a x p^((a-1)p+2)}.
 *
 * Level 1 is X = {(i, i^2 p)} and Y = {(i, i^2 p + 1)} for i in [0, p).
 * Level a takes the level a-1 set together with p-1 translated copies, copy i
 * shifted by (i p^(a-1), p^((a-2)p + i + 3)). Points are generated in Z^2 and
 * projected onto the torus; offsets that reach the torus height wrap to zero.
 */

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "torusline/numtheory.hpp"
#include "torusline/solver.hpp"
#include "torusline/torus.hpp"

namespace torusline {

struct ConstructionSpec {
    i64 p = 2;
    int a = 1;
    TorusDims dims;

    ConstructionSpec(i64 prime, int level) : p(prime), a(level) {
        if (!is_prime(p)) {
            throw std::invalid_argument("construction requires a prime, got " + std::to_string(p));
        }
        if (a < 1) {
            throw std::invalid_argument("construction level must be at least 1");
        }
        const i64 height_exp = checked_add(checked_mul(a - 1, p), 2);
        if (height_exp > 62) {
            throw std::overflow_error("construction torus height does not fit in 64 bits");
        }
        dims = TorusDims(ipow(p, a), ipow(p, static_cast<int>(height_exp)));
    }

    i64 expected_size() const { return checked_mul(2, dims.m); }
};

enum class Family { X, Y };

struct LabeledPoint {
    IntPair point;            // before projection
    Family family;
    std::vector<int> copy_path;  // copy index per level, outermost first
};

namespace detail {

inline std::vector<LabeledPoint> base_family(i64 p) {
    std::vector<LabeledPoint> out;
    for (i64 i = 0; i < p; ++i) {
        const i64 y = checked_mul(checked_mul(i, i), p);
        out.push_back({{i, y}, Family::X, {}});
    }
    for (i64 i = 0; i < p; ++i) {
        const i64 y = checked_mul(checked_mul(i, i), p);
        out.push_back({{i, y + 1}, Family::Y, {}});
    }
    return out;
}

}  // namespace detail

/// X_a ∪ Y_a in Z^2, X points first, each labeled with its copy path.
inline std::vector<LabeledPoint> labeled_xy(const ConstructionSpec& spec) {
    auto pts = detail::base_family(spec.p);
    for (int level = 2; level <= spec.a; ++level) {
        std::vector<LabeledPoint> next;
        next.reserve(pts.size() * static_cast<std::size_t>(spec.p));
        for (i64 i = 0; i < spec.p; ++i) {
            IntPair offset{0, 0};
            if (i > 0) {
                offset = {checked_mul(i, ipow(spec.p, level - 1)),
                          ipow(spec.p, static_cast<int>((level - 2) * spec.p + i + 3))};
            }
            for (const auto& lp : pts) {
                LabeledPoint q = lp;
                q.point = {checked_add(lp.point.x, offset.x), checked_add(lp.point.y, offset.y)};
                q.copy_path.insert(q.copy_path.begin(), static_cast<int>(i));
                next.push_back(std::move(q));
            }
        }
        pts = std::move(next);
    }
    std::stable_partition(pts.begin(), pts.end(),
                          [](const LabeledPoint& lp) { return lp.family == Family::X; });
    return pts;
}

/// The projected construction. Throws if two generated points collide.
inline PointSet build_xy(const ConstructionSpec& spec) {
    std::vector<Point> pts;
    for (const auto& lp : labeled_xy(spec)) pts.push_back(project(spec.dims, lp.point));
    return PointSet(spec.dims, std::move(pts));
}

inline PointSet base_xy(i64 p) { return build_xy(ConstructionSpec(p, 1)); }

struct Certificate {
    ConstructionSpec spec;
    std::vector<Point> points;
    std::uint64_t triples_checked = 0;
    i64 upper_bound = 0;
    bool passed = false;
    std::optional<CollinearTriple> violation;
    std::chrono::duration<double> elapsed{0};

    /// The value of tau this certificate pins, when it passed.
    std::optional<i64> tau() const {
        if (passed && static_cast<i64>(points.size()) == upper_bound) return upper_bound;
        return std::nullopt;
    }
};

/// Checks every triple of the construction for collinearity. A failure is
/// reported in the certificate, not thrown.
inline Certificate certify_construction(const ConstructionSpec& spec,
                                        i64 budget = kDefaultEnumerationBudget) {
    const auto start = std::chrono::steady_clock::now();
    Certificate cert{spec, {}, 0, tau_upper_bound(spec.dims), false, std::nullopt, {}};
    std::vector<Point> pts;
    for (const auto& lp : labeled_xy(spec)) pts.push_back(project(spec.dims, lp.point));
    cert.points = pts;

    std::vector<Point> sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
        // Two generated points coincide on the torus; report them with a third.
        const Point d = *dup;
        const Point other = sorted.front() == d ? sorted.back() : sorted.front();
        cert.violation = CollinearTriple{d, d, other, std::nullopt};
        cert.elapsed = std::chrono::steady_clock::now() - start;
        return cert;
    }

    std::optional<LineGeometry> geo;
    if (spec.dims.cells() <= budget) geo.emplace(spec.dims, budget);
    const std::size_t k = pts.size();
    for (std::size_t i = 0; i < k && !cert.violation; ++i) {
        for (std::size_t j = i + 1; j < k && !cert.violation; ++j) {
            for (std::size_t l = j + 1; l < k; ++l) {
                ++cert.triples_checked;
                const Point a = pts[i], b = pts[j], c = pts[l];
                if (geo) {
                    if (!det_filter_passes(spec.dims, a, b, c)) continue;
                    if (auto line = geo->common_line(a, b, c)) {
                        cert.violation = CollinearTriple{a, b, c, std::move(line)};
                        break;
                    }
                } else if (collinear(spec.dims, a, b, c, budget)) {
                    cert.violation = CollinearTriple{a, b, c, std::nullopt};
                    break;
                }
            }
        }
    }
    cert.passed = !cert.violation.has_value();
    cert.elapsed = std::chrono::steady_clock::now() - start;
    return cert;
}

}  // namespace torusline
