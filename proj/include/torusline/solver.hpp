#pragma once

/**
 * @file solver.hpp
 * @brief Exact no-three-in-line maxima on the discrete torus.
 *
 * The search is a depth-first branch and bound over cells in row-major order
 * (include before exclude). Each line of three or more cells carries an
 * occupancy counter with capacity 2; when a line fills, its remaining cells
 * leave the candidate set. Nodes are pruned with the best per-parallel-class
 * bound: for any subgroup H, the cosets of H partition the torus, so at most
 * sum over cosets of min(2 - occupancy, remaining candidates) more points fit.
 *
 * Translation invariance lets the search pin the origin into the set.
 */

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "torusline/numtheory.hpp"
#include "torusline/torus.hpp"

namespace torusline {

enum class Method { search, known_formula, reduction, bound_meet };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::search: return "search";
        case Method::known_formula: return "known_formula";
        case Method::reduction: return "reduction";
        case Method::bound_meet: return "bound_meet";
    }
    return "search";
}

inline std::optional<Method> method_from_string(std::string_view s) {
    if (s == "search") return Method::search;
    if (s == "known_formula") return Method::known_formula;
    if (s == "reduction") return Method::reduction;
    if (s == "bound_meet") return Method::bound_meet;
    return std::nullopt;
}

inline constexpr int kResultFormatVersion = 1;

struct TauResult {
    TorusDims dims;
    i64 value = 0;
    PointSet witness;
    Method method = Method::search;
    std::chrono::duration<double> elapsed{0};
    int version = kResultFormatVersion;
};

enum class Symmetry { translations_only, none };

struct SearchOptions {
    std::chrono::duration<double> time_budget = std::chrono::hours(24);
    int thread_count = 1;
    Symmetry symmetry = Symmetry::translations_only;
    std::optional<PointSet> seed_witness;
    i64 enumeration_budget = kDefaultEnumerationBudget;
    bool use_closed_forms = true;  // false: always search to optimality
};

/// Thrown when the time budget runs out; carries the best set found so far,
/// which is only a lower bound.
class search_budget_exhausted : public std::runtime_error {
public:
    search_budget_exhausted(const TorusDims& dims, PointSet best)
        : std::runtime_error("time budget exhausted on " + std::to_string(dims.m) + "x" +
                             std::to_string(dims.n) + "; best so far " +
                             std::to_string(best.size())),
          best_(std::move(best)) {}

    const PointSet& best_so_far() const { return best_; }

private:
    PointSet best_;
};

/// Lines with at least three cells, as cell-index lists and bitmasks.
class IncidenceStructure {
public:
    static constexpr int line_capacity = 2;

    explicit IncidenceStructure(const TorusDims& dims, i64 budget = kDefaultEnumerationBudget)
        : dims_(dims),
          words_(static_cast<std::size_t>((dims.cells() + 63) / 64)),
          point_to_lines_(static_cast<std::size_t>(dims.cells())) {
        detail::check_budget(dims, budget, "IncidenceStructure");
        const auto subgroups = enumerate_subgroups(dims, budget);
        std::vector<char> covered(static_cast<std::size_t>(dims.cells()));
        for (const auto& sg : subgroups) {
            if (sg.length() < 3) continue;
            const std::size_t first = lines_.size();
            std::fill(covered.begin(), covered.end(), 0);
            for (i64 x = 0; x < dims.m; ++x) {
                for (i64 y = 0; y < dims.n; ++y) {
                    const Point base{x, y};
                    if (covered[static_cast<std::size_t>(dims.index(base))]) continue;
                    std::vector<int> cells;
                    cells.reserve(sg.elements.size());
                    for (const auto& h : sg.elements) {
                        const i64 idx = dims.index(add(dims, base, h));
                        covered[static_cast<std::size_t>(idx)] = 1;
                        cells.push_back(static_cast<int>(idx));
                    }
                    add_line(std::move(cells), sg.generator, base);
                }
            }
            classes_.push_back({first, lines_.size()});
        }
        std::sort(classes_.begin(), classes_.end(), [](const auto& a, const auto& b) {
            return (a.second - a.first) < (b.second - b.first);
        });
    }

    const TorusDims& dims() const { return dims_; }
    std::size_t words() const { return words_; }
    std::size_t line_count() const { return lines_.size(); }
    const std::vector<int>& line_cells(std::size_t l) const { return lines_[l]; }
    Line line(std::size_t l) const { return Line(dims_, bases_[l], generators_[l]); }
    const std::uint64_t* mask(std::size_t l) const { return masks_.data() + l * words_; }
    const std::vector<int>& lines_through(int cell) const {
        return point_to_lines_[static_cast<std::size_t>(cell)];
    }
    /// Half-open line index ranges, one per parallel class.
    const std::vector<std::pair<std::size_t, std::size_t>>& classes() const { return classes_; }

private:
    void add_line(std::vector<int> cells, Direction gen, Point base) {
        const std::size_t id = lines_.size();
        masks_.resize(masks_.size() + words_, 0);
        std::uint64_t* m = masks_.data() + id * words_;
        for (int c : cells) {
            m[static_cast<std::size_t>(c) / 64] |= std::uint64_t{1} << (c % 64);
            point_to_lines_[static_cast<std::size_t>(c)].push_back(static_cast<int>(id));
        }
        lines_.push_back(std::move(cells));
        generators_.push_back(gen);
        bases_.push_back(base);
    }

    TorusDims dims_;
    std::size_t words_;
    std::vector<std::vector<int>> lines_;
    std::vector<Direction> generators_;
    std::vector<Point> bases_;
    std::vector<std::uint64_t> masks_;
    std::vector<std::vector<int>> point_to_lines_;
    std::vector<std::pair<std::size_t, std::size_t>> classes_;
};

struct CollinearTriple {
    Point a, b, c;
    std::optional<Line> line;  // absent only beyond the enumeration budget
};

/// Some three members of s on a common line, if any.
inline std::optional<CollinearTriple> find_collinear_triple(const PointSet& s,
                                                            i64 budget = kDefaultEnumerationBudget) {
    const auto& pts = s.members();
    const TorusDims& dims = s.dims();
    if (pts.size() < 3) return std::nullopt;
    if (dims.cells() <= budget) {
        // Group members by coset of each subgroup.
        const auto subgroups = enumerate_subgroups(dims, budget);
        std::vector<char> in_h(static_cast<std::size_t>(dims.cells()));
        std::vector<int> group(pts.size());
        std::vector<int> count(pts.size());
        for (const auto& sg : subgroups) {
            if (sg.length() < 3) continue;
            for (const auto& h : sg.elements) in_h[static_cast<std::size_t>(dims.index(h))] = 1;
            std::fill(count.begin(), count.end(), 0);
            std::optional<int> hit;
            for (std::size_t i = 0; i < pts.size() && !hit; ++i) {
                group[i] = static_cast<int>(i);
                for (std::size_t j = 0; j < i; ++j) {
                    if (group[j] == static_cast<int>(j) &&
                        in_h[static_cast<std::size_t>(dims.index(sub(dims, pts[i], pts[j])))]) {
                        group[i] = static_cast<int>(j);
                        break;
                    }
                }
                if (++count[static_cast<std::size_t>(group[i])] >= 3) hit = group[i];
            }
            for (const auto& h : sg.elements) in_h[static_cast<std::size_t>(dims.index(h))] = 0;
            if (hit) {
                std::vector<Point> on;
                for (std::size_t i = 0; i < pts.size() && on.size() < 3; ++i) {
                    if (group[i] == *hit) on.push_back(pts[i]);
                }
                return CollinearTriple{on[0], on[1], on[2], Line(dims, on[0], sg.generator)};
            }
        }
        return std::nullopt;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            for (std::size_t k = j + 1; k < pts.size(); ++k) {
                if (collinear(dims, pts[i], pts[j], pts[k], budget)) {
                    return CollinearTriple{pts[i], pts[j], pts[k], std::nullopt};
                }
            }
        }
    }
    return std::nullopt;
}

/// True iff no line holds three or more members of s.
inline bool verify_no3(const PointSet& s, i64 budget = kDefaultEnumerationBudget) {
    return !find_collinear_triple(s, budget).has_value();
}

inline bool verify_no3(const TorusDims& dims, const std::vector<Point>& pts,
                       i64 budget = kDefaultEnumerationBudget) {
    return verify_no3(PointSet(dims, pts), budget);
}

inline i64 tau_upper_bound(const TorusDims& dims) { return checked_mul(2, dims.gcd_mn()); }

struct KnownValue {
    i64 value;
    std::string rationale;
};

/// Closed forms: the 1x1 torus, coprime dimensions, and prime gcd.
inline std::optional<KnownValue> tau_known(const TorusDims& dims) {
    if (dims.m == 1 && dims.n == 1) return KnownValue{1, "single cell"};
    const i64 g = dims.gcd_mn();
    if (g == 1) return KnownValue{2, "gcd(m,n) = 1"};
    if (!is_prime(g)) return std::nullopt;
    const i64 p = g;
    const i64 p2 = p * p;
    if (p == 2) return KnownValue{4, "gcd(m,n) = 2"};
    if (dims.m % p2 == 0 || dims.n % p2 == 0) {
        return KnownValue{2 * p, "gcd(m,n) = " + std::to_string(p) + " prime, p^2 divides m or n"};
    }
    return KnownValue{p + 1, "gcd(m,n) = " + std::to_string(p) + " odd prime, p^2 divides neither"};
}

namespace detail {

class BranchAndBound {
public:
    using Clock = std::chrono::steady_clock;

    BranchAndBound(const IncidenceStructure& inc, const SearchOptions& opts, Clock::time_point start)
        : inc_(inc), opts_(opts), deadline_(start + std::chrono::duration_cast<Clock::duration>(
                                                        opts.time_budget)) {}

    /// Look for sets larger than `initial`, stopping as soon as one of size
    /// `stop_at` appears.
    void run(const std::vector<int>& initial, i64 stop_at) {
        best_size_ = static_cast<i64>(initial.size());
        best_set_ = initial;
        stop_at_ = stop_at;
        if (best_size_ >= stop_at_) return;

        Worker root(inc_);
        std::vector<std::uint64_t> cand(inc_.words(), 0);
        const int cells = static_cast<int>(inc_.dims().cells());
        for (int c = 0; c < cells; ++c) cand[static_cast<std::size_t>(c) / 64] |= std::uint64_t{1} << (c % 64);

        std::vector<Task> frontier;
        if (opts_.symmetry == Symmetry::translations_only) {
            // Any nonempty set translates to one containing the origin.
            Task t{cand, std::vector<std::uint8_t>(inc_.line_count(), 0), {}};
            frontier.push_back(include(t, 0));
        } else {
            frontier.push_back(Task{cand, std::vector<std::uint8_t>(inc_.line_count(), 0), {}});
        }

        const int threads = std::max(1, opts_.thread_count);
        if (threads > 1) frontier = expand(std::move(frontier), static_cast<std::size_t>(threads) * 64);

        std::atomic<std::size_t> next{0};
        auto work = [&]() {
            Worker w(inc_);
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= frontier.size() || stop_.load()) break;
                w.load(frontier[i]);
                dfs(w, frontier[i].cand.data(), 0);
            }
            nodes_.fetch_add(w.nodes);
        };
        if (threads == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int i = 0; i < threads; ++i) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }
    }

    i64 best_size() const { return best_size_.load(); }
    std::vector<int> best_set() const {
        std::lock_guard lock(best_mutex_);
        return best_set_;
    }
    bool timed_out() const { return timed_out_.load(); }
    std::uint64_t nodes() const { return nodes_.load(); }

private:
    struct Task {
        std::vector<std::uint64_t> cand;
        std::vector<std::uint8_t> occ;
        std::vector<int> chosen;
    };

    struct Worker {
        explicit Worker(const IncidenceStructure& inc)
            : occ(inc.line_count(), 0), stack(inc.words() * (static_cast<std::size_t>(inc.dims().cells()) + 2)) {}

        void load(const Task& t) {
            occ = t.occ;
            chosen = t.chosen;
        }

        std::vector<std::uint8_t> occ;
        std::vector<int> chosen;
        std::vector<std::uint64_t> stack;  // candidate sets, one slot per depth
        std::uint64_t nodes = 0;
    };

    Task include(const Task& t, int cell) const {
        Task out = t;
        out.cand[static_cast<std::size_t>(cell) / 64] &= ~(std::uint64_t{1} << (cell % 64));
        for (int l : inc_.lines_through(cell)) {
            if (++out.occ[static_cast<std::size_t>(l)] == IncidenceStructure::line_capacity) {
                const std::uint64_t* m = inc_.mask(static_cast<std::size_t>(l));
                for (std::size_t w = 0; w < inc_.words(); ++w) out.cand[w] &= ~m[w];
            }
        }
        out.chosen.push_back(cell);
        return out;
    }

    int first_candidate(const std::uint64_t* cand) const {
        for (std::size_t w = 0; w < inc_.words(); ++w) {
            if (cand[w] != 0) return static_cast<int>(w * 64) + std::countr_zero(cand[w]);
        }
        return -1;
    }

    /// Upper bound on how many more points fit, or a value at most `slack`
    /// as soon as one parallel class proves the node cannot beat the best.
    i64 bound(const std::uint64_t* cand, const std::vector<std::uint8_t>& occ, i64 slack) const {
        const std::size_t words = inc_.words();
        i64 total = 0;
        for (std::size_t w = 0; w < words; ++w) total += std::popcount(cand[w]);
        if (total <= slack) return total;
        i64 best = total;
        for (const auto& [first, last] : inc_.classes()) {
            i64 s = 0;
            for (std::size_t l = first; l < last && s <= slack; ++l) {
                const int room = IncidenceStructure::line_capacity - occ[l];
                if (room == 0) continue;
                const std::uint64_t* m = inc_.mask(l);
                int pc = 0;
                for (std::size_t w = 0; w < words && pc < room; ++w) pc += std::popcount(cand[w] & m[w]);
                s += std::min(pc, room);
            }
            if (s <= slack) return s;
            best = std::min(best, s);
        }
        return best;
    }

    std::vector<Task> expand(std::vector<Task> frontier, std::size_t target) const {
        for (int depth = 0; depth < 24 && frontier.size() < target; ++depth) {
            std::vector<Task> next;
            bool grew = false;
            for (auto& t : frontier) {
                const int p = first_candidate(t.cand.data());
                const i64 slack = best_size_.load() - static_cast<i64>(t.chosen.size());
                if (p < 0 || bound(t.cand.data(), t.occ, slack) <= slack) {
                    next.push_back(std::move(t));
                    continue;
                }
                grew = true;
                next.push_back(include(t, p));
                t.cand[static_cast<std::size_t>(p) / 64] &= ~(std::uint64_t{1} << (p % 64));
                next.push_back(std::move(t));
            }
            frontier = std::move(next);
            if (!grew) break;
        }
        return frontier;
    }

    void record(const Worker& w) {
        const i64 size = static_cast<i64>(w.chosen.size());
        i64 cur = best_size_.load();
        while (size > cur) {
            if (best_size_.compare_exchange_weak(cur, size)) {
                std::lock_guard lock(best_mutex_);
                if (static_cast<i64>(best_set_.size()) < size) best_set_ = w.chosen;
                break;
            }
        }
        if (best_size_.load() >= stop_at_) stop_.store(true);
    }

    void dfs(Worker& w, const std::uint64_t* cand, std::size_t depth) {
        if (stop_.load(std::memory_order_relaxed)) return;
        if ((++w.nodes & 0x3fff) == 0 && Clock::now() > deadline_) {
            timed_out_.store(true);
            stop_.store(true);
            return;
        }
        const i64 chosen = static_cast<i64>(w.chosen.size());
        if (chosen > best_size_.load(std::memory_order_relaxed)) record(w);
        const int p = first_candidate(cand);
        if (p < 0) return;
        const i64 slack = best_size_.load(std::memory_order_relaxed) - chosen;
        if (bound(cand, w.occ, slack) <= slack) return;

        const std::size_t words = inc_.words();
        std::uint64_t* next = w.stack.data() + (depth + 1) * words;
        const std::uint64_t bit = std::uint64_t{1} << (p % 64);
        const std::size_t pw = static_cast<std::size_t>(p) / 64;

        // include p
        std::copy(cand, cand + words, next);
        next[pw] &= ~bit;
        const auto& through = inc_.lines_through(p);
        for (int l : through) {
            if (++w.occ[static_cast<std::size_t>(l)] == IncidenceStructure::line_capacity) {
                const std::uint64_t* m = inc_.mask(static_cast<std::size_t>(l));
                for (std::size_t i = 0; i < words; ++i) next[i] &= ~m[i];
            }
        }
        w.chosen.push_back(p);
        dfs(w, next, depth + 1);
        w.chosen.pop_back();
        for (int l : through) --w.occ[static_cast<std::size_t>(l)];

        // exclude p
        std::copy(cand, cand + words, next);
        next[pw] &= ~bit;
        dfs(w, next, depth + 1);
    }

    const IncidenceStructure& inc_;
    const SearchOptions& opts_;
    Clock::time_point deadline_;
    std::atomic<i64> best_size_{0};
    mutable std::mutex best_mutex_;
    std::vector<int> best_set_;
    i64 stop_at_ = 0;
    std::atomic<bool> stop_{false};
    std::atomic<bool> timed_out_{false};
    std::atomic<std::uint64_t> nodes_{0};
};

inline std::vector<int> greedy_set(const IncidenceStructure& inc) {
    std::vector<std::uint8_t> occ(inc.line_count(), 0);
    std::vector<int> chosen;
    for (int c = 0; c < static_cast<int>(inc.dims().cells()); ++c) {
        bool ok = true;
        for (int l : inc.lines_through(c)) ok = ok && occ[static_cast<std::size_t>(l)] < 2;
        if (!ok) continue;
        for (int l : inc.lines_through(c)) ++occ[static_cast<std::size_t>(l)];
        chosen.push_back(c);
    }
    return chosen;
}

inline PointSet to_point_set(const TorusDims& dims, const std::vector<int>& cells) {
    std::vector<Point> pts;
    pts.reserve(cells.size());
    for (int c : cells) pts.push_back(dims.point_at(c));
    return PointSet(dims, std::move(pts));
}

}  // namespace detail

/// Exact tau_{m,n} with a validated witness. Throws search_budget_exhausted
/// when the time budget runs out before optimality is proved.
inline TauResult tau_exact(const TorusDims& dims, const SearchOptions& opts = {}) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const i64 upper = tau_upper_bound(dims);
    auto finish = [&](PointSet w, Method method) {
        if (!verify_no3(w, opts.enumeration_budget)) {
            throw std::logic_error("solver produced an invalid witness");
        }
        TauResult r;
        r.dims = dims;
        r.value = static_cast<i64>(w.size());
        r.witness = std::move(w);
        r.method = method;
        r.elapsed = Clock::now() - start;
        return r;
    };

    if (dims.m == 1 && dims.n == 1) return finish(PointSet(dims, {{0, 0}}), Method::known_formula);

    const IncidenceStructure inc(dims, opts.enumeration_budget);
    const auto known = opts.use_closed_forms ? tau_known(dims) : std::nullopt;

    std::vector<int> initial;
    if (opts.seed_witness && opts.seed_witness->dims() == dims &&
        verify_no3(*opts.seed_witness, opts.enumeration_budget)) {
        for (const auto& p : opts.seed_witness->members()) initial.push_back(static_cast<int>(dims.index(p)));
    }
    const auto greedy = detail::greedy_set(inc);
    if (greedy.size() > initial.size()) initial = greedy;
    if (known && static_cast<i64>(initial.size()) > known->value) {
        throw std::logic_error("seed witness exceeds the closed-form value");
    }

    detail::BranchAndBound bnb(inc, opts, start);
    if (known) {
        if (static_cast<i64>(initial.size()) < known->value) {
            // Look for a witness of exactly the known size.
            initial.resize(std::min<std::size_t>(initial.size(), static_cast<std::size_t>(known->value - 1)));
            bnb.run(initial, known->value);
            if (bnb.timed_out() && bnb.best_size() < known->value) {
                throw search_budget_exhausted(dims, detail::to_point_set(dims, bnb.best_set()));
            }
            if (bnb.best_size() < known->value) {
                throw std::logic_error("no witness of the closed-form size exists");
            }
            return finish(detail::to_point_set(dims, bnb.best_set()), Method::known_formula);
        }
        return finish(detail::to_point_set(dims, initial), Method::known_formula);
    }

    bnb.run(initial, upper);
    const auto best = detail::to_point_set(dims, bnb.best_set());
    if (bnb.best_size() >= upper) return finish(best, Method::bound_meet);
    if (bnb.timed_out()) throw search_budget_exhausted(dims, best);
    return finish(best, Method::search);
}

}  // namespace torusline
