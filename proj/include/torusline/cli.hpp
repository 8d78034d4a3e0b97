#pragma once

/**
 * @file cli.hpp
 * @brief The `torusline` command line: tau, sigma, period, construct, verify,
 * lines, reduce and classes.
 *
 * Exit codes: 0 exact or verified, 2 time budget exhausted, 3 verification
 * failed, 64 usage or input error.
 */

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "torusline/cache.hpp"
#include "torusline/construction.hpp"
#include "torusline/pointfile.hpp"
#include "torusline/reduction.hpp"
#include "torusline/solver.hpp"
#include "torusline/torus.hpp"

namespace torusline::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBudget = 2;
inline constexpr int kExitVerifyFailed = 3;
inline constexpr int kExitUsage = 64;

enum class OutputFormat { plain, json, csv };

/// Cache file used unless --no-cache is given: $TORUSLINE_CACHE, else
/// $HOME/.cache/torusline/tau.jsonl.
inline std::optional<std::filesystem::path> default_cache_path() {
    if (const char* env = std::getenv("TORUSLINE_CACHE"); env && *env) return std::filesystem::path(env);
    if (const char* home = std::getenv("HOME"); home && *home) {
        return std::filesystem::path(home) / ".cache" / "torusline" / "tau.jsonl";
    }
    return std::nullopt;
}

namespace detail {

struct Common {
    double budget_seconds = 600;
    bool extended = false;
    int threads = 1;
    bool no_cache = false;
    std::string cache_path;
    bool json = false;
};

inline std::string fmt_point(const Point& p) {
    return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

inline std::string fmt_points(const std::vector<Point>& pts) {
    std::string s;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += ' ';
        s += fmt_point(pts[i]);
    }
    return s;
}

inline nlohmann::json points_json(const std::vector<Point>& pts) {
    auto arr = nlohmann::json::array();
    for (const auto& p : pts) arr.push_back({p.x, p.y});
    return arr;
}

inline nlohmann::json line_json(const Line& l) {
    return {{"generator", {l.generator().u, l.generator().v}},
            {"base", {l.base().x, l.base().y}},
            {"length", l.size()},
            {"points", points_json(l.points())}};
}

inline nlohmann::json certificate_json(const Certificate& c) {
    nlohmann::json j;
    j["p"] = c.spec.p;
    j["a"] = c.spec.a;
    j["m"] = c.spec.dims.m;
    j["n"] = c.spec.dims.n;
    j["points"] = points_json(c.points);
    j["point_count"] = c.points.size();
    j["triples_checked"] = c.triples_checked;
    j["upper_bound"] = c.upper_bound;
    j["verdict"] = c.passed ? "PASS" : "FAIL";
    if (c.tau()) j["tau"] = *c.tau();
    if (c.violation) {
        j["violation"] = {{"triple", points_json({c.violation->a, c.violation->b, c.violation->c})}};
        if (c.violation->line) j["violation"]["line"] = line_json(*c.violation->line);
    }
    j["elapsed_s"] = c.elapsed.count();
    return j;
}

inline SearchOptions search_options(const Common& c) {
    SearchOptions o;
    const double seconds = c.extended ? std::max(c.budget_seconds, 1800.0) : c.budget_seconds;
    o.time_budget = std::chrono::duration<double>(seconds);
    o.thread_count = std::max(1, c.threads);
    return o;
}

inline std::unique_ptr<TauCache> open_cache(const Common& c, std::ostream& err) {
    if (c.no_cache) return nullptr;
    std::optional<std::filesystem::path> path;
    if (!c.cache_path.empty()) path = c.cache_path;
    else path = default_cache_path();
    if (!path) return nullptr;
    return std::make_unique<TauCache>(*path, [&err](const std::string& msg) { err << "warning: " << msg << '\n'; });
}

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(int argc, const char* const* argv) {
        CLI::App app{"Exact no-three-in-line values on discrete tori", "torusline"};
        app.require_subcommand(1);
        app.set_help_all_flag("--help-all");

        auto add_common = [this](CLI::App* sub, bool search) {
            if (search) {
                sub->add_option("--budget", common_.budget_seconds, "time budget per search in seconds")
                    ->capture_default_str();
                sub->add_flag("--extended", common_.extended, "allow searches of up to 30 minutes");
                sub->add_option("--threads", common_.threads, "search worker threads")->capture_default_str();
                sub->add_flag("--no-cache", common_.no_cache, "neither read nor write the result cache");
                sub->add_option("--cache", common_.cache_path, "cache file (default $TORUSLINE_CACHE)");
            }
        };

        i64 m = 0, n = 0;
        bool show_witness = false;
        auto* tau = app.add_subcommand("tau", "maximum no-three-in-line set on T_{m x n}");
        tau->add_option("m", m)->required();
        tau->add_option("n", n)->required();
        tau->add_flag("--witness", show_witness, "print the witness set");
        tau->add_flag("--json", common_.json, "JSON output");
        add_common(tau, true);

        i64 z = 0, to = 20;
        std::string format = "plain";
        auto* sig = app.add_subcommand("sigma", "the sequence sigma_z(n) = tau_{z,n} for n = 1..N");
        sig->add_option("z", z)->required();
        sig->add_option("--to", to, "last index")->capture_default_str();
        sig->add_option("--format", format, "plain, json or csv")
            ->check(CLI::IsMember({"plain", "json", "csv"}))
            ->capture_default_str();
        add_common(sig, true);

        i64 bound = 20;
        bool prime_power = false;
        auto* per = app.add_subcommand("period", "period of sigma_z");
        per->add_option("z", z)->required();
        per->add_flag("--prime-power", prime_power, "z = p^a: locate the proved period");
        per->add_option("--bound", bound, "scan bound for the empirical period")->capture_default_str();
        per->add_flag("--json", common_.json, "JSON output");
        add_common(per, true);

        i64 p = 0;
        int a = 1;
        bool do_verify = false;
        std::string out_file;
        auto* con = app.add_subcommand("construct", "2p^a points on T_{p^a x p^((a-1)p+2)}");
        con->add_option("p", p)->required();
        con->add_option("a", a)->required();
        con->add_flag("--verify", do_verify, "check every triple and emit a certificate");
        con->add_option("--out", out_file, "write the points as a point file");
        con->add_flag("--json", common_.json, "JSON output");

        std::string points_file;
        auto* ver = app.add_subcommand("verify", "check a point file for three collinear points");
        ver->add_option("m", m)->required();
        ver->add_option("n", n)->required();
        ver->add_option("file", points_file)->required();
        ver->add_flag("--json", common_.json, "JSON output");

        std::vector<i64> through;
        auto* lin = app.add_subcommand("lines", "list the lines of T_{m x n}");
        lin->add_option("m", m)->required();
        lin->add_option("n", n)->required();
        lin->add_option("--through", through, "x1 y1 x2 y2: only lines through both points")
            ->expected(4);
        lin->add_flag("--json", common_.json, "JSON output");

        auto* red = app.add_subcommand("reduce", "strip coprime prime powers from m and n");
        red->add_option("m", m)->required();
        red->add_option("n", n)->required();
        red->add_flag("--json", common_.json, "JSON output");

        i64 modulus = 0;
        auto* cls = app.add_subcommand("classes", "sigma_z on the classes gcd(n, M) = r");
        cls->add_option("z", z)->required();
        cls->add_option("modulus", modulus)->required();
        cls->add_flag("--json", common_.json, "JSON output");
        add_common(cls, true);

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out_, err_);
            return code == 0 ? kExitOk : kExitUsage;
        }

        try {
            if (*tau) return cmd_tau(TorusDims(m, n), show_witness);
            if (*sig) return cmd_sigma(z, to, format);
            if (*per) return cmd_period(z, prime_power, bound);
            if (*con) return cmd_construct(p, a, do_verify, out_file);
            if (*ver) return cmd_verify(TorusDims(m, n), points_file);
            if (*lin) return cmd_lines(TorusDims(m, n), through);
            if (*red) return cmd_reduce(TorusDims(m, n));
            if (*cls) return cmd_classes(z, modulus);
        } catch (const search_budget_exhausted& e) {
            err_ << "unknown: " << e.what() << " (lower bound only)\n";
            return kExitBudget;
        } catch (const budget_exceeded& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitBudget;
        } catch (const point_file_error& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::invalid_argument& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::overflow_error& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        return kExitUsage;
    }

private:
    TauResolver make_resolver() {
        cache_ = open_cache(common_, err_);
        return TauResolver(search_options(common_), cache_.get());
    }

    int cmd_tau(const TorusDims& dims, bool show_witness) {
        auto resolver = make_resolver();
        TauResult r;
        try {
            r = resolver.resolve(dims);
        } catch (const search_budget_exhausted& e) {
            if (common_.json) {
                out_ << nlohmann::json{{"m", dims.m},
                                       {"n", dims.n},
                                       {"status", "budget_exhausted"},
                                       {"lower_bound", e.best_so_far().size()},
                                       {"witness", to_json(e.best_so_far())}}
                            .dump()
                     << '\n';
            } else {
                out_ << "tau(" << dims.m << "," << dims.n << ") unknown; best so far "
                     << e.best_so_far().size() << " (lower bound, time budget exhausted)\n";
            }
            return kExitBudget;
        }
        if (common_.json) {
            nlohmann::json j{{"m", dims.m},
                             {"n", dims.n},
                             {"tau", r.value},
                             {"method", std::string(to_string(r.method))},
                             {"upper_bound", tau_upper_bound(dims)},
                             {"status", "exact"}};
            if (show_witness) j["witness"] = to_json(r.witness);
            out_ << j.dump() << '\n';
        } else {
            out_ << "tau(" << dims.m << "," << dims.n << ") = " << r.value << "  [" << to_string(r.method)
                 << "]\n";
            if (show_witness) out_ << "witness: " << fmt_points(r.witness.members()) << '\n';
        }
        return kExitOk;
    }

    int cmd_sigma(i64 z, i64 to, const std::string& format) {
        if (z < 2) throw std::invalid_argument("sigma_z is defined for z greater than 1");
        if (to < 1) throw std::invalid_argument("--to must be positive");
        auto resolver = make_resolver();
        const auto rows = resolver.sigma_table(z, to);
        if (format == "csv") {
            out_ << "z,n,sigma\n";
            for (const auto& e : rows) out_ << e.z << ',' << e.n << ',' << e.value << '\n';
        } else if (format == "json") {
            auto arr = nlohmann::json::array();
            for (const auto& e : rows) {
                arr.push_back({{"z", e.z}, {"n", e.n}, {"sigma", e.value}, {"method", std::string(to_string(e.method))}});
            }
            out_ << arr.dump() << '\n';
        } else {
            out_ << "sigma_" << z << "(1.." << to << ") = ";
            for (std::size_t i = 0; i < rows.size(); ++i) out_ << (i ? "," : "") << rows[i].value;
            out_ << '\n';
        }
        return kExitOk;
    }

    int cmd_period(i64 z, bool prime_power, i64 bound) {
        if (z < 2) throw std::invalid_argument("sigma_z is defined for z greater than 1");
        auto resolver = make_resolver();
        std::optional<PeriodReport> rep;
        if (prime_power) {
            const auto f = factorize(z);
            if (!f.is_prime_power()) {
                throw std::invalid_argument(std::to_string(z) + " is not a prime power");
            }
            rep = resolver.period_prime_power(f.factors[0].prime, f.factors[0].exponent);
        } else {
            rep = resolver.period_empirical(z, bound);
        }
        if (common_.json) {
            nlohmann::json j{{"z", z}};
            if (rep) {
                j["period"] = rep->period;
                j["kind"] = std::string(to_string(rep->kind));
                j["proof"] = rep->kind == PeriodKind::proved_prime_power;
                if (rep->first_max_index) j["first_max_index"] = *rep->first_max_index;
                auto ev = nlohmann::json::array();
                for (const auto& e : rep->evidence) ev.push_back({e.n, e.value});
                j["evidence"] = ev;
            } else {
                j["period"] = nullptr;
                j["kind"] = "empirical";
                j["proof"] = false;
                j["bound"] = bound;
            }
            out_ << j.dump() << '\n';
            return kExitOk;
        }
        if (!rep) {
            out_ << "sigma_" << z << ": no period <= " << bound
                 << " observed (empirical scan, not a proof)\n";
            return kExitOk;
        }
        if (rep->kind == PeriodKind::proved_prime_power) {
            out_ << "sigma_" << z << " has period " << rep->period
                 << " (proved: first n with sigma_" << z << "(n) = " << 2 * z << ")\n";
        } else {
            out_ << "sigma_" << z << " empirical period " << rep->period << " (observed for n <= " << bound
                 << ", not a proof)\n";
        }
        out_ << "evidence:";
        for (const auto& e : rep->evidence) out_ << ' ' << e.n << ':' << e.value;
        out_ << '\n';
        return kExitOk;
    }

    int cmd_construct(i64 p, int a, bool verify, const std::string& out_file) {
        const ConstructionSpec spec(p, a);
        if (!verify) {
            const PointSet s = build_xy(spec);
            if (!out_file.empty()) write_file(out_file, s, spec);
            if (common_.json) {
                out_ << nlohmann::json{{"p", p}, {"a", a}, {"m", spec.dims.m}, {"n", spec.dims.n},
                                       {"points", to_json(s)}}
                            .dump()
                     << '\n';
            } else {
                out_ << s.size() << " points on T_{" << spec.dims.m << "x" << spec.dims.n << "}\n";
                for (const auto& q : s.members()) out_ << q.x << ' ' << q.y << '\n';
            }
            return kExitOk;
        }
        const Certificate cert = certify_construction(spec);
        if (cert.passed && !out_file.empty()) {
            write_file(out_file, PointSet(spec.dims, cert.points), spec);
        }
        if (common_.json) {
            out_ << certificate_json(cert).dump() << '\n';
        } else {
            out_ << cert.points.size() << " points on T_{" << spec.dims.m << "x" << spec.dims.n << "}, "
                 << cert.triples_checked << " triples checked: " << (cert.passed ? "PASS" : "FAIL") << '\n';
            if (cert.tau()) {
                out_ << "upper bound 2 gcd(m,n) = " << cert.upper_bound << " met: τ = " << *cert.tau()
                     << '\n';
            }
            if (cert.violation) {
                out_ << "collinear: " << fmt_point(cert.violation->a) << ' ' << fmt_point(cert.violation->b)
                     << ' ' << fmt_point(cert.violation->c);
                if (cert.violation->line) {
                    out_ << " on line " << fmt_point(cert.violation->line->base()) << " + <"
                         << cert.violation->line->generator().u << "," << cert.violation->line->generator().v
                         << ">";
                }
                out_ << '\n';
            }
        }
        return cert.passed ? kExitOk : kExitVerifyFailed;
    }

    void write_file(const std::string& path, const PointSet& s, const ConstructionSpec& spec) {
        std::ofstream f(path);
        if (!f) throw point_file_error("cannot write " + path);
        write_points(f, s, "construction p=" + std::to_string(spec.p) + " a=" + std::to_string(spec.a));
    }

    int cmd_verify(const TorusDims& dims, const std::string& file) {
        const auto pts = read_point_file(file);
        for (const auto& q : pts) {
            if (!dims.contains(q)) {
                throw point_file_error(file + ": point " + fmt_point(q) + " outside T_{" + std::to_string(dims.m) +
                                       "x" + std::to_string(dims.n) + "}");
            }
        }
        const PointSet s(dims, pts);
        const auto bad = find_collinear_triple(s);
        if (common_.json) {
            nlohmann::json j{{"m", dims.m}, {"n", dims.n}, {"points", s.size()}, {"valid", !bad.has_value()}};
            if (bad) {
                j["violation"] = {{"triple", points_json({bad->a, bad->b, bad->c})}};
                if (bad->line) j["violation"]["line"] = line_json(*bad->line);
            }
            out_ << j.dump() << '\n';
        } else if (bad) {
            out_ << "INVALID: " << fmt_point(bad->a) << ' ' << fmt_point(bad->b) << ' ' << fmt_point(bad->c)
                 << " are collinear\n";
        } else {
            out_ << "VALID: " << s.size() << " points, no three collinear on T_{" << dims.m << "x" << dims.n
                 << "}\n";
        }
        return bad ? kExitVerifyFailed : kExitOk;
    }

    int cmd_lines(const TorusDims& dims, const std::vector<i64>& through) {
        std::vector<Line> lines;
        if (!through.empty()) {
            const Point a{through[0], through[1]};
            const Point b{through[2], through[3]};
            if (!dims.contains(a) || !dims.contains(b)) throw std::invalid_argument("--through point outside torus");
            lines = lines_through_pair(dims, a, b);
        } else {
            lines = enumerate_lines(dims);
        }
        if (common_.json) {
            auto arr = nlohmann::json::array();
            for (const auto& l : lines) arr.push_back(line_json(l));
            out_ << nlohmann::json{{"m", dims.m}, {"n", dims.n}, {"count", lines.size()}, {"lines", arr}}.dump()
                 << '\n';
            return kExitOk;
        }
        out_ << lines.size() << " lines\n";
        for (const auto& l : lines) {
            out_ << "<" << l.generator().u << "," << l.generator().v << "> from " << fmt_point(l.base())
                 << " length " << l.size() << ": " << fmt_points(l.points()) << '\n';
        }
        return kExitOk;
    }

    int cmd_reduce(const TorusDims& dims) {
        const auto r = strip_coprime(dims);
        if (common_.json) {
            auto steps = nlohmann::json::array();
            for (const auto& s : r.steps) {
                steps.push_back({{"from", {s.from.m, s.from.n}},
                                 {"to", {s.to.m, s.to.n}},
                                 {"x", s.x},
                                 {"y", s.y},
                                 {"gcd_x_y", s.conditions.gcd_x_y},
                                 {"gcd_m_y", s.conditions.gcd_m_y},
                                 {"gcd_n_x", s.conditions.gcd_n_x}});
            }
            out_ << nlohmann::json{{"m", dims.m},
                                   {"n", dims.n},
                                   {"reduced", {r.reduced.m, r.reduced.n}},
                                   {"coprime", dims.gcd_mn() == 1},
                                   {"steps", steps}}
                        .dump()
                 << '\n';
            return kExitOk;
        }
        out_ << "(" << dims.m << "," << dims.n << ") -> (" << r.reduced.m << "," << r.reduced.n << ")";
        if (dims.gcd_mn() == 1) out_ << "  gcd = 1, tau = " << (dims.cells() == 1 ? 1 : 2);
        out_ << '\n';
        for (const auto& s : r.steps) {
            out_ << "  step (" << s.from.m << "," << s.from.n << ") -> (" << s.to.m << "," << s.to.n
                 << ") with x=" << s.x << ", y=" << s.y << "; gcd(x,y)=" << s.conditions.gcd_x_y
                 << " gcd(m,y)=" << s.conditions.gcd_m_y << " gcd(n,x)=" << s.conditions.gcd_n_x << '\n';
        }
        return kExitOk;
    }

    int cmd_classes(i64 z, i64 modulus) {
        if (modulus < 1) throw std::invalid_argument("modulus must be positive");
        auto resolver = make_resolver();
        const auto cells = resolver.gcd_class_table(z, modulus);
        bool any_budget = false;
        if (common_.json) {
            auto arr = nlohmann::json::array();
            for (const auto& c : cells) {
                nlohmann::json j{{"gcd", c.representative}, {"status", std::string(to_string(c.status))}};
                j["sigma"] = c.value ? nlohmann::json(*c.value) : nlohmann::json(nullptr);
                if (c.best_so_far) j["lower_bound"] = *c.best_so_far;
                arr.push_back(j);
                any_budget = any_budget || c.status == ClassStatus::out_of_budget;
            }
            out_ << nlohmann::json{{"z", z}, {"modulus", modulus}, {"classes", arr}}.dump() << '\n';
        } else {
            out_ << "gcd(n," << modulus << ")  sigma_" << z << "  status\n";
            for (const auto& c : cells) {
                out_ << c.representative << "  ";
                if (c.value) out_ << *c.value;
                else out_ << ">=" << c.best_so_far.value_or(0);
                out_ << "  " << to_string(c.status) << '\n';
                any_budget = any_budget || c.status == ClassStatus::out_of_budget;
            }
        }
        return any_budget ? kExitBudget : kExitOk;
    }

    std::ostream& out_;
    std::ostream& err_;
    Common common_;
    std::unique_ptr<TauCache> cache_;
};

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::Runner(out, err).run(argc, argv);
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"torusline"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace torusline::cli
