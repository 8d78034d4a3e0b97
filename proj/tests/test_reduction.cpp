#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "properties.hpp"
#include "torusline/cache.hpp"
#include "torusline/reduction.hpp"

using namespace torusline;
using namespace std::chrono_literals;

namespace {

std::vector<i64> row(i64 z) {
    switch (z) {
        case 2: return {2, 4, 2, 4, 2, 4, 2, 4, 2, 4, 2, 4, 2, 4, 2, 4, 2, 4, 2, 4};
        case 3: return {2, 2, 4, 2, 2, 4, 2, 2, 6, 2, 2, 4, 2, 2, 4, 2, 2, 6, 2, 2};
        case 4: return {2, 4, 2, 6, 2, 4, 2, 8, 2, 4, 2, 6, 2, 4, 2, 8, 2, 4, 2, 6};
        case 5: return {2, 2, 2, 2, 6, 2, 2, 2, 2, 6, 2, 2, 2, 2, 6, 2, 2, 2, 2, 6};
        case 6: return {2, 4, 4, 4, 2, 8, 2, 4, 6, 4, 2, 8, 2, 4, 4, 4, 2, 10, 2, 4};
        default: return {};
    }
}

std::filesystem::path temp_file(const std::string& stem) {
    static std::mt19937_64 rng(std::random_device{}());
    auto p = std::filesystem::temp_directory_path() / ("torusline-test-" + stem + "-" + std::to_string(rng()));
    std::filesystem::remove_all(p);
    return p;
}

TauResolver& shared_resolver() {
    static TauResolver r;
    return r;
}

std::vector<std::string> collected;
TauCache::WarningSink collect() {
    return [](const std::string& msg) { collected.push_back(msg); };
}

}  // namespace

TEST(StripCoprime, Examples) {
    const auto a = strip_coprime({4, 6});
    EXPECT_EQ(a.reduced, TorusDims(4, 2));
    ASSERT_EQ(a.steps.size(), 1u);
    EXPECT_EQ(a.steps[0].x, 1);
    EXPECT_EQ(a.steps[0].y, 3);
    EXPECT_TRUE(a.steps[0].conditions.hold());

    const auto b = strip_coprime({12, 18});
    EXPECT_EQ(b.reduced, TorusDims(12, 18));
    EXPECT_TRUE(b.steps.empty());

    const auto c = strip_coprime({6, 35});
    EXPECT_EQ(c.reduced, TorusDims(6, 35));
    EXPECT_TRUE(c.steps.empty());

    const auto d = strip_coprime({2 * 9 * 5, 2 * 7 * 11});
    EXPECT_EQ(d.reduced, TorusDims(2, 2));
    EXPECT_EQ(d.steps.size(), 4u);
    for (const auto& s : d.steps) EXPECT_NO_THROW(s.validate());
}

TEST(ReductionStep, RejectsBadConditions) {
    EXPECT_THROW(ReductionStep::make({4, 6}, {2, 3}), std::logic_error);  // gcd(x, y) = 2
    EXPECT_THROW(ReductionStep::make({4, 6}, {4, 4}), std::invalid_argument);
    EXPECT_THROW(ReductionStep::make({3, 5}, {1, 1}), std::logic_error);
    ReductionStep bad = ReductionStep::make({4, 6}, {4, 2});
    bad.y = 2;
    EXPECT_THROW(bad.validate(), std::logic_error);
}

TEST(StripCoprime, ResultKeepsOnlySharedPrimes) {
    for (i64 m = 1; m <= 60; ++m) {
        for (i64 n = 1; n <= 60; ++n) {
            const TorusDims d{m, n};
            const auto s = strip_coprime(d);
            if (d.gcd_mn() == 1) {
                ASSERT_EQ(s.reduced, d);
                continue;
            }
            ASSERT_EQ(s.reduced.gcd_mn(), d.gcd_mn());
            for (const auto& f : factorize(s.reduced.m).factors) ASSERT_EQ(n % f.prime, 0);
            for (const auto& f : factorize(s.reduced.n).factors) ASSERT_EQ(m % f.prime, 0);
            TorusDims cur = d;
            for (const auto& step : s.steps) {
                ASSERT_EQ(step.from, cur);
                step.validate();
                cur = step.to;
            }
            ASSERT_EQ(cur, s.reduced);
        }
    }
}

TEST(Sigma, Examples) {
    auto& r = shared_resolver();
    EXPECT_EQ(r.sigma(6, 18).value, 10);
    EXPECT_EQ(r.sigma(5, 7).value, 2);
    EXPECT_EQ(r.sigma(4, 12).value, 6);
    EXPECT_EQ(r.sigma(4, 12).method, Method::reduction);
    EXPECT_EQ(r.sigma(4, 6).value, r.sigma(4, 2).value);
    EXPECT_THROW(r.sigma(1, 5), std::invalid_argument);
    EXPECT_THROW(r.sigma(0, 5), std::invalid_argument);
    EXPECT_THROW(r.sigma(3, 0), std::invalid_argument);
}

TEST(SigmaTable, PublishedRows) {
    auto& r = shared_resolver();
    for (i64 z = 2; z <= 6; ++z) {
        std::vector<i64> got;
        for (const auto& e : r.sigma_table(z, 20)) got.push_back(e.value);
        EXPECT_EQ(got, row(z)) << "z=" << z;
    }
    EXPECT_THROW(r.sigma_table(1, 5), std::invalid_argument);
}

TEST(Resolver, ReducedWitnessIsValidOnTheLargeTorus) {
    auto& r = shared_resolver();
    for (const TorusDims d : {TorusDims{4, 6}, TorusDims{12, 20}, TorusDims{9, 30}, TorusDims{8, 28}}) {
        const auto res = r.resolve(d);
        EXPECT_EQ(res.witness.dims(), d);
        EXPECT_EQ(static_cast<i64>(res.witness.size()), res.value);
        EXPECT_TRUE(verify_no3(res.witness));
        EXPECT_EQ(res.value, tau_exact(d).value) << d;
    }
}

TEST(PeriodPrimePower, Examples) {
    auto& r = shared_resolver();
    const auto p2 = r.period_prime_power(2, 1);
    EXPECT_EQ(p2.period, 2);
    EXPECT_EQ(p2.kind, PeriodKind::proved_prime_power);
    EXPECT_EQ(p2.evidence.size(), 2u);
    EXPECT_EQ(r.period_prime_power(3, 1).period, 9);
    const auto p4 = r.period_prime_power(2, 2);
    EXPECT_EQ(p4.period, 8);
    EXPECT_EQ(p4.z, 4);
    EXPECT_THROW(r.period_prime_power(6, 1), std::invalid_argument);
    EXPECT_THROW(r.period_prime_power(2, 0), std::invalid_argument);
}

TEST(PeriodPrimePower, PeriodHoldsOverThreePeriods) {
    auto& r = shared_resolver();
    for (i64 p : {2, 3, 5}) {
        const auto rep = r.period_prime_power(p, 1);
        EXPECT_TRUE(rep.period == p || rep.period == p * p) << p;
        for (i64 n = 1; n <= 3 * rep.period; ++n) {
            ASSERT_EQ(r.sigma(p, n).value, r.sigma(p, n + rep.period).value) << "p=" << p << " n=" << n;
        }
    }
}

TEST(PeriodEmpirical, Examples) {
    auto& r = shared_resolver();
    const auto z2 = r.period_empirical(2, 20);
    ASSERT_TRUE(z2);
    EXPECT_EQ(z2->period, 2);
    EXPECT_EQ(z2->kind, PeriodKind::empirical);
    EXPECT_EQ(r.period_empirical(5, 20)->period, 5);
    EXPECT_EQ(r.period_empirical(4, 20)->period, 8);
    EXPECT_EQ(r.period_empirical(3, 20)->period, 9);
    EXPECT_FALSE(r.period_empirical(6, 10));
    EXPECT_FALSE(r.period_empirical(6, 20));
    EXPECT_EQ(r.period_empirical(5, 20)->evidence.size(), 20u);
    EXPECT_THROW(r.period_empirical(1, 10), std::invalid_argument);
}

// Both sides are searched directly; pairs where either search runs out of
// time are skipped.
TEST(Sigma, DependsOnlyOnTheCore) {
    SearchOptions direct;
    direct.time_budget = 1s;
    auto solve = [&](i64 z, i64 n) -> std::optional<i64> {
        try {
            return tau_exact({z, n}, direct).value;
        } catch (const search_budget_exhausted&) {
            return std::nullopt;
        }
    };
    int compared = 0;
    for (i64 z = 2; z <= 10; ++z) {
        for (i64 n = 1; n <= 100; ++n) {
            const i64 core = core_wrt(n, z);
            if (core == n) continue;
            const auto small = solve(z, core);
            if (!small) continue;
            const auto full = solve(z, n);
            if (!full) continue;
            ASSERT_EQ(*full, *small) << "z=" << z << " n=" << n << " core=" << core;
            ++compared;
        }
    }
    EXPECT_GT(compared, 300);
}

TEST(Reduction, EqualityAndMonotonicityOnDirectlySolvedTori) {
    std::size_t timeouts = 0;
    const auto solved = properties::solve_directly(400, 1s, &timeouts);
    const auto [mono, equal] = properties::monotonicity_and_reduction(solved, 400);
    EXPECT_TRUE(mono.ok()) << mono.violations << " violations, first " << mono.first;
    EXPECT_TRUE(equal.ok()) << equal.violations << " violations, first " << equal.first;
    EXPECT_GT(equal.checked, 200u);
}

TEST(GcdClassTable, StatusesForZ4) {
    auto& r = shared_resolver();
    const auto cells = r.gcd_class_table(4, 8);
    ASSERT_EQ(cells.size(), 4u);
    const std::vector<i64> want = {2, 4, 6, 8};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        ASSERT_TRUE(cells[i].value);
        EXPECT_EQ(*cells[i].value, want[i]);
        EXPECT_NE(cells[i].status, ClassStatus::representative);
        EXPECT_NE(cells[i].status, ClassStatus::out_of_budget);
    }
}

TEST(GcdClassTable, PublishedSigma6Classes) {
    auto& r = shared_resolver();
    const auto cells = r.gcd_class_table(6, 108);
    // rows 3^0..3^3, columns 2^0..2^2
    const std::map<i64, i64> want = {{1, 2},  {2, 4},   {4, 4},   {3, 4},   {6, 8},   {12, 8},
                                     {9, 6},  {18, 10}, {36, 12}, {27, 6},  {54, 12}, {108, 12}};
    ASSERT_EQ(cells.size(), want.size());
    for (const auto& c : cells) {
        ASSERT_TRUE(c.value) << c.representative;
        EXPECT_EQ(*c.value, want.at(c.representative)) << c.representative;
        if (c.representative == 12) {
            EXPECT_EQ(c.status, ClassStatus::representative) << "2^k*3 classes rest on the conjecture";
        } else {
            EXPECT_NE(c.status, ClassStatus::representative) << c.representative;
        }
    }
}

TEST(Cache, RoundTrip) {
    const auto path = temp_file("rt") / "tau.jsonl";
    const auto r = tau_exact({4, 16});
    {
        TauCache c(path);
        EXPECT_FALSE(c.get({4, 16}));
        c.put(r);
        const auto got = c.get({4, 16});
        ASSERT_TRUE(got);
        EXPECT_EQ(got->value, r.value);
        EXPECT_EQ(got->witness, r.witness);
    }
    TauCache reopened(path);
    const auto got = reopened.get({4, 16});
    ASSERT_TRUE(got);
    EXPECT_EQ(got->value, r.value);
    EXPECT_EQ(got->witness, r.witness);
    EXPECT_EQ(got->method, r.method);
    EXPECT_EQ(got->version, kResultFormatVersion);
    const auto swapped = reopened.get({16, 4});
    ASSERT_TRUE(swapped);
    EXPECT_EQ(swapped->witness, r.witness.transposed());
    std::filesystem::remove_all(path.parent_path());
}

TEST(Cache, EmptyAndMissing) {
    TauCache c(temp_file("missing") / "none.jsonl");
    EXPECT_EQ(c.size(), 0u);
    EXPECT_FALSE(c.get({4, 4}));
}

TEST(Cache, CorruptLinesAreSkipped) {
    const auto dir = temp_file("corrupt");
    std::filesystem::create_directories(dir);
    const auto path = dir / "tau.jsonl";
    const auto good = tau_exact({4, 4});
    auto bad_version = nlohmann::json::parse(cache_line(tau_exact({2, 2})));
    bad_version["version"] = 99;
    auto lying = nlohmann::json::parse(cache_line(good));
    lying["tau"] = 5;
    auto collinear = nlohmann::json::parse(cache_line(tau_exact({3, 3})));
    collinear["witness"] = nlohmann::json::array({{0, 0}, {1, 1}, {2, 2}, {0, 1}});
    {
        std::ofstream out(path);
        out << "{not json\n"
            << bad_version.dump() << '\n'
            << lying.dump() << '\n'
            << collinear.dump() << '\n'
            << cache_line(good) << '\n'
            << "[1,2,3]\n";
    }
    collected.clear();
    TauCache c(path, collect());
    EXPECT_EQ(c.size(), 1u);
    ASSERT_TRUE(c.get({4, 4}));
    EXPECT_EQ(c.get({4, 4})->value, 6);
    EXPECT_FALSE(c.get({2, 2}));
    EXPECT_FALSE(c.get({3, 3}));
    EXPECT_EQ(collected.size(), 5u);
    std::filesystem::remove_all(dir);
}

TEST(Cache, ParseRejectsTauAboveBound) {
    auto j = nlohmann::json::parse(cache_line(tau_exact({2, 2})));
    j["tau"] = 5;
    j["witness"] = nlohmann::json::array({{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 0}});
    EXPECT_THROW(parse_cache_line(j.dump()), std::invalid_argument);
}

TEST(Resolver, UsesCacheAcrossInstances) {
    const auto path = temp_file("resolver") / "tau.jsonl";
    {
        TauCache cache(path);
        TauResolver r({}, &cache);
        EXPECT_EQ(r.sigma(6, 6).value, 8);
        EXPECT_GE(cache.size(), 1u);
    }
    TauCache cache(path);
    ASSERT_TRUE(cache.get({6, 6}));
    EXPECT_EQ(cache.get({6, 6})->value, 8);
    std::filesystem::remove_all(path.parent_path());
}
