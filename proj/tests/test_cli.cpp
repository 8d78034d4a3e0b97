#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "torusline/cli.hpp"

using namespace torusline;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.push_back("--no-cache");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Commands without a search take no cache flags.
Outcome run_plain(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("torusline-cli-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    std::filesystem::path file(const std::string& name, const std::string& content) const {
        const auto p = path_ / name;
        std::ofstream(p) << content;
        return p;
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace

TEST(CliTau, Values) {
    const auto a = run_cli({"tau", "4", "4"});
    EXPECT_EQ(a.code, cli::kExitOk);
    EXPECT_NE(a.out.find("tau(4,4) = 6"), std::string::npos) << a.out;

    const auto b = run_cli({"tau", "7", "11", "--json"});
    EXPECT_EQ(b.code, cli::kExitOk);
    const auto j = nlohmann::json::parse(b.out);
    EXPECT_EQ(j["tau"], 2);
    EXPECT_EQ(j["method"], "known_formula");

    const auto c = run_cli({"tau", "1", "1"});
    EXPECT_NE(c.out.find("tau(1,1) = 1"), std::string::npos) << c.out;
}

TEST(CliTau, WitnessAndErrors) {
    const auto w = run_cli({"tau", "4", "8", "--witness", "--json"});
    ASSERT_EQ(w.code, cli::kExitOk);
    const auto j = nlohmann::json::parse(w.out);
    EXPECT_EQ(j["tau"], 8);
    EXPECT_EQ(j["witness"].size(), 8u);

    EXPECT_EQ(run_cli({"tau", "0", "4"}).code, cli::kExitUsage);
    EXPECT_EQ(run_cli({"tau", "4"}).code, cli::kExitUsage);
    EXPECT_EQ(run_plain({"bogus"}).code, cli::kExitUsage);
}

TEST(CliTau, BudgetExhaustion) {
    const auto r = run_cli({"tau", "6", "24", "--budget", "0.05"});
    EXPECT_EQ(r.code, cli::kExitBudget);
    EXPECT_NE(r.out.find("lower bound"), std::string::npos) << r.out;
}

TEST(CliSigma, Rows) {
    const auto five = run_cli({"sigma", "5", "--to", "20"});
    EXPECT_EQ(five.code, cli::kExitOk);
    EXPECT_NE(five.out.find("2,2,2,2,6,2,2,2,2,6,2,2,2,2,6,2,2,2,2,6"), std::string::npos) << five.out;

    const auto six = run_cli({"sigma", "6", "--to", "12"});
    EXPECT_NE(six.out.find("2,4,4,4,2,8,2,4,6,4,2,8"), std::string::npos) << six.out;

    const auto csv = run_cli({"sigma", "3", "--to", "3", "--format", "csv"});
    EXPECT_EQ(csv.out, "z,n,sigma\n3,1,2\n3,2,2\n3,3,4\n");

    const auto js = run_cli({"sigma", "2", "--to", "2", "--format", "json"});
    const auto arr = nlohmann::json::parse(js.out);
    ASSERT_EQ(arr.size(), 2u);
    EXPECT_EQ(arr[1]["sigma"], 4);

    const auto bad = run_cli({"sigma", "1", "--to", "5"});
    EXPECT_EQ(bad.code, cli::kExitUsage);
    EXPECT_NE(bad.err.find("greater than 1"), std::string::npos);
}

TEST(CliPeriod, ProvedAndEmpirical) {
    const auto p4 = run_cli({"period", "4", "--prime-power"});
    EXPECT_EQ(p4.code, cli::kExitOk);
    EXPECT_NE(p4.out.find("period 8 (proved"), std::string::npos) << p4.out;

    const auto p3 = run_cli({"period", "3", "--prime-power", "--json"});
    const auto j = nlohmann::json::parse(p3.out);
    EXPECT_EQ(j["period"], 9);
    EXPECT_EQ(j["proof"], true);

    const auto e6 = run_cli({"period", "6", "--bound", "20", "--json"});
    EXPECT_EQ(e6.code, cli::kExitOk);
    const auto k = nlohmann::json::parse(e6.out);
    EXPECT_EQ(k["kind"], "empirical");
    EXPECT_EQ(k["proof"], false);

    const auto e2 = run_cli({"period", "2", "--bound", "10"});
    EXPECT_NE(e2.out.find("not a proof"), std::string::npos) << e2.out;

    EXPECT_EQ(run_cli({"period", "6", "--prime-power"}).code, cli::kExitUsage);
}

TEST(CliConstruct, VerifyAndWrite) {
    TempDir dir;
    const auto out = dir.path() / "xy.txt";
    const auto r = run_plain({"construct", "2", "2", "--verify", "--out", out.string()});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("8 points"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("τ = 8"), std::string::npos) << r.out;

    // The written file is accepted by verify.
    const auto v = run_plain({"verify", "4", "16", out.string()});
    EXPECT_EQ(v.code, cli::kExitOk);
    EXPECT_NE(v.out.find("VALID: 8 points"), std::string::npos) << v.out;

    const auto j = nlohmann::json::parse(run_plain({"construct", "3", "1", "--verify", "--json"}).out);
    EXPECT_EQ(j["verdict"], "PASS");
    EXPECT_EQ(j["triples_checked"], 20);

    EXPECT_EQ(run_plain({"construct", "4", "1"}).code, cli::kExitUsage);
}

TEST(CliVerify, ValidInvalidMalformed) {
    TempDir dir;
    const auto ok = dir.file("ok.txt", "# four points\n0 0\n1 0\n\n0 1\n1 2\n");
    const auto bad = dir.file("bad.txt", "0 0\n1 1\n2 2\n");
    const auto junk = dir.file("junk.txt", "0 0\n1 x\n");
    const auto outside = dir.file("outside.txt", "0 0\n5 1\n");

    const auto a = run_plain({"verify", "3", "3", ok.string()});
    EXPECT_EQ(a.code, cli::kExitOk);
    EXPECT_NE(a.out.find("VALID"), std::string::npos);

    const auto b = run_plain({"verify", "3", "3", bad.string(), "--json"});
    EXPECT_EQ(b.code, cli::kExitVerifyFailed);
    const auto j = nlohmann::json::parse(b.out);
    EXPECT_EQ(j["valid"], false);
    EXPECT_EQ(j["violation"]["triple"].size(), 3u);

    const auto c = run_plain({"verify", "3", "3", junk.string()});
    EXPECT_EQ(c.code, cli::kExitUsage);
    EXPECT_NE(c.err.find(":2:"), std::string::npos) << c.err;

    EXPECT_EQ(run_plain({"verify", "3", "3", outside.string()}).code, cli::kExitUsage);
    EXPECT_EQ(run_plain({"verify", "3", "3", (dir.path() / "missing").string()}).code, cli::kExitUsage);
}

TEST(CliLines, ThroughPair) {
    const auto r = run_plain({"lines", "2", "4", "--through", "0", "0", "0", "2"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_EQ(r.out.rfind("2 lines\n", 0), 0u) << r.out;

    const auto all = nlohmann::json::parse(run_plain({"lines", "3", "3", "--json"}).out);
    EXPECT_EQ(all["count"], 12);
}

TEST(CliReduce, Steps) {
    const auto r = run_plain({"reduce", "4", "6"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("(4,6) -> (4,2)"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("x=1, y=3"), std::string::npos) << r.out;

    const auto j = nlohmann::json::parse(run_plain({"reduce", "6", "35", "--json"}).out);
    EXPECT_EQ(j["coprime"], true);
    EXPECT_TRUE(j["steps"].empty());
}

TEST(CliClasses, Z4) {
    const auto r = run_cli({"classes", "4", "8", "--json"});
    EXPECT_EQ(r.code, cli::kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["classes"].size(), 4u);
    EXPECT_EQ(j["classes"][3]["sigma"], 8);
}

TEST(CliCache, WritesAndReusesFile) {
    TempDir dir;
    const auto cache = (dir.path() / "sub" / "tau.jsonl").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::run({"tau", "6", "6", "--cache", cache}, out, err), cli::kExitOk);
    ASSERT_TRUE(std::filesystem::exists(cache));
    std::ostringstream out2, err2;
    ASSERT_EQ(cli::run({"tau", "6", "6", "--cache", cache, "--json"}, out2, err2), cli::kExitOk);
    EXPECT_EQ(nlohmann::json::parse(out2.str())["tau"], 8);
}
