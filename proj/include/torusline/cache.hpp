#pragma once

// Persistent store of exact tau values: one JSON object per line,
// {"m","n","tau","witness":[[x,y],...],"method","version"}. Keys are stored
// with m <= n; lookups for the transposed torus transpose the witness.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "torusline/solver.hpp"
#include "torusline/torus.hpp"

namespace torusline {

inline nlohmann::json to_json(const PointSet& s) {
    auto arr = nlohmann::json::array();
    for (const auto& p : s.members()) arr.push_back({p.x, p.y});
    return arr;
}

inline std::vector<Point> points_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw std::invalid_argument("witness must be an array");
    std::vector<Point> pts;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
            throw std::invalid_argument("witness entries must be [x, y] integer pairs");
        }
        pts.push_back({e[0].get<i64>(), e[1].get<i64>()});
    }
    return pts;
}

inline std::string cache_line(const TauResult& r) {
    nlohmann::json j;
    j["m"] = r.dims.m;
    j["n"] = r.dims.n;
    j["tau"] = r.value;
    j["witness"] = to_json(r.witness);
    j["method"] = std::string(to_string(r.method));
    j["version"] = r.version;
    return j.dump();
}

/// Parses and validates one cache record; throws std::invalid_argument on
/// anything malformed. Unknown fields are ignored.
inline TauResult parse_cache_line(const std::string& line, i64 budget = kDefaultEnumerationBudget) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("not JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("record is not an object");
    for (const char* key : {"m", "n", "tau", "witness", "method", "version"}) {
        if (!j.contains(key)) throw std::invalid_argument(std::string("missing field ") + key);
    }
    if (!j["version"].is_number_integer() || j["version"].get<int>() != kResultFormatVersion) {
        throw std::invalid_argument("unsupported record version");
    }
    if (!j["m"].is_number_integer() || !j["n"].is_number_integer() || !j["tau"].is_number_integer() ||
        !j["method"].is_string()) {
        throw std::invalid_argument("field has the wrong type");
    }
    TauResult r;
    r.dims = TorusDims(j["m"].get<i64>(), j["n"].get<i64>());
    r.value = j["tau"].get<i64>();
    const auto method = method_from_string(j["method"].get<std::string>());
    if (!method) throw std::invalid_argument("unknown method");
    r.method = *method;
    r.witness = PointSet(r.dims, points_from_json(j["witness"]));
    if (static_cast<i64>(r.witness.size()) != r.value) {
        throw std::invalid_argument("witness size does not match tau");
    }
    if (r.value > tau_upper_bound(r.dims)) throw std::invalid_argument("tau exceeds 2 gcd(m,n)");
    if (!verify_no3(r.witness, budget)) throw std::invalid_argument("witness has three collinear points");
    return r;
}

class TauCache {
public:
    using WarningSink = std::function<void(const std::string&)>;

    /// Opens (without creating) the cache file and loads every valid record.
    explicit TauCache(std::filesystem::path path, WarningSink warn = default_sink())
        : path_(std::move(path)), warn_(std::move(warn)) {
        std::ifstream in(path_);
        if (!in) return;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                TauResult r = parse_cache_line(line);
                const auto key = canonical_key(r.dims);
                if (key != std::pair{r.dims.m, r.dims.n}) r = transposed(r);
                entries_.insert_or_assign(key, std::move(r));
            } catch (const std::exception& e) {
                warn_(path_.string() + ":" + std::to_string(lineno) + ": skipping cache record: " + e.what());
            }
        }
    }

    std::optional<TauResult> get(const TorusDims& dims) const {
        std::shared_lock lock(mutex_);
        const auto key = canonical_key(dims);
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        if (dims.m == key.first && dims.n == key.second) return it->second;
        return transposed(it->second);
    }

    /// Stores an exact result and appends it to the file.
    void put(const TauResult& r) {
        TauResult stored = r;
        const auto key = canonical_key(r.dims);
        if (key != std::pair{r.dims.m, r.dims.n}) stored = transposed(r);
        std::unique_lock lock(mutex_);
        if (entries_.count(key)) return;
        if (!path_.empty()) {
            if (path_.has_parent_path()) {
                std::error_code ec;
                std::filesystem::create_directories(path_.parent_path(), ec);
            }
            std::ofstream out(path_, std::ios::app);
            if (!out) {
                warn_("cannot write cache file " + path_.string());
            } else {
                out << cache_line(stored) << '\n';
            }
        }
        entries_.emplace(key, std::move(stored));
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

    const std::filesystem::path& path() const { return path_; }

    /// Every cached result on a torus whose dimensions divide those of `dims`.
    std::vector<TauResult> divisors_of(const TorusDims& dims) const {
        std::shared_lock lock(mutex_);
        std::vector<TauResult> out;
        for (const auto& [key, r] : entries_) {
            if (dims.m % key.first == 0 && dims.n % key.second == 0) out.push_back(r);
            if (key.first != key.second && dims.m % key.second == 0 && dims.n % key.first == 0) {
                out.push_back(transposed(r));
            }
        }
        return out;
    }

    static WarningSink default_sink() {
        return [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    }

private:
    static std::pair<i64, i64> canonical_key(const TorusDims& d) {
        return d.m <= d.n ? std::pair{d.m, d.n} : std::pair{d.n, d.m};
    }

    static TauResult transposed(const TauResult& r) {
        TauResult t = r;
        t.dims = r.dims.swapped();
        t.witness = r.witness.transposed();
        return t;
    }

    std::filesystem::path path_;
    WarningSink warn_;
    mutable std::shared_mutex mutex_;
    std::map<std::pair<i64, i64>, TauResult> entries_;
};

}  // namespace torusline
