#pragma once

// Plain point files: one point per line as two decimal integers separated by
// whitespace. Blank lines and lines starting with '#' are ignored.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "torusline/torus.hpp"

namespace torusline {

class point_file_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<Point> read_points(std::istream& in, const std::string& name = "<input>") {
    std::vector<Point> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        long long x = 0, y = 0;
        std::string rest;
        if (!(ss >> x >> y) || (ss >> rest)) {
            throw point_file_error(name + ":" + std::to_string(lineno) + ": expected two integers, got '" +
                                   line + "'");
        }
        pts.push_back({x, y});
    }
    return pts;
}

inline std::vector<Point> read_point_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw point_file_error("cannot read point file " + path.string());
    return read_points(in, path.string());
}

inline void write_points(std::ostream& out, const PointSet& s, const std::string& comment = {}) {
    if (!comment.empty()) out << "# " << comment << '\n';
    out << "# torus " << s.dims().m << ' ' << s.dims().n << '\n';
    for (const auto& p : s.members()) out << p.x << ' ' << p.y << '\n';
}

}  // namespace torusline
