#include "ergorate/trajectory.hpp"

#include <algorithm>
#include <sstream>

#include "ergorate/errors.hpp"
#include "ergorate/io.hpp"

namespace ergorate {

std::size_t TrajectoryBatch::grid_index(long long v) const {
    auto it = std::lower_bound(grid.begin(), grid.end(), v);
    if (it == grid.end() || *it != v) throw DomainError("n = " + std::to_string(v) + " is not on the batch grid");
    return static_cast<std::size_t>(it - grid.begin());
}

void TrajectoryBatch::write_csv(const std::string& path) const {
    CsvWriter w(path, {"rep", "n", "S_n", "aux"});
    for (long long r = 0; r < reps; ++r)
        for (std::size_t g = 0; g < grid.size(); ++g)
            w.row({std::to_string(r), std::to_string(grid[g]), fmt(s(r, g)), fmt(a(r, g))});
    w.close();
}

std::vector<long long> dyadic_grid(long long n) {
    if (n < 1) throw DomainError("grid needs n >= 1");
    std::vector<long long> g;
    for (long long v = 1; v <= n; v *= 2) g.push_back(v);
    if (g.back() != n) g.push_back(n);
    return g;
}

std::vector<long long> parse_grid(const std::string& text) {
    std::vector<long long> g;
    try {
        auto dots = text.find("..");
        if (dots != std::string::npos) {
            long long a = std::stoll(text.substr(0, dots));
            long long b = std::stoll(text.substr(dots + 2));
            if (a < 1 || b < a) throw DomainError("grid range must satisfy 1 <= a <= b");
            for (long long v = a; v <= b; v *= 2) g.push_back(v);
            if (g.back() != b) g.push_back(b);
        } else {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) g.push_back(std::stoll(item));
        }
    } catch (const std::invalid_argument&) {
        throw DomainError("malformed grid '" + text + "'");
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    if (g.empty() || g.front() < 1) throw DomainError("grid values must be >= 1");
    return g;
}

}  // namespace ergorate
