#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ergorate {

// Partial sums S_n of reps independent trajectories, stored on an ascending
// grid of n values. aux holds a second per-(rep, n) channel: innovation
// partial sums for linear processes, signed step counts for the rotation chain.
struct TrajectoryBatch {
    std::string source;
    nlohmann::json params;
    std::uint64_t seed = 0;
    long long n = 0;
    long long reps = 0;
    std::vector<long long> grid;
    std::vector<double> S;
    std::vector<double> aux;
    std::vector<double> start;

    double s(long long rep, std::size_t gi) const { return S[static_cast<std::size_t>(rep) * grid.size() + gi]; }
    double a(long long rep, std::size_t gi) const { return aux[static_cast<std::size_t>(rep) * grid.size() + gi]; }
    std::size_t grid_index(long long n) const;

    // CSV columns rep,n,S_n,aux.
    void write_csv(const std::string& path) const;
};

// 1, 2, 4, ..., up to n, with n appended when not a power of two.
std::vector<long long> dyadic_grid(long long n);
// Parses "a..b" (dyadic between a and b), "a,b,c" or a single value.
std::vector<long long> parse_grid(const std::string& text);

}  // namespace ergorate
