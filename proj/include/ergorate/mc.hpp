#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergorate/models.hpp"
#include "ergorate/slowly_varying.hpp"
#include "ergorate/trajectory.hpp"
#include "ergorate/verdict.hpp"

namespace ergorate {

// lim E[S_n^2]/n = sum 2 c^2 (1 + lambda)/(1 - lambda); degenerate error when
// a retained mode has lambda = 1.
double sigma_sq_exact(const FourierDiagonalModel& model);
// sigma_eps^2 (sum a)^2 of the retained process.
double sigma_sq_exact(const LinearProcessSpec& spec);
// Stationary E[S_n^2]/n, closed form.
double variance_ratio_exact(const FourierDiagonalModel& model, long long n);

// Simulation entry point for the process sources that can be simulated.
// x0 applies to the rotation chain only.
TrajectoryBatch simulate_source(const ProcessSource& src, long long n, std::optional<double> x0, std::uint64_t seed,
                                long long reps, std::vector<long long> grid = {}, int threads = 1);

struct CltResult {
    std::string start;
    long long n = 0;
    long long reps = 0;
    double ksDistance = 0.0;
    double ksCritical5 = 0.0;  // 1.36 / sqrt(reps)
    double ksTolerance = 0.05;
    double sigmaHatSq = 0.0;
    double sigmaHatSqSe = 0.0;
    double sigmaRefSq = 0.0;
    bool degenerate = false;
    bool ksPass = false;
    bool variancePass = false;
    bool pass() const { return ksPass && variancePass; }
    nlohmann::json to_json() const;
};

// KS distance of S_n/sqrt(n) (last grid point) from N(0, sigmaRefSq) plus the
// variance check |sigmaHat^2 - sigmaRef^2| <= 3 SE. With sigmaRefSq = 0 the
// test instead requires the 95% quantile of |S_n|/sqrt(n) to be below
// ksTolerance.
CltResult clt_from_batch(const TrajectoryBatch& batch, double sigmaRefSq, double ksTolerance = 0.05,
                         const std::string& startLabel = "");

CltResult quenched_clt_test(const FourierDiagonalModel& model, std::optional<double> x0, long long n, long long reps,
                            std::uint64_t seed, int threads = 1, double ksTolerance = 0.05);

struct LilResult {
    long long N = 0;
    long long n0 = 1000;
    std::vector<std::uint64_t> seeds;
    std::vector<double> perSeed;
    double median = 0.0;
    double sigma = 0.0;
    double bandLo = 0.7;
    double bandHi = 1.2;
    bool degenerate = false;
    bool inBand = false;
    std::vector<std::string> warnings;
    nlohmann::json to_json() const;
};

// Per seed, the running max over n in [n0, N] of |S_n| / sqrt(2 n log log n).
LilResult lil_diagnostic(const ProcessSource& src, long long N, const std::vector<std::uint64_t>& seeds,
                         int threads = 1, long long n0 = 1000);

enum class NormalizerKind { sqrtNbStar, sqrtN, sqrtNLogLogN, sqrtNLog2LogLog };

struct Normalizer {
    NormalizerKind kind = NormalizerKind::sqrtN;
    SlowlyVaryingSpec spec;  // sqrtNbStar
    double beta = 1.0;       // sqrtNLog2LogLog
    double operator()(double n) const;
    std::string name() const;
    // "sqrtN", "sqrtNLogLogN", "sqrtNbStar:<b spec>", "sqrtNLog2LogLog:<beta>".
    static Normalizer parse(const std::string& text);
};

struct RateCheckResult {
    Normalizer normalizer;
    std::vector<long long> grid;
    long long reps = 0;
    std::vector<double> curves;  // reps x grid, |S_n| / normalizer(n)
    std::vector<double> mean;
    std::vector<double> q05;
    std::vector<double> q95;
    long long fitFrom = 0;
    double trendSlope = 0.0;
    bool slow = false;
    bool exploratory = false;
    Verdict hypothesis = Verdict::inconclusive;
    // Share of trajectories whose max over the top decade is below the max
    // over the decade before it.
    double envelopeShrinkShare = 0.0;
    nlohmann::json to_json() const;
    void write_csv(const std::string& path) const;
};

RateCheckResult rate_check(const TrajectoryBatch& batch, const Normalizer& norm, Verdict hypothesis,
                           long long fitFrom = 0);

struct SeriesSqrtResult {
    std::vector<long long> grid;
    long long reps = 0;
    std::vector<double> partial;   // reps x grid, sum_{k<=n} X_k / sqrt(k)
    std::vector<double> blockTail;  // reps x blocks, max_{n in block j} |T_n - T_{2^j - 1}|
    std::vector<double> meanBlockTail;
    double tailSlope = 0.0;  // log-log slope of meanBlockTail against 2^j over the top blocks
    bool tailsShrink = false;
    Verdict hypothesis = Verdict::inconclusive;
    nlohmann::json to_json() const;
};

SeriesSqrtResult series_sqrt_check(const ProcessSource& src, long long N, long long reps, std::uint64_t seed,
                                   Verdict hypothesis = Verdict::inconclusive, int threads = 1);

}  // namespace ergorate
