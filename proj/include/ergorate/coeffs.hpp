#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ergorate/slowly_varying.hpp"

namespace ergorate {

enum class SeqKind { gamma, alpha, delta, zygmundBeta };

// Finite prefix values[0..N] of a coefficient sequence.
//
// tailBound depends on the kind:
//   gamma   upper bound on the omitted mass sum_{n>N} gamma_n (plus the
//           certified error of the normalizer),
//   alpha   bound on |alpha_n| for n > N (renewal probabilities, <= 1),
//   delta   |sum_{n>N} delta_n| = |prefix sum| since the full series is 0,
//   zygmund bound on a_n for n > N (the sequence decreases).
struct CoefficientSeq {
    SeqKind kind = SeqKind::gamma;
    std::vector<double> values;
    std::vector<double> prefixSums;
    double tailBound = 0.0;
    std::optional<SlowlyVaryingSpec> spec;
    double beta = 0.0;
    // gamma only: the normalizer c, its certified absolute error and the
    // explicit-summation cutoff actually used.
    double normalizer = 0.0;
    double normalizerError = 0.0;
    long long cutoff = 0;

    long long size() const { return static_cast<long long>(values.size()) - 1; }
};

// Constructing the tail bracket starts at this cutoff and grows by 4x up to
// the ceiling before giving up.
struct GammaOptions {
    long long minCutoff = 1000000;
    long long cutoffCeiling = 100000000;
};

CoefficientSeq gamma_seq(const SlowlyVaryingSpec& spec, long long N, double tol,
                         const GammaOptions& opts = {});
CoefficientSeq alpha_seq(const CoefficientSeq& gamma, long long N);
CoefficientSeq delta_seq(long long N);
CoefficientSeq zygmund_seq(double beta, long long N);

// Certified bracket for sum_{k>=from} f(k), f convex and decreasing on
// [from - 1/2, inf): lower = int_from^inf f + f(from)/2, upper = int_{from-1/2}^inf f.
struct TailBracket {
    double lower = 0.0;
    double upper = 0.0;
    double mid() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

enum class PathKind { radial, circular, diagonal };

struct BoundaryPath {
    PathKind kind = PathKind::radial;
    std::vector<double> epsilons;

    // "radial:1e-2..1e-6" gives one point per decade; an optional trailing
    // ":k" gives k points per decade. A single value "radial:1e-3" is allowed.
    static BoundaryPath parse(const std::string& text);

    std::complex<double> point(std::size_t i) const;
    // 1 - z computed without cancellation.
    std::complex<double> one_minus_point(std::size_t i) const;
};

// A(z) = 1/(1 - B(z)) with B(z) = sum gamma_n z^n.
std::complex<double> eval_a(const CoefficientSeq& gamma, std::complex<double> z, double tolB = 1e-12);
// Same, with 1 - z supplied to avoid cancellation near z = 1.
std::complex<double> eval_a(const CoefficientSeq& gamma, std::complex<double> z,
                            std::complex<double> oneMinusZ, double tolB = 1e-12);
// Bound on the omitted part of B(z) for a given prefix.
double eval_a_tail_bound(const CoefficientSeq& gamma, std::complex<double> z, std::complex<double> oneMinusZ);

// gamma length needed so that evalA at every path point meets tolB.
long long gamma_length_for(const BoundaryPath& path, double tolB = 1e-12);

struct PropA1Row {
    double epsilon = 0.0;
    std::complex<double> z;
    double ratioI = 0.0;
    // The same ratio with 2c in place of 4c; kept as a diagnostic.
    double ratioIHalfConstant = 0.0;
    double ratioII = 0.0;
    long long alphaTerms = 0;
};

// ratio_i = |A(z)| 4c sqrt(pi) sqrt|1-z| / sqrt(b(1/|1-z|)).
// ratio_ii = max_{m <= len(alpha)} |sum_{k<=m} alpha_k z^k| sqrt(|1-z| / b(1/|1-z|)).
// b is clamped below x0. alpha may be empty, in which case ratio_ii is NaN.
std::vector<PropA1Row> check_prop_a1(const CoefficientSeq& gamma, const CoefficientSeq& alpha,
                                     const SlowlyVaryingSpec& spec, const BoundaryPath& path);

struct SeriesAsymptoticRow {
    double epsilon = 0.0;
    std::complex<double> z;
    double ratio = 0.0;
    double tailBound = 0.0;
    long long terms = 0;
};

// ratio = |sum_{n<=N} b(n) z^n n^-beta| / |Gamma(1-beta) (1-z)^(beta-1) b(1/|1-z|)|.
// N = 0 picks the smallest power of two meeting tailTol at every point.
std::vector<SeriesAsymptoticRow> check_series_asymptotic(double beta, const SlowlyVaryingSpec& spec,
                                                         const BoundaryPath& path, long long N,
                                                         double tailTol = 1e-9);

void write_coeff_csv(const CoefficientSeq& seq, const std::string& path);
void write_prop_a1_csv(const std::vector<PropA1Row>& rows, const std::string& path);
void write_series_csv(const std::vector<SeriesAsymptoticRow>& rows, const std::string& path);

const char* to_string(SeqKind k);
const char* to_string(PathKind k);

}  // namespace ergorate
