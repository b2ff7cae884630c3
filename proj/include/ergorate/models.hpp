#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ergorate/spectral.hpp"
#include "ergorate/trajectory.hpp"

namespace ergorate {

// ---------------------------------------------------------------- linear ---

enum class CoeffRule { lacunary94, geometric, userTable };

struct Lag {
    long long lag = 0;
    double a = 0.0;
};

// X_t = sum_i a_i eps_{t-i}. lags holds the retained nonzero coefficients in
// increasing lag order; tailL2/tailL1 are the exact omitted sums of a_i^2 and
// |a_i| beyond truncationM.
struct LinearProcessSpec {
    CoeffRule rule = CoeffRule::userTable;
    double rho = 0.0;
    int kMax = 0;
    std::vector<double> table;
    double innovationStd = 1.0;
    long long truncationM = 0;
    std::vector<Lag> lags;
    double tailL2 = 0.0;
    double tailL1 = 0.0;

    double coeff_sum() const;  // sum of retained a_i
    double sq_sum() const;     // sum of retained a_i^2

    // "lacunary:kmax=10", "geometric:rho=0.5", "table:1,-1", "iid";
    // optional ",sigma=...".
    static LinearProcessSpec parse(const std::string& text);
    std::string to_string() const;
    nlohmann::json to_json() const;
};

LinearProcessSpec build_lacunary(int kMax, double sigma = 1.0);
LinearProcessSpec build_geometric(double rho, double sigma = 1.0);
LinearProcessSpec build_table(std::vector<double> a, double sigma = 1.0);

// sum_{i>=m} |a_i| and sum_{i>=m} a_i^2 of the full (untruncated) process.
double abs_sum_from(const LinearProcessSpec& spec, long long m);
double sq_sum_from(const LinearProcessSpec& spec, long long m);

struct Certified {
    double value = 0.0;
    double error = 0.0;  // |true - value| <= error
};

// ||E[S_n | F_0]||^2 = sigma^2 sum_{j>=0} (a_{j+1} + ... + a_{j+n})^2.
Certified cond_sn_norm_linear(const LinearProcessSpec& spec, long long n);
// Same sum over the retained coefficients only.
double cond_sn_norm_retained(const LinearProcessSpec& spec, long long n);
// E[S_n^2] of the retained process.
double sum_variance_retained(const LinearProcessSpec& spec, long long n);
// E[R_n^2] for the Wu remainder R_n = S_n - (sum a) sum_{k<=n} eps_k of the
// retained process.
double wu_remainder_variance(const LinearProcessSpec& spec, long long n);
// Cov(X_0, X_h) of the retained process.
double autocovariance_retained(const LinearProcessSpec& spec, long long h);

// Theta_m = sigma sum_{i>=m} |a_i| (full process).
double theta_linear(const LinearProcessSpec& spec, long long m);
double theta_linear_retained(const LinearProcessSpec& spec, long long m);

// Streaming generator of X_1, X_2, ... for one rep.
class LinearPath {
public:
    LinearPath(const LinearProcessSpec& spec, std::uint64_t seed, long long rep);
    // Returns X_t; innovation() is eps_t of the same step.
    double next();
    double innovation() const { return last_eps_; }

private:
    const LinearProcessSpec* spec_;
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_;
    std::vector<double> ring_;
    std::size_t head_ = 0;
    double last_eps_ = 0.0;
};

TrajectoryBatch simulate_linear(const LinearProcessSpec& spec, long long n, std::uint64_t seed, long long reps,
                                std::vector<long long> grid = {}, int threads = 1);

// -------------------------------------------------------------- rotation ---

enum class CoefficientConvention {
    // c = (l!)^{-3/2} (log l!)^{-2}
    literal,
    // c = l^{-3/2} (log l)^{-2}, the size used by the level-indexed estimates
    level
};

const char* to_string(CoefficientConvention c);

// One character pair +-m of f(x) = sum 2 c_m cos(2 pi m x). Continuum modes are
// quadrature nodes standing for a range of levels; they carry weight != 1 and
// cannot be simulated.
struct Mode {
    double level = 0.0;
    double frequency = 0.0;  // l!, exact for l <= 18
    double coeff = 0.0;
    double lambda = 0.0;
    double oneMinusLambda = 0.0;
    double logLambda = 0.0;  // log|lambda|, from log1p(-(1 - lambda)) when lambda > 0
    double phaseStep = 0.0;  // phase of R_alpha on this character, in turns (2 r_l)
    double weight = 1.0;
    bool simulable = true;
};

struct FourierDiagonalModel {
    std::vector<Mode> modes;
    double alphaTurns = 0.0;
    CoefficientConvention convention = CoefficientConvention::literal;
    int lMax = 0;
    int explicitLevels = 0;
    bool continuum = false;

    bool simulable() const;
    nlohmann::json to_json() const;
    // "rotation:lmax=8", optional ",coeffs=level".
    static FourierDiagonalModel parse(const std::string& text);
};

// r_l = sum_{j>=1} prod_{i=1}^j 1/(x+i), evaluated at real x >= 1.
double factorial_remainder(double x);

double rotation_coefficient(double level, CoefficientConvention conv);

FourierDiagonalModel build_rotation_chain(int lMax, CoefficientConvention conv = CoefficientConvention::literal);

// Spectrum-only model: explicit levels 3..lExplicit plus, if continuum, the
// levels beyond integrated by Gauss-Legendre panels in ln(level) up to
// ln(level) = ln(lExplicit) + span.
FourierDiagonalModel build_rotation_spectrum(int lExplicit, CoefficientConvention conv, bool continuum,
                                             double span = 130.0);

// Model with explicit (coeff, lambda) pairs and no rotation structure.
FourierDiagonalModel make_diagonal_model(const std::vector<std::pair<double, double>>& coeffLambda);

// Spectral measure of f: atoms at lambda with weight 2 c^2.
AtomicSpectralMeasure chain_measure(const FourierDiagonalModel& model);

struct PowerNorms {
    double pnSq = 0.0;  // ||P^n f||^2
    double unSq = 0.0;  // ||sum_{k<=n} P^k f||^2
};
PowerNorms p_power_norms(const FourierDiagonalModel& model, double n);

// ||P^{k-1} f||^2 - ||P^k f||^2.
double p_power_decrement(const FourierDiagonalModel& model, double k);

// Signed step count random walk for one rep; f(W_k) by exact phase arithmetic.
class RotationPath {
public:
    RotationPath(const FourierDiagonalModel& model, std::optional<double> x0, std::uint64_t seed, long long rep);
    // Advances one step and returns f(W_k).
    double next();
    // Advances one step and returns the new signed step count.
    long long advance();
    double value_at(long long steps) const;
    // Sum over modes of weight_m * cos(phase at `steps`).
    double combination(long long steps, const std::vector<double>& weights) const;
    // cos(2 pi phase_m) for every mode at `steps`.
    void mode_cosines(long long steps, std::vector<double>& out) const;
    long long steps() const { return steps_; }
    double start() const { return x0_; }

private:
    std::vector<double> amp_;
    std::vector<double> phase0_;
    std::vector<double> step_;
    std::mt19937_64 eng_;
    std::uint64_t bits_ = 0;
    int bits_left_ = 0;
    long long steps_ = 0;
    double x0_ = 0.0;

    double phase(std::size_t m, long long steps) const;
};

TrajectoryBatch simulate_rotation(const FourierDiagonalModel& model, long long n, std::optional<double> x0,
                                  std::uint64_t seed, long long reps, std::vector<long long> grid = {},
                                  int threads = 1);

// ------------------------------------------------------------ rho-mixing ---

enum class RhoKind { zero, one, logDecay };

// rho(n) = 1/((log n)^a (log log n)^tau), clamped to [0, 1].
struct RhoMixingSpec {
    RhoKind kind = RhoKind::logDecay;
    double a = 2.0;
    double tau = 1.0;
    double constantC = 1.0;

    double rho(double n) const;
    static RhoMixingSpec parse(const std::string& text);
};

struct RhoBound {
    double bound = 0.0;
    double normalized = 0.0;
};

// C sum_{j=0}^{r} 2^{j/2} rho(2^j) with r + 1 = ceil(log2 n), and
// bound * (log n)^2 (log log n)^tau / sqrt(n).
RhoBound rho_dyadic_bound(const RhoMixingSpec& spec, long long n);

using ProcessSource = std::variant<LinearProcessSpec, FourierDiagonalModel, RhoMixingSpec>;

}  // namespace ergorate
