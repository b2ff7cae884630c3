#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ergorate/slowly_varying.hpp"
#include "ergorate/verdict.hpp"

namespace ergorate {

// z = r e^{2 i pi theta}, theta in turns, normalized to [-1/2, 1/2).
struct Atom {
    double r = 0.0;
    double theta = 0.0;
    double weight = 0.0;

    std::complex<double> z() const;
    // 1 - z computed without cancellation.
    std::complex<double> one_minus() const;
    bool is_one() const { return r == 1.0 && theta == 0.0; }
};

class AtomicSpectralMeasure {
public:
    AtomicSpectralMeasure() = default;
    explicit AtomicSpectralMeasure(std::vector<Atom> atoms);

    // Atom at a complex point; theta is derived with atan2.
    static Atom atom_at(std::complex<double> z, double weight);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double total_mass() const;

    static AtomicSpectralMeasure read_csv(const std::string& path);
    void write_csv(const std::string& path) const;

private:
    std::vector<Atom> atoms_;
};

constexpr std::uint64_t kInfiniteIndex = std::numeric_limits<std::uint64_t>::max();
// Finite indices are capped here; larger values behave as "beyond any N".
constexpr std::uint64_t kIndexCap = 1ULL << 62;

// Largest n with z in D_n = {1 - 1/n <= r <= 1, |theta| <= 1/n}.
std::uint64_t dn_index(const Atom& a);
std::uint64_t dn_index(std::complex<double> z);

double mu_dn(const AtomicSpectralMeasure& m, long long n);

// |g_n(z)|^2 with g_n(z) = z (1 - z^n)/(1 - z), g_n(1) = n.
double gn_abs_sq(const Atom& a, long long n);
double un_norm_sq(const AtomicSpectralMeasure& m, long long n);

// sum_j w_j |sum_k a_k z_j^k|^2 by Horner evaluation.
double weighted_norm_sq(const AtomicSpectralMeasure& m, const std::vector<std::complex<double>>& a);

enum class KernelKind { invOneMinus, invOneMinusSq, logSq, bOverOneMinus, psiSq, resolventMixed, resolventSq };

struct Kernel {
    KernelKind kind = KernelKind::invOneMinus;
    SlowlyVaryingSpec spec;  // bOverOneMinus, psiSq
    double t = 0.0;          // resolvent kernels

    static Kernel inv_one_minus() { return {KernelKind::invOneMinus, {}, 0.0}; }
    static Kernel inv_one_minus_sq() { return {KernelKind::invOneMinusSq, {}, 0.0}; }
    static Kernel log_sq() { return {KernelKind::logSq, {}, 0.0}; }
    static Kernel b_over_one_minus(const SlowlyVaryingSpec& s) { return {KernelKind::bOverOneMinus, s, 0.0}; }
    static Kernel psi_sq(const SlowlyVaryingSpec& s) { return {KernelKind::psiSq, s, 0.0}; }
    static Kernel resolvent_mixed(double t) { return {KernelKind::resolventMixed, {}, t}; }
    static Kernel resolvent_sq(double t) { return {KernelKind::resolventSq, {}, t}; }
};

double kernel_value(const Kernel& k, const Atom& a);
double spectral_integral(const AtomicSpectralMeasure& m, const Kernel& k);

struct SnBoundRow {
    long long n = 0;
    double unNormSq = 0.0;
    double muDn = 0.0;
    double lhsRatio = 0.0;
    double ubSlack = 0.0;
};

// Rows for n = 2..nMax (the upper bound is an empty sum at n = 1).
std::vector<SnBoundRow> check_sn_bounds(const AtomicSpectralMeasure& m, long long nMax);

enum class ChiForm { identity, xLogPow, xTimesB, logSquared };

// chi(x) = x * L(max(x, floor)) with L the slowly varying factor, so chi is
// nondecreasing and defined from x = 1. logSquared is the separate pairing
// log^2 |1 - z| against log(n) ||U_n||^2 / n^3.
struct ChiSpec {
    ChiForm form = ChiForm::identity;
    double delta = 0.0;
    SlowlyVaryingSpec spec;
    double alphaWitness = 1.5;

    static ChiSpec identity() { return {ChiForm::identity, 0.0, {}, 1.5}; }
    static ChiSpec x_log_pow(double delta) { return {ChiForm::xLogPow, delta, {}, 1.5}; }
    static ChiSpec x_times_b(const SlowlyVaryingSpec& s) { return {ChiForm::xTimesB, 0.0, s, 1.5}; }
    static ChiSpec log_squared() { return {ChiForm::logSquared, 0.0, {}, 1.5}; }

    double operator()(double x) const;
    std::string name() const;
};

struct ChiValidation {
    bool nondecreasing = false;
    bool witnessHolds = false;
    double threshold = 0.0;
    double tau = 0.0;
};

// Samples the monotonicity, witness and doubling properties on [1, 2^40].
ChiValidation validate_chi(const ChiSpec& chi);

// Exact per-n quantities reused across criteria.
struct MeasureProfile {
    long long N = 0;
    std::vector<double> unSq;  // index n = 0..N
    std::vector<double> muDn;  // index n = 0..N
    const AtomicSpectralMeasure* measure = nullptr;
};

MeasureProfile make_profile(const AtomicSpectralMeasure& m, long long N);

CriterionReport criterion_lemma(const MeasureProfile& p, const ChiSpec& chi, double margin = 0.15);
CriterionReport criterion_sqrt(const MeasureProfile& p, double margin = 0.15);
CriterionReport criterion_log(const MeasureProfile& p, double margin = 0.15);
CriterionReport criterion_b(const MeasureProfile& p, const SlowlyVaryingSpec& spec, double margin = 0.15);

CriterionReport criterion_lemma(const AtomicSpectralMeasure& m, const ChiSpec& chi, long long N);
CriterionReport criterion_sqrt(const AtomicSpectralMeasure& m, long long N);
CriterionReport criterion_log(const AtomicSpectralMeasure& m, long long N);
CriterionReport criterion_b(const AtomicSpectralMeasure& m, const SlowlyVaryingSpec& spec, long long N);

// Test corpus: three measures convergent and three divergent by construction.
// expected maps criterion names ("lemma-x", "sqrt", "log", "b-log") to the
// constructed verdict.
struct CanonicalMeasure {
    std::string name;
    AtomicSpectralMeasure measure;
    std::map<std::string, Verdict> expected;
};

std::vector<CanonicalMeasure> canonical_corpus();
AtomicSpectralMeasure canonical_measure(const std::string& name);

// Seeded random measure with atoms kept at |1 - z| >= 1e-4.
AtomicSpectralMeasure random_measure(std::uint64_t seed, int atoms);

}  // namespace ergorate
