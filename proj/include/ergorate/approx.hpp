#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ergorate/models.hpp"
#include "ergorate/spectral.hpp"
#include "ergorate/trajectory.hpp"
#include "ergorate/verdict.hpp"

namespace ergorate {

enum class DecompMethod { wuLinear, resolventKV, normalChain };
const char* to_string(DecompMethod m);

// S_n = M_n + R_n per trajectory on the batch grid.
struct MartingaleDecomposition {
    DecompMethod method = DecompMethod::wuLinear;
    double t = 0.0;
    long long reps = 0;
    std::vector<long long> grid;
    std::vector<double> M;  // reps x grid
    std::vector<double> R;
    // Largest |S_replayed - S_batch| when the paths are regenerated.
    double replayError = 0.0;
    // Pooled correlation of martingale increments at lags 1..8, with the
    // standard error of each estimate; filled when diagnostics are requested.
    std::vector<double> lagCorr;
    std::vector<double> lagCorrSe;
    double incrementVar = 0.0;

    double m(long long rep, std::size_t gi) const { return M[static_cast<std::size_t>(rep) * grid.size() + gi]; }
    double r(long long rep, std::size_t gi) const { return R[static_cast<std::size_t>(rep) * grid.size() + gi]; }
    nlohmann::json summary() const;
};

// M_n = (sum a) sum_{k<=n} eps_k from the batch's innovation channel.
MartingaleDecomposition wu_decompose_linear(const LinearProcessSpec& spec, const TrajectoryBatch& batch,
                                            bool lagDiagnostics = false, int threads = 1);

// M_n(t) = sum_{k<=n} G_t f(W_k) - P G_t f(W_{k-1}), replaying each path from
// the batch seed. t < 0 selects t = 1 - 1/n.
MartingaleDecomposition normal_chain_martingale(const FourierDiagonalModel& model, const TrajectoryBatch& batch,
                                                double t = -1.0, bool lagDiagnostics = false, int threads = 1);

// Stationary E[R_n(t)^2] for the normal-chain decomposition, exact.
double normal_chain_remainder_exact(const FourierDiagonalModel& model, double t, long long n);

struct ResolventResult {
    double t = 0.0;
    double exact = 0.0;     // ||E[Gamma_t | F_0]||_2
    double majorant = 0.0;  // (1-t) sum t^n ||E[S_n | F_0]||_2 with S_n = X_0 + ... + X_n
    double majorantTail = 0.0;
    long long terms = 0;
};
// Retained coefficients only.
ResolventResult resolvent_gamma(const LinearProcessSpec& spec, double t);

struct RemainderRow {
    long long n = 0;
    double empiricalRn2 = std::nan("");
    double se = std::nan("");
    double exactRn2 = std::nan("");
    double boundA = std::nan("");
    double boundAErr = 0.0;
    double boundB = std::nan("");
    double wuBound = std::nan("");
};

struct RemainderBoundReport {
    std::string method;
    std::vector<RemainderRow> rows;
    // Sum ||U_n||^2 / n^2 < inf; false with an atom at z = 1.
    bool preconditionHolds = true;
    bool flagged = false;
    std::string note;
    // max over rows of empirical / bound for the bound this report compares to.
    double empiricalK = std::nan("");
    nlohmann::json to_json() const;
    void write_csv(const std::string& path) const;
};

// boundA and boundB of the normal-chain estimate at each n.
RemainderBoundReport remainder_bounds(const AtomicSpectralMeasure& m, const std::vector<long long>& nList);

// wuBound = sum_{j<=n} Theta_j^2 of the retained process plus the exact E[R_n^2].
RemainderBoundReport wu_bounds(const LinearProcessSpec& spec, const std::vector<long long>& nList);

// Fills empiricalRn2/se from a decomposition (rows matched by n) and sets
// empiricalK against the wu bound (wuLinear) or boundB (normal chain).
void attach_empirical(RemainderBoundReport& report, const MartingaleDecomposition& d);

// --------------------------------------------------- martingale conditions

enum class MwForm { ZWC, WC, propC, quenchedWu, quenchedMW, normalChain };
const char* to_string(MwForm f);
MwForm parse_mw_form(const std::string& s);

struct MwOptions {
    long long N = 0;  // 0: 2^20 for linear processes, 2^40 otherwise
    double tau = 1.0;
    double delta = 1.5;
    double margin = 0.15;
};

// Truncated series or running sup of the chosen condition with the dyadic
// verdict rule. Linear processes are evaluated without truncation (the
// coefficient rule defines the full process).
CriterionReport mw_condition_check(const ProcessSource& src, MwForm form, const MwOptions& opt = {});

// Theta~_n = sum_{k>=n} (||P^{k-1} f||^2 - ||P^k f||^2)^{1/2} for real n.
class DecrementTail {
public:
    explicit DecrementTail(const FourierDiagonalModel& model, double upper = 1e80);
    double operator()(double n) const;

private:
    const FourierDiagonalModel* model_;
    std::vector<double> exactSuffix_;  // index k < kExact
    std::vector<double> gridTail_;     // integral from grid point u_j to upper, plus tail
    double u0_ = 0.0;
    double h_ = 0.25;
    double tailConst_ = 0.0;
    double sqrt_decrement(double k) const;
};

}  // namespace ergorate
