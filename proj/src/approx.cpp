#include "ergorate/approx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ergorate/errors.hpp"
#include "ergorate/io.hpp"
#include "ergorate/parallel.hpp"
#include "ergorate/quadrature.hpp"
#include "ergorate/summation.hpp"

namespace ergorate {

namespace {

constexpr int kMaxLag = 8;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Pooled lag products of one increment stream.
struct LagAccumulator {
    double ring[kMaxLag] = {};
    long long count = 0;
    CompensatedSum sq;
    CompensatedSum prod[kMaxLag];
    long long pairs[kMaxLag] = {};

    void add(double x) {
        for (int h = 1; h <= kMaxLag; ++h) {
            if (count >= h) {
                prod[h - 1].add(x * ring[(count - h) % kMaxLag]);
                ++pairs[h - 1];
            }
        }
        ring[count % kMaxLag] = x;
        sq.add(x * x);
        ++count;
    }
};

void finish_lags(MartingaleDecomposition& d, const std::vector<LagAccumulator>& acc) {
    CompensatedSum sq;
    long long count = 0;
    std::vector<CompensatedSum> prod(kMaxLag);
    std::vector<long long> pairs(kMaxLag, 0);
    for (const auto& a : acc) {
        sq.add(a.sq.value());
        count += a.count;
        for (int h = 0; h < kMaxLag; ++h) {
            prod[h].add(a.prod[h].value());
            pairs[h] += a.pairs[h];
        }
    }
    d.incrementVar = count > 0 ? sq.value() / static_cast<double>(count) : 0.0;
    d.lagCorr.assign(kMaxLag, 0.0);
    d.lagCorrSe.assign(kMaxLag, 0.0);
    for (int h = 0; h < kMaxLag; ++h) {
        if (pairs[h] == 0 || d.incrementVar == 0.0) continue;
        d.lagCorr[h] = prod[h].value() / static_cast<double>(pairs[h]) / d.incrementVar;
        d.lagCorrSe[h] = 1.0 / std::sqrt(static_cast<double>(pairs[h]));
    }
}

double loglog_clamped(double n) { return std::log(std::log(std::max(n, std::exp(std::exp(1.0))))); }

}  // namespace

const char* to_string(DecompMethod m) {
    switch (m) {
        case DecompMethod::wuLinear: return "wuLinear";
        case DecompMethod::resolventKV: return "resolventKV";
        case DecompMethod::normalChain: return "normalChain";
    }
    return "?";
}

nlohmann::json MartingaleDecomposition::summary() const {
    nlohmann::json j = {{"method", to_string(method)}, {"t", t},         {"reps", reps},
                        {"grid", grid},               {"replayError", replayError}};
    if (!lagCorr.empty()) {
        j["lagCorr"] = lagCorr;
        j["lagCorrSe"] = lagCorrSe;
        j["incrementVar"] = incrementVar;
    }
    std::vector<double> meanR2(grid.size(), 0.0);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        CompensatedSum s;
        for (long long r = 0; r < reps; ++r) s.add(this->r(r, gi) * this->r(r, gi));
        meanR2[gi] = s.value() / static_cast<double>(reps);
    }
    j["meanR2"] = meanR2;
    return j;
}

MartingaleDecomposition wu_decompose_linear(const LinearProcessSpec& spec, const TrajectoryBatch& batch,
                                            bool lagDiagnostics, int threads) {
    if (batch.source != "linear") throw DomainError("wu decomposition needs a linear-process batch");
    if (!std::isfinite(abs_sum_from(spec, 0))) throw DomainError("sum |a_i| is infinite; D_k is undefined");
    MartingaleDecomposition d;
    d.method = DecompMethod::wuLinear;
    d.reps = batch.reps;
    d.grid = batch.grid;
    const double A = spec.coeff_sum();
    d.M.resize(batch.S.size());
    d.R.resize(batch.S.size());
    for (std::size_t i = 0; i < batch.S.size(); ++i) {
        d.M[i] = A * batch.aux[i];
        d.R[i] = batch.S[i] - d.M[i];
    }
    if (lagDiagnostics) {
        std::vector<LagAccumulator> acc(static_cast<std::size_t>(batch.reps));
        std::vector<double> err(static_cast<std::size_t>(batch.reps), 0.0);
        parallel_for(batch.reps, threads, [&](long long r) {
            LinearPath path(spec, batch.seed, r);
            CompensatedSum s;
            std::size_t gi = 0;
            for (long long t = 1; t <= batch.grid.back(); ++t) {
                s.add(path.next());
                acc[static_cast<std::size_t>(r)].add(A * path.innovation());
                if (t == batch.grid[gi]) {
                    err[static_cast<std::size_t>(r)] =
                        std::max(err[static_cast<std::size_t>(r)], std::fabs(s.value() - batch.s(r, gi)));
                    ++gi;
                }
            }
        });
        finish_lags(d, acc);
        d.replayError = *std::max_element(err.begin(), err.end());
    }
    return d;
}

MartingaleDecomposition normal_chain_martingale(const FourierDiagonalModel& model, const TrajectoryBatch& batch,
                                                double t, bool lagDiagnostics, int threads) {
    if (batch.source != "rotation") throw DomainError("normal-chain decomposition needs a rotation-chain batch");
    if (t < 0.0) t = 1.0 - 1.0 / static_cast<double>(batch.n);
    if (!(t >= 0.0 && t < 1.0)) throw DomainError("t must lie in [0, 1)");
    std::optional<double> x0;
    if (batch.params.contains("start") && batch.params["start"].is_number()) x0 = batch.params["start"].get<double>();

    const std::size_t nm = model.modes.size();
    std::vector<double> fc(nm), gc(nm), pgc(nm);
    for (std::size_t m = 0; m < nm; ++m) {
        const Mode& md = model.modes[m];
        fc[m] = 2.0 * md.coeff;
        gc[m] = fc[m] / (1.0 - t * md.lambda);
        pgc[m] = md.lambda * gc[m];
    }

    MartingaleDecomposition d;
    d.method = DecompMethod::normalChain;
    d.t = t;
    d.reps = batch.reps;
    d.grid = batch.grid;
    d.M.assign(batch.S.size(), 0.0);
    d.R.assign(batch.S.size(), 0.0);
    std::vector<LagAccumulator> acc(lagDiagnostics ? static_cast<std::size_t>(batch.reps) : 0);
    std::vector<double> err(static_cast<std::size_t>(batch.reps), 0.0);
    auto dot = [nm](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t m = 0; m < nm; ++m) s += a[m] * b[m];
        return s;
    };
    parallel_for(batch.reps, threads, [&](long long r) {
        RotationPath path(model, x0, batch.seed, r);
        std::vector<double> cs;
        path.mode_cosines(0, cs);
        double prevPG = dot(pgc, cs);
        CompensatedSum s, mart;
        std::size_t gi = 0;
        const std::size_t base = static_cast<std::size_t>(r) * batch.grid.size();
        for (long long k = 1; k <= batch.grid.back(); ++k) {
            path.mode_cosines(path.advance(), cs);
            s.add(dot(fc, cs));
            double phi = dot(gc, cs) - prevPG;
            mart.add(phi);
            prevPG = dot(pgc, cs);
            if (lagDiagnostics) acc[static_cast<std::size_t>(r)].add(phi);
            if (k == batch.grid[gi]) {
                double sb = batch.S[base + gi];
                err[static_cast<std::size_t>(r)] =
                    std::max(err[static_cast<std::size_t>(r)], std::fabs(s.value() - sb));
                d.M[base + gi] = mart.value();
                d.R[base + gi] = sb - mart.value();
                ++gi;
            }
        }
    });
    d.replayError = *std::max_element(err.begin(), err.end());
    if (lagDiagnostics) finish_lags(d, acc);
    return d;
}

double normal_chain_remainder_exact(const FourierDiagonalModel& model, double t, long long n) {
    if (n < 1) throw DomainError("remainder needs n >= 1");
    if (!(t >= 0.0 && t < 1.0)) throw DomainError("t must lie in [0, 1)");
    // R_n = sum_k beta_k h(W_k), h = P G_t f, beta = (1, 1-t, ..., 1-t, -t).
    auto beta = [n, t](long long k) { return k == 0 ? 1.0 : (k == n ? -t : 1.0 - t); };
    CompensatedSum total;
    for (const auto& md : model.modes) {
        double d = md.lambda * md.coeff / (1.0 - t * md.lambda);
        double w = 2.0 * d * d * md.weight;
        if (w == 0.0) continue;
        CompensatedSum q;
        double u = 0.0;
        for (long long k = 0; k <= n; ++k) {
            double b = beta(k);
            if (k > 0) u = md.lambda * (u + beta(k - 1));
            q.add(b * b + 2.0 * b * u);
        }
        total.add(w * q.value());
    }
    return total.value();
}

ResolventResult resolvent_gamma(const LinearProcessSpec& spec, double t) {
    if (!(t >= 0.0 && t < 1.0)) throw DomainError("t must lie in [0, 1)");
    ResolventResult res;
    res.t = t;
    const double sig2 = spec.innovationStd * spec.innovationStd;
    const auto& L = spec.lags;
    // h_i = sum_{p >= i} a_p t^(L_p - L_i); lag j in (L_{i-1}, L_i] carries t^(L_i - j) h_i.
    std::vector<double> h(L.size(), 0.0);
    for (std::size_t i = L.size(); i-- > 0;) {
        h[i] = L[i].a;
        if (i + 1 < L.size()) h[i] += std::pow(t, static_cast<double>(L[i + 1].lag - L[i].lag)) * h[i + 1];
    }
    CompensatedSum ex;
    for (std::size_t i = 0; i < L.size(); ++i) {
        long long gap = L[i].lag - (i == 0 ? -1 : L[i - 1].lag);
        double geo = t == 0.0 ? 1.0 : -std::expm1(2.0 * static_cast<double>(gap) * std::log(t)) / (1.0 - t * t);
        ex.add(h[i] * h[i] * geo);
    }
    res.exact = std::sqrt(sig2 * ex.value());

    // Majorant with S_k = X_0 + ... + X_k: ||E[S_k | F_0]||^2 = sigma^2 C(k)^2 + condSn(k + 1).
    long long K = t == 0.0 ? 1 : static_cast<long long>(std::ceil(std::log(1e-17) / std::log(t)));
    if (K > 10000000) throw ToleranceError("t too close to 1 for the majorant sum");
    CompensatedSum maj;
    double c = 0.0;
    std::size_t next = 0;
    double tk = 1.0;
    for (long long k = 0; k < K; ++k) {
        while (next < L.size() && L[next].lag <= k) c += L[next++].a;
        double v = sig2 * c * c + cond_sn_norm_retained(spec, k + 1);
        maj.add(tk * std::sqrt(v));
        tk *= t;
    }
    const double sx = spec.innovationStd * abs_sum_from(spec, 0);
    double tK = t == 0.0 ? 0.0 : std::pow(t, static_cast<double>(K));
    res.majorantTail = sx * tK * (static_cast<double>(K + 1) + t / (1.0 - t));
    res.majorant = (1.0 - t) * maj.value();
    res.terms = K;
    return res;
}

nlohmann::json RemainderBoundReport::to_json() const {
    nlohmann::json rowsJ = nlohmann::json::array();
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(fmt(x)); };
    for (const auto& r : rows)
        rowsJ.push_back({{"n", r.n},
                         {"empiricalRn2", num(r.empiricalRn2)},
                         {"se", num(r.se)},
                         {"exactRn2", num(r.exactRn2)},
                         {"boundA", num(r.boundA)},
                         {"boundAErr", num(r.boundAErr)},
                         {"boundB", num(r.boundB)},
                         {"wuBound", num(r.wuBound)}});
    return {{"method", method},
            {"rows", rowsJ},
            {"preconditionHolds", preconditionHolds},
            {"flagged", flagged},
            {"note", note},
            {"empiricalK", num(empiricalK)}};
}

void RemainderBoundReport::write_csv(const std::string& path) const {
    CsvWriter w(path, {"n", "E_Rn2", "se", "exact_Rn2", "boundA", "boundB", "wuBound"});
    for (const auto& r : rows)
        w.row(std::vector<double>{static_cast<double>(r.n), r.empiricalRn2, r.se, r.exactRn2, r.boundA, r.boundB,
                                  r.wuBound});
    w.close();
}

RemainderBoundReport remainder_bounds(const AtomicSpectralMeasure& m, const std::vector<long long>& nList) {
    RemainderBoundReport rep;
    rep.method = "normalChain";
    for (const auto& a : m.atoms())
        if (a.is_one() && a.weight > 0.0) rep.preconditionHolds = false;
    long long maxN = 1;
    for (long long n : nList) {
        if (n < 1) throw DomainError("bounds need n >= 1");
        maxN = std::max(maxN, n);
    }
    if (!rep.preconditionHolds) {
        rep.flagged = true;
        rep.note = "atom at z = 1: sum ||U_n||^2/n^2 diverges; boundA and boundB are infinite";
        for (long long n : nList) {
            RemainderRow r;
            r.n = n;
            r.boundA = kInf;
            r.boundB = kInf;
            rep.rows.push_back(r);
        }
        return rep;
    }
    // ||U_k||^2 <= sum 4 w |z|^2 / |1 - z|^2 bounds the omitted tail.
    double cinf = 0.0;
    for (const auto& a : m.atoms()) cinf += 4.0 * a.weight * a.r * a.r / std::norm(a.one_minus());
    const long long K = std::max<long long>(1LL << 16, 16 * maxN);
    std::vector<double> headCum(static_cast<std::size_t>(K) + 1, 0.0);  // sum_{k<=n} U_k/k
    std::vector<double> tailCum(static_cast<std::size_t>(K) + 2, 0.0);  // sum_{k>=n} U_k/k^2, k <= K
    std::vector<double> u(static_cast<std::size_t>(K) + 1, 0.0);
    for (long long k = 1; k <= K; ++k) u[static_cast<std::size_t>(k)] = un_norm_sq(m, k);
    {
        CompensatedSum s;
        for (long long k = 1; k <= K; ++k) {
            s.add(u[static_cast<std::size_t>(k)] / static_cast<double>(k));
            headCum[static_cast<std::size_t>(k)] = s.value();
        }
        CompensatedSum r;
        for (long long k = K; k >= 1; --k) {
            double dk = static_cast<double>(k);
            r.add(u[static_cast<std::size_t>(k)] / (dk * dk));
            tailCum[static_cast<std::size_t>(k)] = r.value();
        }
    }
    const double tailHalf = 0.5 * cinf / static_cast<double>(K);
    for (long long n : nList) {
        RemainderRow r;
        r.n = n;
        double dn = static_cast<double>(n);
        r.boundA = headCum[static_cast<std::size_t>(n)] / dn + tailCum[static_cast<std::size_t>(n) + 1] + tailHalf;
        r.boundAErr = tailHalf;
        double un = 1.0 - 1.0 / dn;
        r.boundB = 8.0 * (spectral_integral(m, Kernel::resolvent_mixed(un)) / dn +
                          spectral_integral(m, Kernel::resolvent_sq(un)));
        rep.rows.push_back(r);
    }
    return rep;
}

RemainderBoundReport wu_bounds(const LinearProcessSpec& spec, const std::vector<long long>& nList) {
    RemainderBoundReport rep;
    rep.method = "wuLinear";
    long long maxN = 0;
    for (long long n : nList) {
        if (n < 1) throw DomainError("bounds need n >= 1");
        maxN = std::max(maxN, n);
    }
    std::vector<double> cum(static_cast<std::size_t>(maxN) + 1, 0.0);
    CompensatedSum s;
    for (long long j = 1; j <= maxN; ++j) {
        double th = theta_linear_retained(spec, j);
        s.add(th * th);
        cum[static_cast<std::size_t>(j)] = s.value();
    }
    for (long long n : nList) {
        RemainderRow r;
        r.n = n;
        r.wuBound = cum[static_cast<std::size_t>(n)];
        r.exactRn2 = wu_remainder_variance(spec, n);
        rep.rows.push_back(r);
    }
    return rep;
}

void attach_empirical(RemainderBoundReport& report, const MartingaleDecomposition& d) {
    double k = report.empiricalK;
    for (auto& row : report.rows) {
        auto it = std::find(d.grid.begin(), d.grid.end(), row.n);
        if (it == d.grid.end()) continue;
        if (d.method == DecompMethod::normalChain && d.t != 1.0 - 1.0 / static_cast<double>(row.n)) continue;
        std::size_t gi = static_cast<std::size_t>(it - d.grid.begin());
        CompensatedSum s, s2;
        for (long long r = 0; r < d.reps; ++r) {
            double x = d.r(r, gi) * d.r(r, gi);
            s.add(x);
            s2.add(x * x);
        }
        double n = static_cast<double>(d.reps);
        double mean = s.value() / n;
        double var = std::max(0.0, (s2.value() / n - mean * mean) * n / std::max(1.0, n - 1.0));
        row.empiricalRn2 = mean;
        row.se = std::sqrt(var / n);
        double bound = d.method == DecompMethod::wuLinear ? row.wuBound : row.boundB;
        if (bound > 0.0 && std::isfinite(bound)) {
            double ratio = mean / bound;
            k = std::isnan(k) ? ratio : std::max(k, ratio);
        }
    }
    report.empiricalK = k;
}

// ------------------------------------------------------------ conditions

const char* to_string(MwForm f) {
    switch (f) {
        case MwForm::ZWC: return "ZWC";
        case MwForm::WC: return "WC";
        case MwForm::propC: return "propC";
        case MwForm::quenchedWu: return "quenchedWu";
        case MwForm::quenchedMW: return "quenchedMW";
        case MwForm::normalChain: return "normalChain";
    }
    return "?";
}

MwForm parse_mw_form(const std::string& s) {
    for (MwForm f : {MwForm::ZWC, MwForm::WC, MwForm::propC, MwForm::quenchedWu, MwForm::quenchedMW,
                     MwForm::normalChain})
        if (s == to_string(f)) return f;
    throw DomainError("unknown condition '" + s + "' (expected ZWC, WC, propC, quenchedWu, quenchedMW, normalChain)");
}

DecrementTail::DecrementTail(const FourierDiagonalModel& model, double upper) : model_(&model) {
    constexpr long long kExact = 1024;
    u0_ = std::log(static_cast<double>(kExact) - 0.5);
    const double uTop = std::log(upper);
    const int panels = static_cast<int>(std::ceil((uTop - u0_) / h_));
    gridTail_.assign(static_cast<std::size_t>(panels) + 1, 0.0);
    const double top = std::exp(u0_ + panels * h_);
    tailConst_ = sqrt_decrement(top) * top * std::log(top);
    gridTail_[static_cast<std::size_t>(panels)] = tailConst_;
    auto f = [this](double u) {
        double x = std::exp(u);
        return sqrt_decrement(x) * x;
    };
    for (int p = panels - 1; p >= 0; --p)
        gridTail_[static_cast<std::size_t>(p)] =
            gridTail_[static_cast<std::size_t>(p) + 1] + gl8(f, u0_ + p * h_, u0_ + (p + 1) * h_);
    exactSuffix_.assign(kExact, 0.0);
    double acc = gridTail_[0];
    for (long long k = kExact - 1; k >= 1; --k) {
        acc += sqrt_decrement(static_cast<double>(k));
        exactSuffix_[static_cast<std::size_t>(k)] = acc;
    }
}

double DecrementTail::sqrt_decrement(double k) const {
    return std::sqrt(std::max(0.0, p_power_decrement(*model_, k)));
}

double DecrementTail::operator()(double n) const {
    if (n < 1.0) throw DomainError("decrement tail needs n >= 1");
    double c = std::ceil(n);
    if (c < static_cast<double>(exactSuffix_.size())) return exactSuffix_[static_cast<std::size_t>(c)];
    double u = std::log(n - 0.5);
    int j = static_cast<int>(std::floor((u - u0_) / h_));
    if (j >= static_cast<int>(gridTail_.size()) - 1) return gridTail_.back();
    auto f = [this](double v) {
        double x = std::exp(v);
        return sqrt_decrement(x) * x;
    };
    return gridTail_[static_cast<std::size_t>(j) + 1] + gl8(f, u, u0_ + (j + 1) * h_);
}

namespace {

struct Evaluated {
    std::vector<double> blocks;
    double value = 0.0;
};

int block_count(long long N) {
    int K = 0;
    while (K < 62 && (1LL << (K + 1)) - 1 <= N) ++K;
    return K;
}

// Exact integer evaluation for each n in [1, N].
template <class F>
Evaluated eval_integer(F&& term, long long N, bool sup) {
    Evaluated e;
    e.blocks.assign(static_cast<std::size_t>(block_count(N)), 0.0);
    CompensatedSum total;
    double best = 0.0;
    for (long long n = 1; n <= N; ++n) {
        int k = 63 - __builtin_clzll(static_cast<unsigned long long>(n));
        if (k >= static_cast<int>(e.blocks.size())) break;
        double v = term(static_cast<double>(n));
        if (sup) {
            e.blocks[static_cast<std::size_t>(k)] = std::max(e.blocks[static_cast<std::size_t>(k)], v);
            best = std::max(best, v);
        } else {
            e.blocks[static_cast<std::size_t>(k)] += v;
            total.add(v);
        }
    }
    e.value = sup ? best : total.value();
    return e;
}

// Smooth terms: exact sums for small blocks, midpoint-integral for large ones.
// integerSamples rounds the sampled points of large sup blocks to integers.
template <class F>
Evaluated eval_smooth(F&& term, long long N, bool sup, bool integerSamples = false) {
    constexpr int kExactBlocks = 10;
    Evaluated e;
    const int K = block_count(N);
    e.blocks.assign(static_cast<std::size_t>(K), 0.0);
    CompensatedSum total;
    double best = 0.0;
    for (int k = 0; k < K; ++k) {
        const double a = std::ldexp(1.0, k), b = std::ldexp(1.0, k + 1) - 1.0;
        double v = 0.0;
        if (k < kExactBlocks) {
            for (double n = a; n <= b; n += 1.0) {
                double x = term(n);
                v = sup ? std::max(v, x) : v + x;
            }
        } else if (sup) {
            constexpr int kSamples = 64;
            for (int i = 0; i <= kSamples; ++i) {
                double x = a * std::pow(b / a, i / double(kSamples));
                if (integerSamples) x = std::min(b, std::max(a, std::round(x)));
                v = std::max(v, term(x));
            }
        } else {
            v = integrate_log(term, a - 0.5, b + 0.5);
        }
        e.blocks[static_cast<std::size_t>(k)] = v;
        if (sup) best = std::max(best, v);
        else total.add(v);
    }
    e.value = sup ? best : total.value();
    return e;
}

}  // namespace

CriterionReport mw_condition_check(const ProcessSource& src, MwForm form, const MwOptions& opt) {
    const bool sup = form == MwForm::ZWC || form == MwForm::quenchedMW;
    const double expo = form == MwForm::ZWC ? opt.tau : opt.delta;
    auto L = [](double n) { return std::log(n); };
    auto LL = [](double n) { return loglog_clamped(n); };
    auto unsupported = [form](const char* what) {
        return UnsupportedCombination(std::string(to_string(form)) + " cannot be evaluated exactly for " + what);
    };

    CriterionReport rep;
    rep.criterion = to_string(form);
    rep.slopeMargin = opt.margin;
    Evaluated ev;
    long long N = opt.N;

    if (const auto* lin = std::get_if<LinearProcessSpec>(&src)) {
        if (form == MwForm::normalChain) throw unsupported("a linear process (no normal Markov operator)");
        LinearProcessSpec full = *lin;
        if (lin->rule == CoeffRule::lacunary94 && lin->kMax < 62) full = build_lacunary(62, lin->innovationStd);
        // Series forms are summed per n; sup forms only need samples, so they
        // reach far enough for the slowly growing lacunary sup to show.
        if (N == 0) N = sup ? (1LL << 60) : (1LL << 20);
        if (!sup && N > (1LL << 24)) throw RangeError("linear-process series are evaluated per n up to 2^24");
        if (N > (1LL << 61)) throw RangeError("linear-process conditions are evaluated up to n = 2^61");
        const double sig2 = full.innovationStd * full.innovationStd;
        auto term = [&](double n) -> double {
            long long ni = static_cast<long long>(n);
            switch (form) {
                case MwForm::WC: {
                    double th = theta_linear(full, ni);
                    return L(n) * th * th / n;
                }
                case MwForm::quenchedWu: {
                    double th = theta_linear(full, ni);
                    return L(n) * std::pow(LL(n), expo) * th * th / n;
                }
                case MwForm::propC: return std::pow(L(n), 3) * sig2 * sq_sum_from(full, ni);
                default: {
                    double c = cond_sn_norm_linear(full, ni).value;
                    return L(n) * L(n) * std::pow(LL(n), expo) / std::sqrt(n) * std::sqrt(c);
                }
            }
        };
        ev = sup ? eval_smooth(term, N, true, true) : eval_integer(term, N, false);
        rep.extra["source"] = full.to_json();
    } else if (const auto* model = std::get_if<FourierDiagonalModel>(&src)) {
        if (form == MwForm::WC) throw unsupported("a Markov chain model (Theta needs the innovation structure)");
        if (N == 0) N = 1LL << 40;
        std::optional<DecrementTail> tail;
        if (form == MwForm::quenchedWu) tail.emplace(*model);
        auto term = [&](double n) -> double {
            switch (form) {
                case MwForm::propC: return std::pow(L(n), 3) * p_power_norms(*model, n).pnSq;
                case MwForm::quenchedWu: {
                    double th = (*tail)(n);
                    return L(n) * std::pow(LL(n), expo) * th * th / n;
                }
                case MwForm::normalChain:
                    return L(n) * L(n) * std::pow(LL(n), expo) * p_power_norms(*model, n).unSq / (n * n);
                default:
                    return L(n) * L(n) * std::pow(LL(n), expo) / std::sqrt(n) *
                           std::sqrt(p_power_norms(*model, n).unSq);
            }
        };
        ev = eval_smooth(term, N, sup);
        rep.extra["source"] = model->to_json();
    } else {
        const auto& rho = std::get<RhoMixingSpec>(src);
        if (form != MwForm::ZWC) throw unsupported("a rho-mixing bound (only ZWC is implied)");
        if (N == 0) N = 1LL << 40;
        auto q = [&](long long n) {
            double b = rho_dyadic_bound(rho, n).bound;
            double x = static_cast<double>(n);
            return b * L(x) * L(x) * std::pow(LL(x), expo) / std::sqrt(x);
        };
        ev.blocks.assign(static_cast<std::size_t>(block_count(N)), 0.0);
        for (std::size_t k = 1; k < ev.blocks.size(); ++k) {
            long long a = 1LL << k;
            // The bound is constant on (2^k, 2^(k+1)] and the weight decreases there.
            ev.blocks[k] = std::max(q(a), q(a + 1));
            ev.value = std::max(ev.value, ev.blocks[k]);
        }
        rep.extra["source"] = {{"kind", "rho"}, {"a", rho.a}, {"tau", rho.tau}, {"C", rho.constantC}};
    }

    rep.truncationN = N;
    std::string name = to_string(form);
    FormResult fr = sup ? classify_sup(name, ev.blocks, N, opt.margin)
                        : classify_series(name, ev.blocks, N, opt.margin, ev.value);
    if (sup) fr.value = ev.value;
    rep.forms.push_back(fr);
    rep.extra["exponent"] = expo;
    if (sup) {
        auto w = fit_window(N);
        if (w.last >= w.first && ev.blocks[static_cast<std::size_t>(w.first)] > 0.0)
            rep.extra["windowGrowth"] =
                ev.blocks[static_cast<std::size_t>(w.last)] / ev.blocks[static_cast<std::size_t>(w.first)];
    }
    finalize_report(rep, name);
    return rep;
}

}  // namespace ergorate
