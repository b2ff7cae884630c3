#include "ergorate/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ergorate/errors.hpp"
#include "ergorate/io.hpp"
#include "ergorate/parallel.hpp"
#include "ergorate/summation.hpp"

namespace ergorate {

namespace {

double loglog_clamped(double n) { return std::log(std::log(std::max(n, std::exp(std::exp(1.0))))); }

double quantile(std::vector<double> v, double p) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    std::size_t i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= v.size()) return v.back();
    double f = pos - static_cast<double>(i);
    return v[i] * (1.0 - f) + v[i + 1] * f;
}

double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::numbers::sqrt2)); }

// One simulable path, advanced step by step.
class Stream {
public:
    Stream(const ProcessSource& src, std::optional<double> x0, std::uint64_t seed, long long rep) {
        if (const auto* lin = std::get_if<LinearProcessSpec>(&src)) {
            lin_.emplace(*lin, seed, rep);
        } else if (const auto* model = std::get_if<FourierDiagonalModel>(&src)) {
            rot_.emplace(*model, x0, seed, rep);
        } else {
            throw UnsupportedCombination("rho-mixing specs carry bounds only and cannot be simulated");
        }
    }
    double next() { return lin_ ? lin_->next() : rot_->next(); }

private:
    std::optional<LinearPath> lin_;
    std::optional<RotationPath> rot_;
};

double source_sigma(const ProcessSource& src) {
    if (const auto* lin = std::get_if<LinearProcessSpec>(&src)) return std::sqrt(sigma_sq_exact(*lin));
    if (const auto* model = std::get_if<FourierDiagonalModel>(&src)) return std::sqrt(sigma_sq_exact(*model));
    throw UnsupportedCombination("rho-mixing specs carry bounds only and cannot be simulated");
}

}  // namespace

double sigma_sq_exact(const FourierDiagonalModel& model) {
    CompensatedSum s;
    for (const auto& m : model.modes) {
        if (m.coeff == 0.0) continue;
        if (m.oneMinusLambda == 0.0) throw DegenerateError("eigenvalue 1 on a retained mode: variance is infinite");
        s.add(2.0 * m.coeff * m.coeff * m.weight * (1.0 + m.lambda) / m.oneMinusLambda);
    }
    return s.value();
}

double sigma_sq_exact(const LinearProcessSpec& spec) {
    double a = spec.coeff_sum();
    return spec.innovationStd * spec.innovationStd * a * a;
}

double variance_ratio_exact(const FourierDiagonalModel& model, long long n) {
    if (n < 1) throw DomainError("variance ratio needs n >= 1");
    const double dn = static_cast<double>(n);
    CompensatedSum s;
    for (const auto& m : model.modes) {
        if (m.coeff == 0.0) continue;
        double l = m.lambda, oml = m.oneMinusLambda;
        if (oml == 0.0) throw DegenerateError("eigenvalue 1 on a retained mode");
        // sum_{j,k<=n} lambda^|j-k| = n (1+l)/(1-l) - 2 l (1 - l^n)/(1-l)^2
        double ln = l == 0.0 ? 0.0 : std::pow(l, dn);
        double q = dn * (1.0 + l) / oml - 2.0 * l * (1.0 - ln) / (oml * oml);
        s.add(2.0 * m.coeff * m.coeff * m.weight * q / dn);
    }
    return s.value();
}

TrajectoryBatch simulate_source(const ProcessSource& src, long long n, std::optional<double> x0, std::uint64_t seed,
                                long long reps, std::vector<long long> grid, int threads) {
    if (const auto* lin = std::get_if<LinearProcessSpec>(&src))
        return simulate_linear(*lin, n, seed, reps, std::move(grid), threads);
    if (const auto* model = std::get_if<FourierDiagonalModel>(&src))
        return simulate_rotation(*model, n, x0, seed, reps, std::move(grid), threads);
    throw UnsupportedCombination("rho-mixing specs carry bounds only and cannot be simulated");
}

// ------------------------------------------------------------------- CLT

nlohmann::json CltResult::to_json() const {
    return {{"start", start},
            {"n", n},
            {"reps", reps},
            {"ksDistance", ksDistance},
            {"ksCritical5", ksCritical5},
            {"ksTolerance", ksTolerance},
            {"sigmaHatSq", sigmaHatSq},
            {"sigmaHatSqSe", sigmaHatSqSe},
            {"sigmaRefSq", sigmaRefSq},
            {"degenerate", degenerate},
            {"ksPass", ksPass},
            {"variancePass", variancePass}};
}

CltResult clt_from_batch(const TrajectoryBatch& batch, double sigmaRefSq, double ksTolerance,
                         const std::string& startLabel) {
    if (batch.reps < 100) throw DomainError("CLT test needs reps >= 100");
    CltResult res;
    res.start = startLabel;
    const std::size_t gi = batch.grid.size() - 1;
    res.n = batch.grid[gi];
    res.reps = batch.reps;
    res.sigmaRefSq = sigmaRefSq;
    res.ksTolerance = ksTolerance;
    const double m = static_cast<double>(batch.reps);
    res.ksCritical5 = 1.36 / std::sqrt(m);
    const double rootN = std::sqrt(static_cast<double>(res.n));
    std::vector<double> x(static_cast<std::size_t>(batch.reps));
    CompensatedSum s, s2;
    for (long long r = 0; r < batch.reps; ++r) {
        double v = batch.s(r, gi) / rootN;
        x[static_cast<std::size_t>(r)] = v;
        s.add(v * v);
        s2.add(v * v * v * v);
    }
    res.sigmaHatSq = s.value() / m;
    double varY = std::max(0.0, (s2.value() / m - res.sigmaHatSq * res.sigmaHatSq) * m / (m - 1.0));
    res.sigmaHatSqSe = std::sqrt(varY / m);
    if (sigmaRefSq == 0.0) {
        res.degenerate = true;
        std::vector<double> ax(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) ax[i] = std::fabs(x[i]);
        double q95 = quantile(ax, 0.95);
        res.ksDistance = q95;
        res.ksPass = q95 <= ksTolerance;
        res.variancePass = res.sigmaHatSq <= ksTolerance * ksTolerance;
        return res;
    }
    std::sort(x.begin(), x.end());
    const double sd = std::sqrt(sigmaRefSq);
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = normal_cdf(x[i], sd);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    res.ksDistance = d;
    res.ksPass = d <= ksTolerance;
    res.variancePass = std::fabs(res.sigmaHatSq - sigmaRefSq) <= 3.0 * res.sigmaHatSqSe;
    return res;
}

CltResult quenched_clt_test(const FourierDiagonalModel& model, std::optional<double> x0, long long n, long long reps,
                            std::uint64_t seed, int threads, double ksTolerance) {
    if (n < 1000) throw DomainError("quenched CLT test needs n >= 1000");
    auto batch = simulate_rotation(model, n, x0, seed, reps, {n}, threads);
    return clt_from_batch(batch, sigma_sq_exact(model), ksTolerance, x0 ? fmt(*x0) : "stationary");
}

// ------------------------------------------------------------------- LIL

nlohmann::json LilResult::to_json() const {
    return {{"N", N},         {"n0", n0},         {"seeds", seeds},   {"perSeed", perSeed},
            {"median", median}, {"sigma", sigma},  {"band", {bandLo * sigma, bandHi * sigma}},
            {"degenerate", degenerate}, {"inBand", inBand}, {"warnings", warnings}};
}

LilResult lil_diagnostic(const ProcessSource& src, long long N, const std::vector<std::uint64_t>& seeds, int threads,
                         long long n0) {
    if (n0 < 16) throw DomainError("LIL window must start at n >= 16");
    if (N <= n0) throw DomainError("LIL horizon must exceed the window start");
    LilResult res;
    res.N = N;
    res.n0 = n0;
    res.seeds = seeds;
    res.sigma = source_sigma(src);
    res.perSeed.assign(seeds.size(), 0.0);
    parallel_for(static_cast<long long>(seeds.size()), threads, [&](long long i) {
        Stream st(src, std::nullopt, seeds[static_cast<std::size_t>(i)], 0);
        CompensatedSum s;
        double best = 0.0;
        for (long long n = 1; n <= N; ++n) {
            s.add(st.next());
            if (n >= n0) {
                double dn = static_cast<double>(n);
                best = std::max(best, std::fabs(s.value()) / std::sqrt(2.0 * dn * std::log(std::log(dn))));
            }
        }
        res.perSeed[static_cast<std::size_t>(i)] = best;
    });
    res.median = quantile(res.perSeed, 0.5);
    if (res.sigma == 0.0) {
        res.degenerate = true;
        res.warnings.push_back("sigma = 0: degenerate, no band applies");
        return res;
    }
    const double lo = res.bandLo * res.sigma, hi = res.bandHi * res.sigma;
    res.inBand = res.median >= lo && res.median <= hi;
    for (std::size_t i = 0; i < seeds.size(); ++i)
        if (res.perSeed[i] < lo || res.perSeed[i] > hi)
            res.warnings.push_back("seed " + std::to_string(seeds[i]) + " outside band: " + fmt(res.perSeed[i]));
    return res;
}

// ------------------------------------------------------------------ rates

double Normalizer::operator()(double n) const {
    switch (kind) {
        case NormalizerKind::sqrtNbStar: return std::sqrt(n * b_star(spec, static_cast<long long>(n)));
        case NormalizerKind::sqrtN: return std::sqrt(n);
        case NormalizerKind::sqrtNLogLogN: return std::sqrt(n * loglog_clamped(n));
        case NormalizerKind::sqrtNLog2LogLog:
            return std::sqrt(n) * std::log(std::max(n, std::numbers::e)) * std::pow(loglog_clamped(n), beta / 2.0);
    }
    return 0.0;
}

std::string Normalizer::name() const {
    switch (kind) {
        case NormalizerKind::sqrtNbStar: return "sqrtNbStar:" + spec.to_string();
        case NormalizerKind::sqrtN: return "sqrtN";
        case NormalizerKind::sqrtNLogLogN: return "sqrtNLogLogN";
        case NormalizerKind::sqrtNLog2LogLog: return "sqrtNLog2LogLog:" + fmt(beta);
    }
    return "?";
}

Normalizer Normalizer::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string head = text.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    Normalizer n;
    if (head == "sqrtN") n.kind = NormalizerKind::sqrtN;
    else if (head == "sqrtNLogLogN") n.kind = NormalizerKind::sqrtNLogLogN;
    else if (head == "sqrtNbStar") {
        n.kind = NormalizerKind::sqrtNbStar;
        n.spec = SlowlyVaryingSpec::parse(rest.empty() ? "const" : rest);
    } else if (head == "sqrtNLog2LogLog") {
        n.kind = NormalizerKind::sqrtNLog2LogLog;
        if (!rest.empty()) {
            try {
                n.beta = std::stod(rest);
            } catch (const std::exception&) {
                throw DomainError("normalizer beta is not a number: '" + rest + "'");
            }
        }
    } else {
        throw DomainError("unknown normalizer '" + head + "' (expected sqrtN, sqrtNLogLogN, sqrtNbStar, sqrtNLog2LogLog)");
    }
    return n;
}

nlohmann::json RateCheckResult::to_json() const {
    return {{"normalizer", normalizer.name()},
            {"grid", grid},
            {"reps", reps},
            {"mean", mean},
            {"q05", q05},
            {"q95", q95},
            {"fitFrom", fitFrom},
            {"trendSlope", trendSlope},
            {"slow", slow},
            {"exploratory", exploratory},
            {"hypothesis", to_string(hypothesis)},
            {"envelopeShrinkShare", envelopeShrinkShare}};
}

void RateCheckResult::write_csv(const std::string& path) const {
    CsvWriter w(path, {"n", "mean", "q05", "q95"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        w.row(std::vector<double>{static_cast<double>(grid[i]), mean[i], q05[i], q95[i]});
    w.close();
}

RateCheckResult rate_check(const TrajectoryBatch& batch, const Normalizer& norm, Verdict hypothesis,
                           long long fitFrom) {
    RateCheckResult res;
    res.normalizer = norm;
    res.grid = batch.grid;
    res.reps = batch.reps;
    res.hypothesis = hypothesis;
    res.exploratory = hypothesis != Verdict::converges;
    const std::size_t G = batch.grid.size();
    std::vector<double> nv(G);
    for (std::size_t gi = 0; gi < G; ++gi) {
        nv[gi] = norm(static_cast<double>(batch.grid[gi]));
        if (!(nv[gi] > 0.0) || !std::isfinite(nv[gi])) throw DomainError("normalizer must be positive on the grid");
    }
    res.curves.resize(batch.S.size());
    for (long long r = 0; r < batch.reps; ++r)
        for (std::size_t gi = 0; gi < G; ++gi)
            res.curves[static_cast<std::size_t>(r) * G + gi] = std::fabs(batch.s(r, gi)) / nv[gi];
    res.mean.resize(G);
    res.q05.resize(G);
    res.q95.resize(G);
    for (std::size_t gi = 0; gi < G; ++gi) {
        std::vector<double> col(static_cast<std::size_t>(batch.reps));
        CompensatedSum s;
        for (long long r = 0; r < batch.reps; ++r) {
            col[static_cast<std::size_t>(r)] = res.curves[static_cast<std::size_t>(r) * G + gi];
            s.add(col[static_cast<std::size_t>(r)]);
        }
        res.mean[gi] = s.value() / static_cast<double>(batch.reps);
        res.q05[gi] = quantile(col, 0.05);
        res.q95[gi] = quantile(col, 0.95);
    }
    const long long N = batch.grid.back();
    res.fitFrom = fitFrom > 0 ? fitFrom : std::max<long long>(16, N / 1024);
    std::vector<double> x, y;
    for (std::size_t gi = 0; gi < G; ++gi)
        if (batch.grid[gi] >= res.fitFrom && res.mean[gi] > 0.0) {
            x.push_back(std::log(static_cast<double>(batch.grid[gi])));
            y.push_back(std::log(res.mean[gi]));
        }
    res.trendSlope = x.size() >= 2 ? least_squares_slope(x, y) : 0.0;
    res.slow = std::fabs(res.trendSlope) < 0.05;
    long long shrink = 0;
    for (long long r = 0; r < batch.reps; ++r) {
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t gi = 0; gi < G; ++gi) {
            long long n = batch.grid[gi];
            double v = res.curves[static_cast<std::size_t>(r) * G + gi];
            if (n >= N / 100 && n < N / 10) e1 = std::max(e1, v);
            if (n >= N / 10) e2 = std::max(e2, v);
        }
        if (e2 < e1) ++shrink;
    }
    res.envelopeShrinkShare = static_cast<double>(shrink) / static_cast<double>(batch.reps);
    return res;
}

nlohmann::json SeriesSqrtResult::to_json() const {
    return {{"grid", grid},
            {"reps", reps},
            {"meanBlockTail", meanBlockTail},
            {"tailSlope", tailSlope},
            {"tailsShrink", tailsShrink},
            {"hypothesis", to_string(hypothesis)}};
}

SeriesSqrtResult series_sqrt_check(const ProcessSource& src, long long N, long long reps, std::uint64_t seed,
                                   Verdict hypothesis, int threads) {
    if (N < 16) throw DomainError("series check needs N >= 16");
    if (reps < 1) throw DomainError("series check needs reps >= 1");
    SeriesSqrtResult res;
    res.grid = dyadic_grid(N);
    res.reps = reps;
    res.hypothesis = hypothesis;
    int blocks = 0;
    while ((1LL << (blocks + 1)) - 1 <= N) ++blocks;
    const std::size_t G = res.grid.size();
    res.partial.assign(static_cast<std::size_t>(reps) * G, 0.0);
    res.blockTail.assign(static_cast<std::size_t>(reps * blocks), 0.0);
    parallel_for(reps, threads, [&](long long r) {
        Stream st(src, std::nullopt, seed, r);
        CompensatedSum t;
        double blockStart = 0.0;
        std::size_t gi = 0;
        int j = 0;
        for (long long n = 1; n <= N; ++n) {
            if (j < blocks && n == (1LL << j)) blockStart = t.value();
            t.add(st.next() / std::sqrt(static_cast<double>(n)));
            int bj = 63 - __builtin_clzll(static_cast<unsigned long long>(n));
            if (bj < blocks) {
                double& slot = res.blockTail[static_cast<std::size_t>(r * blocks + bj)];
                slot = std::max(slot, std::fabs(t.value() - blockStart));
            }
            if (n + 1 == (1LL << (j + 1))) ++j;
            if (gi < G && n == res.grid[gi]) res.partial[static_cast<std::size_t>(r) * G + gi++] = t.value();
        }
    });
    res.meanBlockTail.assign(static_cast<std::size_t>(blocks), 0.0);
    for (int b = 0; b < blocks; ++b) {
        CompensatedSum s;
        for (long long r = 0; r < reps; ++r) s.add(res.blockTail[static_cast<std::size_t>(r * blocks + b)]);
        res.meanBlockTail[static_cast<std::size_t>(b)] = s.value() / static_cast<double>(reps);
    }
    std::vector<double> x, y;
    for (int b = std::max(0, blocks - 8); b < blocks; ++b)
        if (res.meanBlockTail[static_cast<std::size_t>(b)] > 0.0) {
            x.push_back(b * std::log(2.0));
            y.push_back(std::log(res.meanBlockTail[static_cast<std::size_t>(b)]));
        }
    res.tailSlope = x.size() >= 2 ? least_squares_slope(x, y) : 0.0;
    res.tailsShrink = res.tailSlope < -0.1;
    return res;
}

}  // namespace ergorate
