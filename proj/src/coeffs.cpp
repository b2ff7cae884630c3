#include "ergorate/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "ergorate/errors.hpp"
#include "ergorate/io.hpp"
#include "ergorate/summation.hpp"

namespace ergorate {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

template <class F>
double tail_integral(F f, double from) {
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    double l1 = 0.0;
    double v = integrator.integrate(f, from, std::numeric_limits<double>::infinity(), 1e-13, &err, &l1);
    if (!(err <= 1e-10 * std::fabs(v) + 1e-300)) throw ToleranceError("tail quadrature did not converge");
    return v;
}

template <class F>
TailBracket convex_tail(F f, double from) {
    if (!(f(from) - 2.0 * f(from + 1.0) + f(from + 2.0) >= 0.0))
        throw ToleranceError("tail integrand not convex at the cutoff");
    TailBracket b;
    double lower_int = tail_integral(f, from);
    double upper_int = tail_integral(f, from - 0.5);
    // The two integrals differ only over [from - 1/2, from]; quadrature error
    // is far below the bracket width at the cutoffs used.
    b.lower = lower_int + 0.5 * f(from);
    b.upper = upper_int;
    if (b.upper < b.lower) std::swap(b.upper, b.lower);
    return b;
}

// Powers of a point z given accurately through log|z| and arg z.
struct PowerCtx {
    double logr;
    double arg;

    PowerCtx(cplx z, cplx omz) {
        double abs2m1 = -(2.0 * omz.real() - std::norm(omz));
        logr = (z == cplx(0.0, 0.0)) ? -std::numeric_limits<double>::infinity() : 0.5 * std::log1p(abs2m1);
        arg = std::atan2(z.imag(), z.real());
    }

    cplx pow(double n) const {
        if (std::isinf(logr)) return {0.0, 0.0};
        double a = n * logr;
        double b = n * arg;
        double ea = std::exp(a);
        return {ea * std::cos(b), ea * std::sin(b)};
    }

    // 1 - z^n without cancellation.
    cplx one_minus_pow(double n) const {
        if (std::isinf(logr)) return {1.0, 0.0};
        double a = n * logr;
        double b = n * arg;
        double ea = std::exp(a);
        double hs = std::sin(0.5 * b);
        return {-std::expm1(a) + ea * 2.0 * hs * hs, -ea * std::sin(b)};
    }

    double abs_pow(double n) const { return std::isinf(logr) ? 0.0 : std::exp(n * logr); }
};

void fill_prefix(CoefficientSeq& s) {
    s.prefixSums.resize(s.values.size());
    CompensatedSum acc;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        acc.add(s.values[i]);
        s.prefixSums[i] = acc.value();
    }
}

}  // namespace

const char* to_string(SeqKind k) {
    switch (k) {
        case SeqKind::gamma: return "gamma";
        case SeqKind::alpha: return "alpha";
        case SeqKind::delta: return "delta";
        case SeqKind::zygmundBeta: return "zygmund";
    }
    return "?";
}

const char* to_string(PathKind k) {
    switch (k) {
        case PathKind::radial: return "radial";
        case PathKind::circular: return "circular";
        case PathKind::diagonal: return "diagonal";
    }
    return "?";
}

CoefficientSeq gamma_seq(const SlowlyVaryingSpec& spec, long long N, double tol, const GammaOptions& opts) {
    if (N < 1) throw DomainError("gamma_seq needs N >= 1");
    if (!(tol > 0.0)) throw DomainError("gamma_seq needs tol > 0");

    auto t = [&](double x) { return 1.0 / (x * std::sqrt(x * eval_b_clamped(spec, x))); };
    auto h = [&](double x) {
        double harmonic = boost::math::digamma(x + 1.0) + std::numbers::egamma;
        return harmonic * t(x);
    };

    long long K = std::max(opts.minCutoff, N);
    TailBracket rt;
    TailBracket rh;
    for (;;) {
        double from = static_cast<double>(K + 1);
        rt = convex_tail(t, from);
        rh = convex_tail(h, from);
        if (rt.width() <= tol && rh.width() <= tol) break;
        if (K * 4 > opts.cutoffCeiling)
            throw ToleranceError("gamma tail bracket wider than tol at the cutoff ceiling");
        K *= 4;
    }

    std::vector<double> tail(static_cast<std::size_t>(N) + 1, 0.0);
    {
        CompensatedSum acc;
        for (long long k = K; k >= 1; --k) {
            acc.add(t(static_cast<double>(k)));
            if (k <= N) tail[static_cast<std::size_t>(k)] = acc.value() + rt.mid();
        }
    }

    // S = sum_k H_k t(k); D = sum_{k>N} (H_k - H_N) t(k) is the mass beyond N / c.
    CompensatedSum harmonic;
    CompensatedSum s_acc;
    CompensatedSum d_acc;
    double h_n = 0.0;
    for (long long k = 1; k <= K; ++k) {
        double x = static_cast<double>(k);
        harmonic.add(1.0 / x);
        double hk = harmonic.value();
        double tk = t(x);
        s_acc.add(hk * tk);
        if (k == N) h_n = hk;
        if (k > N) d_acc.add((hk - h_n) * tk);
    }
    double S = s_acc.value() + rh.mid();
    double S_err = 0.5 * rh.width() + 1e-16 * S;
    double D = d_acc.value() + rh.mid() - h_n * rt.mid();
    double D_err = 0.5 * (rh.width() + h_n * rt.width()) + 1e-16 * S;

    CoefficientSeq seq;
    seq.kind = SeqKind::gamma;
    seq.spec = spec;
    seq.cutoff = K;
    seq.normalizer = 1.0 / S;
    seq.normalizerError = S_err / (S * S);
    seq.values.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (long long n = 1; n <= N; ++n)
        seq.values[static_cast<std::size_t>(n)] = seq.normalizer * tail[static_cast<std::size_t>(n)] / static_cast<double>(n);
    fill_prefix(seq);
    double rel_c = seq.normalizerError / seq.normalizer;
    seq.tailBound = seq.normalizer * (std::max(D, 0.0) + D_err) + rel_c + 1e-15;
    return seq;
}

CoefficientSeq alpha_seq(const CoefficientSeq& gamma, long long N) {
    if (gamma.kind != SeqKind::gamma) throw DomainError("alpha_seq needs a gamma sequence");
    if (N < 0 || gamma.size() < N) throw DomainError("gamma prefix shorter than requested alpha length");
    CoefficientSeq seq;
    seq.kind = SeqKind::alpha;
    seq.spec = gamma.spec;
    seq.normalizer = gamma.normalizer;
    seq.values.assign(static_cast<std::size_t>(N) + 1, 0.0);
    seq.values[0] = 1.0;
    const auto& g = gamma.values;
    auto& a = seq.values;
    for (long long n = 1; n <= N; ++n) {
        CompensatedSum acc;
        for (long long k = 1; k <= n; ++k)
            acc.add(g[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(n - k)]);
        a[static_cast<std::size_t>(n)] = acc.value();
    }
    fill_prefix(seq);
    seq.tailBound = 1.0;
    return seq;
}

CoefficientSeq delta_seq(long long N) {
    if (N < 0) throw DomainError("delta_seq needs N >= 0");
    CoefficientSeq seq;
    seq.kind = SeqKind::delta;
    seq.values.assign(static_cast<std::size_t>(N) + 1, 0.0);
    seq.values[0] = 1.0;
    for (long long n = 1; n <= N; ++n) {
        double x = static_cast<double>(n);
        seq.values[static_cast<std::size_t>(n)] = seq.values[static_cast<std::size_t>(n - 1)] * (x - 1.5) / x;
    }
    fill_prefix(seq);
    seq.tailBound = std::fabs(seq.prefixSums.back());
    return seq;
}

CoefficientSeq zygmund_seq(double beta, long long N) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("zygmund_seq needs 0 < beta < 1");
    if (N < 0) throw DomainError("zygmund_seq needs N >= 0");
    CoefficientSeq seq;
    seq.kind = SeqKind::zygmundBeta;
    seq.beta = beta;
    seq.values.assign(static_cast<std::size_t>(N) + 1, 0.0);
    seq.values[0] = 1.0;
    for (long long n = 1; n <= N; ++n) {
        double x = static_cast<double>(n);
        seq.values[static_cast<std::size_t>(n)] = seq.values[static_cast<std::size_t>(n - 1)] * (x - beta) / x;
    }
    fill_prefix(seq);
    seq.tailBound = seq.values.back();
    return seq;
}

BoundaryPath BoundaryPath::parse(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw DomainError("path must look like radial:1e-2..1e-6");
    std::string kind = text.substr(0, colon);
    BoundaryPath p;
    if (kind == "radial") p.kind = PathKind::radial;
    else if (kind == "circular") p.kind = PathKind::circular;
    else if (kind == "diagonal") p.kind = PathKind::diagonal;
    else throw DomainError("unknown path kind '" + kind + "'");
    std::string rest = text.substr(colon + 1);
    int per_decade = 1;
    auto c2 = rest.find(':');
    if (c2 != std::string::npos) {
        per_decade = std::stoi(rest.substr(c2 + 1));
        rest = rest.substr(0, c2);
        if (per_decade < 1) throw DomainError("points per decade must be >= 1");
    }
    auto dots = rest.find("..");
    try {
        if (dots == std::string::npos) {
            p.epsilons.push_back(std::stod(rest));
        } else {
            double hi = std::stod(rest.substr(0, dots));
            double lo = std::stod(rest.substr(dots + 2));
            if (!(hi > 0 && lo > 0 && lo <= hi)) throw DomainError("path range must be decreasing and positive");
            double decades = std::log10(hi / lo);
            int steps = static_cast<int>(std::lround(decades * per_decade));
            for (int i = 0; i <= steps; ++i)
                p.epsilons.push_back(hi * std::pow(10.0, -static_cast<double>(i) / per_decade));
        }
    } catch (const std::invalid_argument&) {
        throw DomainError("path epsilons are not numbers: " + rest);
    }
    for (double e : p.epsilons)
        if (!(e > 0.0)) throw DomainError("path epsilons must be positive");
    return p;
}

std::complex<double> BoundaryPath::point(std::size_t i) const {
    double e = epsilons.at(i);
    switch (kind) {
        case PathKind::radial: return {1.0 - e, 0.0};
        case PathKind::circular: return std::polar(1.0, 2.0 * kPi * e);
        case PathKind::diagonal: return std::polar(1.0 - e, 2.0 * kPi * e);
    }
    return {};
}

std::complex<double> BoundaryPath::one_minus_point(std::size_t i) const {
    double e = epsilons.at(i);
    double s = std::sin(kPi * e);
    switch (kind) {
        case PathKind::radial: return {e, 0.0};
        case PathKind::circular: return {2.0 * s * s, -std::sin(2.0 * kPi * e)};
        case PathKind::diagonal: return {e + (1.0 - e) * 2.0 * s * s, -(1.0 - e) * std::sin(2.0 * kPi * e)};
    }
    return {};
}

double eval_a_tail_bound(const CoefficientSeq& gamma, cplx z, cplx omz) {
    long long N = gamma.size();
    PowerCtx pc(z, omz);
    double geometric = gamma.tailBound * pc.abs_pow(static_cast<double>(N + 1));
    double abel = 2.0 * gamma.values.back() / std::abs(omz);
    return std::min(geometric, abel);
}

std::complex<double> eval_a(const CoefficientSeq& gamma, cplx z, double tolB) {
    return eval_a(gamma, z, cplx(1.0, 0.0) - z, tolB);
}

std::complex<double> eval_a(const CoefficientSeq& gamma, cplx z, cplx omz, double tolB) {
    if (gamma.kind != SeqKind::gamma) throw DomainError("eval_a needs a gamma sequence");
    if (omz == cplx(0.0, 0.0)) throw SingularPointError("A(z) is singular at z = 1");
    if (std::abs(z) > 1.0 + 1e-15) throw DomainError("A(z) needs |z| <= 1");
    double tb = eval_a_tail_bound(gamma, z, omz);
    if (tb > tolB) throw PrecisionError("gamma prefix too short for |B(z)| to the requested precision");
    PowerCtx pc(z, omz);
    CompensatedComplexSum acc;
    long long N = gamma.size();
    for (long long n = 1; n <= N; ++n)
        acc.add(gamma.values[static_cast<std::size_t>(n)] * pc.one_minus_pow(static_cast<double>(n)));
    double omitted = std::max(0.0, 1.0 - gamma.prefixSums.back());
    acc.add(cplx(omitted, 0.0));
    return 1.0 / acc.value();
}

long long gamma_length_for(const BoundaryPath& path, double tolB) {
    long long need = 1;
    for (std::size_t i = 0; i < path.epsilons.size(); ++i) {
        cplx omz = path.one_minus_point(i);
        cplx z = path.point(i);
        PowerCtx pc(z, omz);
        double n = std::numeric_limits<double>::infinity();
        if (pc.logr < 0.0) n = std::log(tolB) / pc.logr;
        // gamma_N <= 2 N^-3/2 (c < 1, b >= its minimum is not assumed; this is a sizing hint).
        double abel = std::pow(4.0 / (tolB * std::abs(omz)), 2.0 / 3.0);
        n = std::min(n, abel);
        need = std::max(need, static_cast<long long>(std::ceil(std::min(n, 9e15))));
    }
    return need;
}

std::vector<PropA1Row> check_prop_a1(const CoefficientSeq& gamma, const CoefficientSeq& alpha,
                                     const SlowlyVaryingSpec& spec, const BoundaryPath& path) {
    std::vector<PropA1Row> rows;
    const double c = gamma.normalizer;
    for (std::size_t i = 0; i < path.epsilons.size(); ++i) {
        cplx z = path.point(i);
        cplx omz = path.one_minus_point(i);
        double d = std::abs(omz);
        double b = eval_b_clamped(spec, 1.0 / d);
        PropA1Row r;
        r.epsilon = path.epsilons[i];
        r.z = z;
        cplx A = eval_a(gamma, z, omz);
        double base = std::abs(A) * std::sqrt(kPi) * std::sqrt(d) / std::sqrt(b);
        r.ratioI = 4.0 * c * base;
        r.ratioIHalfConstant = 2.0 * c * base;
        if (alpha.values.empty()) {
            r.ratioII = std::numeric_limits<double>::quiet_NaN();
        } else {
            PowerCtx pc(z, omz);
            CompensatedComplexSum acc;
            double best = 0.0;
            for (std::size_t k = 0; k < alpha.values.size(); ++k) {
                acc.add(alpha.values[k] * pc.pow(static_cast<double>(k)));
                best = std::max(best, std::abs(acc.value()));
            }
            r.ratioII = best * std::sqrt(d / b);
            r.alphaTerms = static_cast<long long>(alpha.values.size());
        }
        rows.push_back(r);
    }
    return rows;
}

namespace {

double series_tail_bound(double beta, const SlowlyVaryingSpec& spec, long long N, const PowerCtx& pc, double d) {
    double x = static_cast<double>(N + 1);
    double w = eval_b_clamped(spec, x) * std::pow(x, -beta);
    double bound = 2.0 / d;
    if (pc.logr < 0.0) bound = std::min(bound, pc.abs_pow(x) / -std::expm1(pc.logr));
    return w * bound;
}

}  // namespace

std::vector<SeriesAsymptoticRow> check_series_asymptotic(double beta, const SlowlyVaryingSpec& spec,
                                                         const BoundaryPath& path, long long N, double tailTol) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("series asymptotic needs 0 < beta < 1");
    for (std::size_t i = 0; i < path.epsilons.size(); ++i)
        if (1.0 / std::abs(path.one_minus_point(i)) < spec.x0)
            throw DomainError("path point with 1/|1-z| below x0");

    auto worst = [&](long long n) {
        double w = 0.0;
        for (std::size_t i = 0; i < path.epsilons.size(); ++i) {
            PowerCtx pc(path.point(i), path.one_minus_point(i));
            w = std::max(w, series_tail_bound(beta, spec, n, pc, std::abs(path.one_minus_point(i))));
        }
        return w;
    };
    if (N <= 0) {
        N = 1024;
        while (worst(N) > tailTol) {
            if (N > (1LL << 27)) throw TruncationError("series tail bound not reachable within 2^28 terms");
            N *= 2;
        }
    } else if (worst(N) > tailTol) {
        throw TruncationError("series truncation tail above tolerance");
    }

    std::vector<SeriesAsymptoticRow> rows;
    const double g = std::tgamma(1.0 - beta);
    for (std::size_t i = 0; i < path.epsilons.size(); ++i) {
        cplx z = path.point(i);
        cplx omz = path.one_minus_point(i);
        double d = std::abs(omz);
        PowerCtx pc(z, omz);
        CompensatedComplexSum acc;
        for (long long n = 1; n <= N; ++n) {
            double x = static_cast<double>(n);
            acc.add(eval_b_clamped(spec, x) * std::pow(x, -beta) * pc.pow(x));
        }
        SeriesAsymptoticRow r;
        r.epsilon = path.epsilons[i];
        r.z = z;
        r.terms = N;
        r.tailBound = series_tail_bound(beta, spec, N, pc, d);
        r.ratio = std::abs(acc.value()) / (g * std::pow(d, beta - 1.0) * eval_b(spec, 1.0 / d));
        rows.push_back(r);
    }
    return rows;
}

void write_coeff_csv(const CoefficientSeq& seq, const std::string& path) {
    CsvWriter w(path, {"n", "value", "prefixSum"});
    for (std::size_t i = 0; i < seq.values.size(); ++i)
        w.row({std::to_string(i), fmt(seq.values[i]), fmt(seq.prefixSums[i])});
    w.close();
}

void write_prop_a1_csv(const std::vector<PropA1Row>& rows, const std::string& path) {
    CsvWriter w(path, {"epsilon", "ratio_i", "ratio_ii", "ratio_i_half_constant"});
    for (const auto& r : rows) w.row({r.epsilon, r.ratioI, r.ratioII, r.ratioIHalfConstant});
    w.close();
}

void write_series_csv(const std::vector<SeriesAsymptoticRow>& rows, const std::string& path) {
    CsvWriter w(path, {"epsilon", "ratio", "tail_bound", "terms"});
    for (const auto& r : rows) w.row({fmt(r.epsilon), fmt(r.ratio), fmt(r.tailBound), std::to_string(r.terms)});
    w.close();
}

}  // namespace ergorate
