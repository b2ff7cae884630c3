#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergorate/approx.hpp"
#include "ergorate/cli.hpp"
#include "ergorate/coeffs.hpp"
#include "ergorate/mc.hpp"
#include "ergorate/models.hpp"
#include "ergorate/spectral.hpp"

using namespace ergorate;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

void note(const std::string& s) { std::printf("    %s\n", s.c_str()); }

// ---------------------------------------------------------------- 1
Outcome coefficient_identities() {
    bool ok = true;
    double worstAlpha = 0.0;
    for (auto spec : {SlowlyVaryingSpec::constant(), SlowlyVaryingSpec::log_pow(1.0)}) {
        auto g = gamma_seq(spec, 5000, 1e-12);
        auto a = alpha_seq(g, 5000);
        for (long long n = 1; n <= 5000; ++n) {
            long double conv = 0.0L;
            for (long long k = 1; k <= n; ++k)
                conv += static_cast<long double>(g.values[static_cast<std::size_t>(k)]) *
                        a.values[static_cast<std::size_t>(n - k)];
            double r = std::fabs(a.values[static_cast<std::size_t>(n)] - static_cast<double>(conv));
            worstAlpha = std::max(worstAlpha, r);
        }
    }
    ok &= worstAlpha < 1e-12;
    note("alpha residual max " + fmt("%.3e", worstAlpha));

    auto d = delta_seq(200);
    long double s = 0.0L, p = 1.0L;
    for (long long n = 0; n <= 200; ++n) {
        s += d.values[static_cast<std::size_t>(n)] * p;
        p *= 0.5L;
    }
    double deltaErr = std::fabs(static_cast<double>(s) - std::sqrt(0.5));
    ok &= deltaErr < 1e-10;
    note("delta series error " + fmt("%.3e", deltaErr));

    for (double beta : {0.25, 0.5, 0.75}) {
        auto z = zygmund_seq(beta, 10000);
        double r = z.values[10000] * std::tgamma(1.0 - beta) * std::pow(1e4, beta);
        ok &= r >= 0.99 && r <= 1.01;
        note("zygmund ratio beta=" + fmt("%.2f", beta) + " " + fmt("%.8f", r));
    }
    return {ok, "alpha residual, delta series and Zygmund ratios"};
}

// ---------------------------------------------------------------- 2
Outcome boundary_asymptotic() {
    bool ok = true;
    auto path = BoundaryPath::parse("radial:1e-3..1e-5:2");
    for (auto spec : {SlowlyVaryingSpec::constant(), SlowlyVaryingSpec::log_pow(1.0)}) {
        auto g = gamma_seq(spec, gamma_length_for(path), 1e-12);
        CoefficientSeq none;
        none.kind = SeqKind::alpha;
        auto rows = check_prop_a1(g, none, spec, path);
        std::string line = "b=" + spec.to_string() + " ratio_i:";
        double prevGap = INFINITY;
        bool monotone = true;
        for (const auto& r : rows) {
            line += " " + fmt("%.5f", r.ratioI);
            double gap = std::fabs(r.ratioI - 1.0);
            if (gap > prevGap) monotone = false;
            prevGap = gap;
        }
        double last = rows.back().ratioI;
        bool inBand = last >= 0.9 && last <= 1.1;
        note(line + (monotone ? " (monotone)" : " (not monotone)"));
        ok &= inBand && monotone;
    }
    return {ok, "ratio_i at eps = 1e-5 in [0.9, 1.1], monotone over 1e-3..1e-5"};
}

// ---------------------------------------------------------------- 3
Outcome spectral_consistency() {
    double worstRel = 0.0, worstSlack = 0.0, worstWithMass = 0.0;
    long long violations = 0, worstN = 0;
    std::uint64_t worstSeed = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto m = random_measure(seed, 16);
        const double mass = m.total_mass();
        for (long long n : {1, 2, 3, 5, 16, 63, 128, 255, 400, 512}) {
            std::vector<std::complex<double>> e(static_cast<std::size_t>(n) + 1, 1.0);
            e[0] = 0.0;
            double brute = weighted_norm_sq(m, e);
            double closed = un_norm_sq(m, n);
            worstRel = std::max(worstRel, std::fabs(closed - brute) / std::max(brute, 1e-300));
        }
        for (const auto& r : check_sn_bounds(m, 512)) {
            double rel = r.ubSlack / std::max(r.unNormSq, 1e-300);
            if (rel < -1e-9) ++violations;
            if (rel < worstSlack) {
                worstSlack = rel;
                worstN = r.n;
                worstSeed = seed;
            }
            worstWithMass = std::min(worstWithMass, (r.ubSlack + mass) / std::max(r.unNormSq, 1e-300));
        }
    }
    note("max relative |closed - brute| " + fmt("%.3e", worstRel));
    note("min relative upper-bound slack " + fmt("%.3e", worstSlack) + " (seed " + std::to_string(worstSeed) +
         ", n = " + std::to_string(worstN) + "), " + std::to_string(violations) + " rows below -1e-9");
    note("with the j = 0 term added: min relative slack " + fmt("%.3e", worstWithMass));
    return {worstRel <= 1e-12 && worstSlack >= -1e-9, "100 random measures, n <= 512"};
}

// ---------------------------------------------------------------- 4
Outcome criterion_corpus() {
    int mismatches = 0, inconsistent = 0, checked = 0;
    for (const auto& c : canonical_corpus()) {
        auto p = make_profile(c.measure, 1 << 16);
        std::string line = c.name + ":";
        for (const auto& [name, expected] : c.expected) {
            CriterionReport r;
            if (name == "lemma-x") r = criterion_lemma(p, ChiSpec::identity());
            else if (name == "sqrt") r = criterion_sqrt(p);
            else if (name == "log") r = criterion_log(p);
            else r = criterion_b(p, SlowlyVaryingSpec::log_pow(1.0));
            for (const auto& f : r.forms) {
                ++checked;
                if (f.verdict != expected) ++mismatches;
            }
            if (!r.consistent) ++inconsistent;
            line += " " + name + "=" + to_string(r.verdict);
        }
        note(line);
    }
    note(std::to_string(checked) + " forms, " + std::to_string(mismatches) + " mismatches, " +
         std::to_string(inconsistent) + " inconsistent reports");
    return {mismatches == 0 && inconsistent == 0, "6 canonical measures, every form"};
}

// ---------------------------------------------------------------- 5
Outcome lacunary_split() {
    auto lac = build_lacunary(10);
    auto wc = mw_condition_check(lac, MwForm::WC);
    MwOptions short_;
    short_.N = 1LL << 20;
    auto zwc = mw_condition_check(lac, MwForm::ZWC, short_);
    auto zwcLong = mw_condition_check(lac, MwForm::ZWC);
    note("WC (N = 2^20): " + std::string(to_string(wc.verdict)) + ", slope " + fmt("%.3f", wc.tailSlope));
    note("ZWC over n <= 2^20: " + std::string(to_string(zwc.verdict)) + ", block-max slope " +
         fmt("%.3f", zwc.tailSlope) + ", running sup " + fmt("%.4f", zwc.forms[0].value));
    note("ZWC over n <= 2^60: " + std::string(to_string(zwcLong.verdict)) + ", block-max slope " +
         fmt("%.3f", zwcLong.tailSlope) + ", running sup " + fmt("%.4f", zwcLong.forms[0].value));
    const auto& blocks = zwc.forms[0].blocks;
    std::string line = "ZWC block maxima k = 10..19:";
    for (std::size_t k = 10; k < blocks.size(); ++k) line += " " + fmt("%.4f", blocks[k]);
    note(line);
    bool ok = wc.verdict == Verdict::converges && zwc.verdict == Verdict::diverges;
    return {ok, "WC converges and ZWC grows over n <= 2^20"};
}

// ---------------------------------------------------------------- 6
Outcome rotation_split() {
    auto spec = build_rotation_spectrum(400, CoefficientConvention::level, true);
    MwOptions normal;
    normal.delta = 0.0;
    auto nc = mw_condition_check(spec, MwForm::normalChain, normal);
    MwOptions quenched;
    quenched.delta = 1.5;
    auto qw = mw_condition_check(spec, MwForm::quenchedWu, quenched);
    note("normal chain: " + std::string(to_string(nc.verdict)) + ", slope " + fmt("%.3f", nc.tailSlope) +
         ", N = 2^40");
    note("quenched Wu (delta = 1.5): " + std::string(to_string(qw.verdict)) + ", slope " + fmt("%.3f", qw.tailSlope));
    return {nc.verdict == Verdict::converges && qw.verdict == Verdict::diverges,
            "normal-chain series converges, quenched Wu series diverges"};
}

// ---------------------------------------------------------------- 7
Outcome wu_bound() {
    auto spec = build_lacunary(10);
    std::vector<long long> grid;
    for (long long n = 16; n <= 4096; n *= 2) grid.push_back(n);
    auto b = simulate_linear(spec, 4096, 20240701, 10000, grid);
    auto d = wu_decompose_linear(spec, b);
    auto rep = wu_bounds(spec, grid);
    attach_empirical(rep, d);
    bool finiteK = std::isfinite(rep.empiricalK) && rep.empiricalK > 0.0;
    bool bounded = true;
    for (const auto& r : rep.rows) {
        note("n=" + std::to_string(r.n) + " E[R^2]=" + fmt("%.5f", r.empiricalRn2) + " +- " + fmt("%.5f", r.se) +
             " exact " + fmt("%.5f", r.exactRn2) + " sum Theta^2 " + fmt("%.5f", r.wuBound) + " ratio " +
             fmt("%.4f", r.empiricalRn2 / r.wuBound));
        bounded &= r.empiricalRn2 <= rep.empiricalK * r.wuBound * (1 + 1e-12);
    }
    note("K = " + fmt("%.4f", rep.empiricalK));
    bool decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i - 1];
        const auto& c = rep.rows[i];
        if (10 * a.n < rep.rows.back().n) continue;
        if (!(c.empiricalRn2 / c.n < a.empiricalRn2 / a.n)) decreasing = false;
    }
    note(std::string("E[R^2]/n over the top decade: ") + (decreasing ? "decreasing" : "not decreasing"));
    return {finiteK && bounded && decreasing, "10^4 reps, n = 2^4..2^12"};
}

// ---------------------------------------------------------------- 8
Outcome normal_chain_remainder() {
    auto m = build_rotation_chain(7);
    auto mu = chain_measure(m);
    bool ok = true;
    for (long long n : {100LL, 1000LL, 10000LL}) {
        const double t = 1.0 - 1.0 / static_cast<double>(n);
        auto b = simulate_rotation(m, n, std::nullopt, 8800 + n, 2000, {n});
        auto d = normal_chain_martingale(m, b, t);
        double s = 0.0, s2 = 0.0;
        for (long long r = 0; r < d.reps; ++r) {
            double x = d.r(r, 0) * d.r(r, 0);
            s += x;
            s2 += x * x;
        }
        double reps = static_cast<double>(d.reps);
        double mean = s / reps;
        double se = std::sqrt(std::max(0.0, s2 / reps - mean * mean) / reps);
        double bound = remainder_bounds(mu, {n}).rows[0].boundB;
        double exact = normal_chain_remainder_exact(m, t, n);
        note("n=" + std::to_string(n) + " E[R^2]=" + fmt("%.4e", mean) + " +- " + fmt("%.2e", se) + " exact " +
             fmt("%.4e", exact) + " boundB " + fmt("%.4e", bound));
        ok &= mean <= bound + 3 * se;
    }
    return {ok, "rotation lMax = 7, t = 1 - 1/n"};
}

// ---------------------------------------------------------------- 9
Outcome quenched_clt() {
    auto m = build_rotation_chain(8);
    bool ok = true;
    for (double x0 : {0.0, 1.0 / 3.0, 0.618}) {
        auto r = quenched_clt_test(m, x0, 10000, 5000, 9000);
        note("x0=" + fmt("%.4f", x0) + " KS " + fmt("%.4f", r.ksDistance) + " sigma^2 " + fmt("%.5e", r.sigmaHatSq) +
             " +- " + fmt("%.2e", r.sigmaHatSqSe) + " exact " + fmt("%.5e", r.sigmaRefSq));
        ok &= r.pass();
    }
    return {ok, "starts 0, 1/3, 0.618; n = 10^4, 5000 reps"};
}

// ---------------------------------------------------------------- 10
Outcome lil() {
    bool ok = true;
    for (const char* p : {"iid", "lacunary:kmax=10"}) {
        auto r = lil_diagnostic(LinearProcessSpec::parse(p), 1000000, {1, 2, 3, 4, 5});
        std::string line = std::string(p) + ": sigma " + fmt("%.4f", r.sigma) + " per seed";
        for (double v : r.perSeed) line += " " + fmt("%.3f", v);
        line += ", median " + fmt("%.3f", r.median);
        note(line);
        for (const auto& w : r.warnings) note("warning: " + w);
        ok &= r.inBand;
    }
    return {ok, "median running max within [0.7, 1.2] sigma, N = 10^6, 5 seeds"};
}

// ---------------------------------------------------------------- 11
Outcome reproducibility() {
    auto root = fs::temp_directory_path() / "ergorate-acceptance-11";
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> runs = {
        {"coeffs", "--b", "log", "--N", "2048", "--beta", "0.5"},
        {"criteria", "--measure", "dyadic", "--N", "4096"},
        {"simulate", "rotation", "--n", "5000", "--reps", "20", "--seed", "3"},
        {"simulate", "linear", "--process", "lacunary:kmax=10", "--n", "5000", "--reps", "20", "--seed", "3"},
        {"approx", "wu", "--reps", "200", "--seed", "5"},
        {"approx", "normal", "--n-grid", "100,1000", "--reps", "100", "--seed", "5"},
        {"limits", "clt", "--model", "rotation:lmax=6", "--n", "2000", "--reps", "200", "--seed", "7"},
        {"limits", "rate", "--process", "iid", "--N", "4096", "--reps", "50", "--seed", "7"},
    };
    bool ok = true;
    int i = 0;
    for (auto args : runs) {
        auto dir = (root / std::to_string(i++)).string();
        std::string label;
        for (const auto& a : args) label += a + " ";
        args.insert(args.begin(), "ergorate");
        args.push_back("--out");
        args.push_back(dir);
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        int status = cli::main_entry(static_cast<int>(argv.size()), argv.data());
        if (status != 0) {
            note(label + ": exit status " + std::to_string(status));
            ok = false;
            continue;
        }
        auto bad = cli::verify_manifest(dir + "/manifest.json", 1);
        note(label + ": " + (bad.empty() ? std::string("identical") : std::to_string(bad.size()) + " files differ"));
        ok &= bad.empty();
    }
    fs::remove_all(root);
    return {ok, "manifest re-runs are byte-identical"};
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all = {
        {1, "coefficient identities", coefficient_identities},
        {2, "A(z) boundary asymptotic", boundary_asymptotic},
        {3, "spectral consistency", spectral_consistency},
        {4, "criterion corpus", criterion_corpus},
        {5, "lacunary WC / ZWC split", lacunary_split},
        {6, "rotation normal-chain / quenched split", rotation_split},
        {7, "Wu remainder bound", wu_bound},
        {8, "normal-chain remainder bound", normal_chain_remainder},
        {9, "quenched CLT", quenched_clt},
        {10, "LIL diagnostic", lil},
        {11, "reproducibility", reproducibility},
    };
    int failures = 0;
    for (const auto& c : all) {
        if (only != 0 && c.id != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
