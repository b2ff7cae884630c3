#include <doctest.h>

#include <cmath>

#include "ergorate/approx.hpp"
#include "ergorate/errors.hpp"
#include "ergorate/models.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace ergorate;

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_sq_remainder(const MartingaleDecomposition& d, std::size_t gi) {
    double s = 0.0, s2 = 0.0;
    for (long long r = 0; r < d.reps; ++r) {
        double x = d.r(r, gi) * d.r(r, gi);
        s += x;
        s2 += x * x;
    }
    double n = static_cast<double>(d.reps);
    double mean = s / n;
    return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean) / n)};
}

void check_exact_split(const TrajectoryBatch& b, const MartingaleDecomposition& d) {
    double worst = 0.0;
    for (long long r = 0; r < b.reps; ++r)
        for (std::size_t g = 0; g < b.grid.size(); ++g)
            worst = std::max(worst, std::fabs(b.s(r, g) - d.m(r, g) - d.r(r, g)));
    CHECK(worst <= 1e-10);
}

}  // namespace

TEST_SUITE("approx") {

TEST_CASE("Wu decomposition: iid is already a martingale") {
    auto spec = LinearProcessSpec::parse("iid");
    auto b = simulate_linear(spec, 256, 3, 50);
    auto d = wu_decompose_linear(spec, b);
    for (double r : d.R) CHECK(std::fabs(r) < 1e-12);
    check_exact_split(b, d);
}

TEST_CASE("Wu decomposition: geometric remainder stays bounded") {
    auto spec = build_geometric(0.5);
    CHECK(wu_remainder_variance(spec, 64) == doctest::Approx(oracle::wu_geometric_64).epsilon(1e-10));
    auto b = simulate_linear(spec, 1024, 8, 4000, {16, 64, 1024});
    auto d = wu_decompose_linear(spec, b, true);
    check_exact_split(b, d);
    for (std::size_t g = 0; g < b.grid.size(); ++g) {
        auto m = mean_sq_remainder(d, g);
        CHECK(std::fabs(m.mean - wu_remainder_variance(spec, b.grid[g])) <= 3 * m.se);
    }
    for (std::size_t h = 0; h < d.lagCorr.size(); ++h) CHECK(std::fabs(d.lagCorr[h]) <= 3 * d.lagCorrSe[h]);
}

TEST_CASE("Wu bound ratio is finite across the grid for the lacunary process") {
    auto spec = build_lacunary(10);
    std::vector<long long> grid;
    for (long long n = 16; n <= 4096; n *= 2) grid.push_back(n);
    auto rep = wu_bounds(spec, grid);
    double K = 0.0;
    for (const auto& r : rep.rows) {
        CHECK(r.wuBound > 0.0);
        K = std::max(K, r.exactRn2 / r.wuBound);
    }
    CHECK(K < 3.0);
}

TEST_CASE("resolvent") {
    auto iid = LinearProcessSpec::parse("iid");
    for (double t : {0.0, 0.3, 0.9}) {
        auto r = resolvent_gamma(iid, t);
        CHECK(r.exact == doctest::Approx(1.0));
    }
    auto lac = build_lacunary(10);
    auto r = resolvent_gamma(lac, 1.0 - 1.0 / 1024);
    CHECK(r.exact == doctest::Approx(oracle::resolvent_lacunary10).epsilon(1e-12));
    for (double t : {0.0, 0.5, 0.9, 0.99, 0.999}) {
        auto q = resolvent_gamma(lac, t);
        CHECK(q.exact <= q.majorant + q.majorantTail + 1e-12);
    }
    CHECK_THROWS_AS(resolvent_gamma(lac, 1.0), DomainError);
}

TEST_CASE("normal chain: zero function") {
    auto zero = zero_chain();
    auto b = simulate_rotation(zero, 100, 0.2, 1, 5);
    auto d = normal_chain_martingale(zero, b, 0.5);
    for (double x : d.M) CHECK(x == 0.0);
    for (double x : d.R) CHECK(x == 0.0);
}

TEST_CASE("normal chain at t = 0: increments are f(W_k) - Pf(W_{k-1})") {
    auto m = build_rotation_chain(4);
    const long long n = 50;
    auto b = simulate_rotation(m, n, 0.25, 9, 3, {1, 2, 10, 50});
    auto d = normal_chain_martingale(m, b, 0.0);
    CHECK(d.replayError == 0.0);
    std::vector<double> lam;
    for (const auto& md : m.modes) lam.push_back(2.0 * md.coeff * md.lambda);
    for (long long r = 0; r < b.reps; ++r) {
        RotationPath p(m, 0.25, 9, r);
        double M = 0.0;
        long long prev = 0;
        std::size_t gi = 0;
        for (long long k = 1; k <= n; ++k) {
            long long s = p.advance();
            M += p.value_at(s) - p.combination(prev, lam);
            prev = s;
            if (k == b.grid[gi]) {
                CHECK(d.m(r, gi) == doctest::Approx(M).epsilon(1e-12));
                ++gi;
            }
        }
    }
}

TEST_CASE("normal chain: empirical remainder matches the exact variance") {
    auto m = build_rotation_chain(7);
    const long long n = 1000;
    const double t = 1.0 - 1.0 / n;
    auto b = simulate_rotation(m, n, std::nullopt, 21, 2000, {n});
    auto d = normal_chain_martingale(m, b, t, true);
    check_exact_split(b, d);
    auto ms = mean_sq_remainder(d, 0);
    double exact = normal_chain_remainder_exact(m, t, n);
    CHECK(std::fabs(ms.mean - exact) <= 3 * ms.se);
    for (std::size_t h = 0; h < d.lagCorr.size(); ++h) CHECK(std::fabs(d.lagCorr[h]) <= 3 * d.lagCorrSe[h]);
}

TEST_CASE("remainder bounds") {
    SUBCASE("atom at zero") {
        AtomicSpectralMeasure m({{0.0, 0.0, 1.0}});
        auto rep = remainder_bounds(m, {10, 100});
        CHECK(rep.preconditionHolds);
        for (const auto& r : rep.rows) {
            CHECK(r.boundA == 0.0);
            CHECK(r.boundB == doctest::Approx(8.0 * (1.0 / r.n + 1.0)));
        }
    }
    SUBCASE("atom at one is flagged") {
        AtomicSpectralMeasure m({{1.0, 0.0, 1.0}});
        auto rep = remainder_bounds(m, {10});
        CHECK_FALSE(rep.preconditionHolds);
        CHECK(rep.flagged);
        CHECK(std::isinf(rep.rows[0].boundA));
    }
    SUBCASE("rotation model: boundB/n decreases and bounds the exact remainder") {
        auto model = build_rotation_chain(8);
        auto rep = remainder_bounds(chain_measure(model), {100, 1000, 10000});
        for (std::size_t i = 1; i < rep.rows.size(); ++i)
            CHECK(rep.rows[i].boundB / rep.rows[i].n < rep.rows[i - 1].boundB / rep.rows[i - 1].n);
        for (const auto& r : rep.rows) {
            CHECK(r.boundA >= 0.0);
            CHECK(normal_chain_remainder_exact(model, 1.0 - 1.0 / r.n, r.n) <= r.boundB);
        }
    }
}

TEST_CASE("martingale-approximation conditions") {
    auto lac = build_lacunary(10);
    CHECK(mw_condition_check(lac, MwForm::WC).verdict == Verdict::converges);
    CHECK(mw_condition_check(lac, MwForm::ZWC).verdict == Verdict::diverges);
    auto geo = build_geometric(0.5);
    for (auto f : {MwForm::ZWC, MwForm::WC, MwForm::propC})
        CHECK(mw_condition_check(geo, f).verdict == Verdict::converges);
    auto rot = build_rotation_spectrum(400, CoefficientConvention::level, true);
    MwOptions normal;
    normal.delta = 0.0;
    CHECK(mw_condition_check(rot, MwForm::normalChain, normal).verdict == Verdict::converges);
    CHECK(mw_condition_check(rot, MwForm::quenchedWu).verdict == Verdict::diverges);
    CHECK(mw_condition_check(RhoMixingSpec::parse("rho:a=2,tau=1"), MwForm::ZWC).verdict == Verdict::converges);
    CHECK_THROWS_AS(mw_condition_check(lac, MwForm::normalChain), UnsupportedCombination);
    CHECK_THROWS_AS(mw_condition_check(RhoMixingSpec::parse("rho:a=2,tau=1"), MwForm::WC), UnsupportedCombination);
    CHECK_THROWS_AS(parse_mw_form("XYZ"), DomainError);
}

}
