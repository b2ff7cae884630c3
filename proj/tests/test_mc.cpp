#include <doctest.h>

#include <cmath>

#include "ergorate/errors.hpp"
#include "ergorate/mc.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace ergorate;

TEST_SUITE("mc") {

TEST_CASE("exact variance") {
    CHECK(sigma_sq_exact(make_diagonal_model({{0.0, 0.5}})) == 0.0);
    CHECK(sigma_sq_exact(make_diagonal_model({{0.3, 0.0}})) == doctest::Approx(2 * 0.09));
    auto m = build_rotation_chain(7);
    double s2 = sigma_sq_exact(m);
    CHECK(s2 == doctest::Approx(oracle::sigma_sq_lmax7).epsilon(1e-12));
    CHECK(variance_ratio_exact(m, 100000) == doctest::Approx(oracle::var_ratio_lmax7_1e5).epsilon(1e-12));
    CHECK(variance_ratio_exact(m, 10) == doctest::Approx(oracle::var_ratio_lmax7_10).epsilon(1e-12));
    CHECK(std::fabs(variance_ratio_exact(m, 100000) / s2 - 1.0) < 1e-3);
    CHECK(sigma_sq_exact(build_geometric(0.5)) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK_THROWS_AS(sigma_sq_exact(make_diagonal_model({{0.1, 1.0}})), DegenerateError);
}

TEST_CASE("CLT: degenerate function passes") {
    auto zero = zero_chain();
    auto r = quenched_clt_test(zero, 0.1, 1000, 200, 1);
    CHECK(r.degenerate);
    CHECK(r.pass());
}

TEST_CASE("CLT: iid Gaussian sums pass the 5% KS test in most seeded runs") {
    auto iid = LinearProcessSpec::parse("iid");
    int passes = 0;
    const int runs = 40;
    for (int s = 0; s < runs; ++s) {
        auto b = simulate_linear(iid, 64, 1000 + s, 1000, {64});
        auto r = clt_from_batch(b, 1.0);
        if (r.ksDistance <= r.ksCritical5) ++passes;
    }
    CHECK(passes >= 34);
}

TEST_CASE("CLT rejects too few reps") {
    auto b = simulate_linear(LinearProcessSpec::parse("iid"), 10, 1, 50, {10});
    CHECK_THROWS(clt_from_batch(b, 1.0));
}

TEST_CASE("LIL diagnostic") {
    auto zero = zero_chain();
    auto z = lil_diagnostic(zero, 5000, {1, 2, 3});
    CHECK(z.degenerate);
    CHECK_FALSE(z.inBand);
    auto r = lil_diagnostic(LinearProcessSpec::parse("iid"), 200000, {1, 2, 3, 4, 5});
    CHECK(r.sigma == 1.0);
    CHECK(r.perSeed.size() == 5);
    CHECK(r.median > 0.5);
    CHECK(r.median < 1.5);
}

TEST_CASE("rate check") {
    auto zero = zero_chain();
    auto zb = simulate_source(zero, 4096, 0.3, 1, 8);
    auto zr = rate_check(zb, Normalizer::parse("sqrtN"), Verdict::converges);
    for (double v : zr.mean) CHECK(v == 0.0);

    // |S_n| / sqrt(n loglog n) decays only like (loglog n)^{-1/2}.
    auto iid = LinearProcessSpec::parse("iid");
    auto b = simulate_source(iid, 1 << 16, std::nullopt, 2, 1000);
    auto r = rate_check(b, Normalizer::parse("sqrtNLogLogN"), Verdict::inconclusive);
    CHECK(r.slow);
    CHECK(r.exploratory);
    CHECK(r.trendSlope < 0.05);
    CHECK_THROWS(Normalizer::parse("sqrtX"));
}

TEST_CASE("normalizers") {
    CHECK(Normalizer::parse("sqrtN")(100.0) == doctest::Approx(10.0));
    auto bs = Normalizer::parse("sqrtNbStar:const");
    CHECK(bs(3.0) == doctest::Approx(std::sqrt(3.0 * 11.0 / 6.0)));
}

TEST_CASE("series check") {
    auto zero = zero_chain();
    auto z = series_sqrt_check(zero, 1024, 4, 1);
    for (double v : z.partial) CHECK(v == 0.0);
    auto cob = series_sqrt_check(build_table({1.0, -1.0}), 1 << 16, 64, 3, Verdict::converges);
    CHECK(cob.tailsShrink);
    auto iid = series_sqrt_check(LinearProcessSpec::parse("iid"), 1 << 16, 64, 3);
    CHECK_FALSE(iid.tailsShrink);
}

TEST_CASE("unsupported simulation sources") {
    CHECK_THROWS_AS(simulate_source(RhoMixingSpec::parse("rho:a=2,tau=1"), 10, std::nullopt, 1, 1),
                    UnsupportedCombination);
}

}
