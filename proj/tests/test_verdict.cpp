#include <doctest.h>

#include <cmath>
#include <limits>

#include "ergorate/io.hpp"
#include "ergorate/summation.hpp"
#include "ergorate/trajectory.hpp"
#include "ergorate/verdict.hpp"

using namespace ergorate;

namespace {

// Dyadic block sums of k^p for k = 0..K, mimicking sum_n 1/(n log^q n).
std::vector<double> power_blocks(int K, double p) {
    std::vector<double> b;
    for (int k = 0; k <= K; ++k) b.push_back(std::pow(k + 0.5, p));
    return b;
}

}  // namespace

TEST_SUITE("verdict") {

TEST_CASE("fit window covers the last two decades") {
    auto w = fit_window(1 << 20);
    CHECK(w.last == 19);
    CHECK(std::ldexp(1.0, w.first) >= (1 << 20) / 100.0);
    CHECK(std::ldexp(1.0, w.first - 1) < (1 << 20) / 100.0);
}

TEST_CASE("series verdict from block slope") {
    const long long N = 1LL << 40;
    CHECK(classify_series("a", power_blocks(40, -2.0), N, 0.15, 1.0).verdict == Verdict::converges);
    CHECK(classify_series("b", power_blocks(40, 0.0), N, 0.15, 1.0).verdict == Verdict::diverges);
    CHECK(classify_series("c", power_blocks(40, -1.0), N, 0.15, 1.0).verdict == Verdict::inconclusive);
    auto f = classify_series("d", power_blocks(40, -2.0), N, 0.15, 1.0);
    CHECK(f.tailSlope == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("series verdict edge cases") {
    std::vector<double> b(21, 1.0);
    for (int k = 10; k <= 20; ++k) b[static_cast<std::size_t>(k)] = 0.0;
    CHECK(classify_series("finite support", b, 1 << 20, 0.15, 1.0).verdict == Verdict::converges);
    b[3] = std::numeric_limits<double>::infinity();
    CHECK(classify_series("infinite", b, 1 << 20, 0.15, 1.0).verdict == Verdict::diverges);
}

TEST_CASE("sup verdict") {
    const long long N = 1LL << 40;
    CHECK(classify_sup("grow", power_blocks(40, 0.5), N, 0.15).verdict == Verdict::diverges);
    CHECK(classify_sup("decay", power_blocks(40, -0.5), N, 0.15).verdict == Verdict::converges);
    // Flat inside the window but below an earlier peak: bounded.
    std::vector<double> flat(41, 1.0);
    flat[2] = 5.0;
    CHECK(classify_sup("flat", flat, N, 0.15).verdict == Verdict::converges);
    // Flat inside the window at a new running sup: not decidable.
    std::vector<double> level(41, 1.0);
    for (int k = 0; k < fit_window(N).first; ++k) level[static_cast<std::size_t>(k)] = 0.5;
    CHECK(classify_sup("level", level, N, 0.15).verdict == Verdict::inconclusive);
}

TEST_CASE("least squares slope") {
    CHECK(least_squares_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
}

TEST_CASE("report consistency flag") {
    CriterionReport r;
    r.forms.push_back(classify_series("a", power_blocks(40, -2.0), 1LL << 40, 0.15, 1.0));
    r.forms.push_back(classify_series("b", power_blocks(40, 0.0), 1LL << 40, 0.15, 1.0));
    finalize_report(r, "a");
    CHECK_FALSE(r.consistent);
}

}

TEST_SUITE("io") {

TEST_CASE("compensated summation recovers cancelled terms") {
    CompensatedSum s;
    s.add(1.0);
    s.add(1e100);
    s.add(1.0);
    s.add(-1e100);
    CHECK(s.value() == 2.0);
}

TEST_CASE("number formatting round trips") {
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(fmt(x)) == x);
    CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("grids") {
    CHECK(dyadic_grid(10) == std::vector<long long>{1, 2, 4, 8, 10});
    CHECK(parse_grid("16..128") == std::vector<long long>{16, 32, 64, 128});
    CHECK(parse_grid("100,1000,10000") == std::vector<long long>{100, 1000, 10000});
    CHECK_THROWS(parse_grid("x"));
}

}
