#pragma once

#include <string>

#include <json.hpp>

namespace ergorate {

enum class SvFamily { constant, logPow, logLogPow, reciprocalLogPow };

// b(x) from one of the supported slowly varying families. For logPow only
// alpha is used; for the two log-log families b = (log x)^a (log log x)^b or
// its reciprocal. x0 is the smallest admissible argument.
struct SlowlyVaryingSpec {
    SvFamily family = SvFamily::constant;
    double alpha = 0.0;
    double beta = 0.0;
    double x0 = 1.0;

    static SlowlyVaryingSpec constant();
    static SlowlyVaryingSpec log_pow(double alpha);
    static SlowlyVaryingSpec log_log_pow(double alpha, double beta);
    static SlowlyVaryingSpec reciprocal_log_pow(double alpha, double beta);

    // Parses "const", "log", "log:alpha=2", "loglog:alpha=1,beta=2",
    // "reclog:alpha=1,beta=2", optionally with ",x0=...".
    static SlowlyVaryingSpec parse(const std::string& text);
    std::string to_string() const;
};

double eval_b(const SlowlyVaryingSpec& spec, double x);

// b(max(x, x0)); used wherever sums start below x0.
double eval_b_clamped(const SlowlyVaryingSpec& spec, double x);

// sum_{k=1}^n 1/(k b(max(k, x0))), compensated.
double b_star(const SlowlyVaryingSpec& spec, long long n);

// Samples x^delta b(x) (nondecreasing) and x^-delta b(x) (nonincreasing) on
// a geometric grid over [from, to].
bool sampled_regular_variation(const SlowlyVaryingSpec& spec, double delta, double from, double to);

// Whether b(n) b*(n) increases along dyadic n up to nMax. Reported only.
bool sampled_b_bstar_increasing(const SlowlyVaryingSpec& spec, long long nMax);

void to_json(nlohmann::json& j, const SlowlyVaryingSpec& s);
void from_json(const nlohmann::json& j, SlowlyVaryingSpec& s);

}  // namespace ergorate
