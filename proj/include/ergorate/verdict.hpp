#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace ergorate {

enum class Verdict { converges, diverges, inconclusive };

const char* to_string(Verdict v);

// One evaluated form of a convergence condition. blocks[k] holds the
// contribution of indices n in [2^k, 2^(k+1)) (for sup-type conditions, the
// maximum over that block).
struct FormResult {
    std::string name;
    double value = 0.0;
    double tailSlope = 0.0;
    Verdict verdict = Verdict::inconclusive;
    bool supType = false;
    std::vector<double> blocks;
};

struct CriterionReport {
    std::string criterion;
    std::vector<FormResult> forms;
    long long truncationN = 0;
    double slopeMargin = 0.15;
    double tailSlope = 0.0;
    Verdict verdict = Verdict::inconclusive;
    // All forms agree.
    bool consistent = true;
    nlohmann::json extra;

    const FormResult& form(const std::string& name) const;
};

// Dyadic blocks k with 2^k >= N/100 and 2^(k+1) - 1 <= N form the fitting
// window ("last two decades" of n).
struct BlockWindow {
    int first = 0;
    int last = 0;
};
BlockWindow fit_window(long long N);

// Summability verdict from block sums: slope of ln B_k against ln(k + 1/2).
FormResult classify_series(std::string name, std::vector<double> blocks, long long N, double margin,
                           double value);

// Boundedness verdict for a running sup from per-block maxima.
FormResult classify_sup(std::string name, std::vector<double> blockMax, long long N, double margin);

// Fills verdict/consistency/tailSlope from the forms; slopeForm names the
// form whose slope is reported at top level.
void finalize_report(CriterionReport& r, const std::string& slopeForm);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

void to_json(nlohmann::json& j, const FormResult& f);
void to_json(nlohmann::json& j, const CriterionReport& r);

}  // namespace ergorate
