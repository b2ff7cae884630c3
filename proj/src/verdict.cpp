#include "ergorate/verdict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ergorate/io.hpp"

namespace ergorate {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::converges: return "converges";
        case Verdict::diverges: return "diverges";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

const FormResult& CriterionReport::form(const std::string& name) const {
    for (const auto& f : forms)
        if (f.name == name) return f;
    throw std::out_of_range("no form named " + name);
}

BlockWindow fit_window(long long N) {
    int last = 0;
    while ((2LL << (last + 1)) - 1 <= N && last < 62) ++last;
    // 2^(last+1) - 1 <= N
    double lo = static_cast<double>(N) / 100.0;
    int first = 0;
    while (std::ldexp(1.0, first) < lo) ++first;
    if (first > last) first = last;
    return {first, last};
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

FormResult classify_series(std::string name, std::vector<double> blocks, long long N, double margin, double value) {
    FormResult f;
    f.name = std::move(name);
    f.value = value;
    const double inf = std::numeric_limits<double>::infinity();
    bool any_inf = std::isinf(value);
    for (double b : blocks) any_inf = any_inf || std::isinf(b);
    if (any_inf) {
        f.tailSlope = inf;
        f.verdict = Verdict::diverges;
        f.blocks = std::move(blocks);
        return f;
    }
    BlockWindow w = fit_window(N);
    if (static_cast<int>(blocks.size()) <= w.last) blocks.resize(static_cast<std::size_t>(w.last) + 1, 0.0);
    double total = 0.0;
    for (double b : blocks) total += std::fabs(b);
    const double floor = std::max(1e-300, 1e-15 * total);
    int last_nonzero = -1;
    for (int k = w.first; k <= w.last; ++k)
        if (std::fabs(blocks[static_cast<std::size_t>(k)]) > floor) last_nonzero = k;
    if (last_nonzero < w.last) {
        // Support ends inside or before the window.
        f.tailSlope = -inf;
        f.verdict = Verdict::converges;
        f.blocks = std::move(blocks);
        return f;
    }
    std::vector<double> xs, ys;
    for (int k = w.first; k <= w.last; ++k) {
        double b = std::fabs(blocks[static_cast<std::size_t>(k)]);
        if (b > floor) {
            xs.push_back(std::log(k + 0.5));
            ys.push_back(std::log(b));
        }
    }
    f.tailSlope = least_squares_slope(xs, ys);
    if (f.tailSlope < -1.0 - margin) f.verdict = Verdict::converges;
    else if (f.tailSlope > -1.0 + margin) f.verdict = Verdict::diverges;
    else f.verdict = Verdict::inconclusive;
    f.blocks = std::move(blocks);
    return f;
}

FormResult classify_sup(std::string name, std::vector<double> blockMax, long long N, double margin) {
    FormResult f;
    f.name = std::move(name);
    f.supType = true;
    const double inf = std::numeric_limits<double>::infinity();
    double sup = 0.0;
    for (double b : blockMax) sup = std::max(sup, b);
    f.value = sup;
    if (std::isinf(sup)) {
        f.tailSlope = inf;
        f.verdict = Verdict::diverges;
        f.blocks = std::move(blockMax);
        return f;
    }
    BlockWindow w = fit_window(N);
    if (static_cast<int>(blockMax.size()) <= w.last) blockMax.resize(static_cast<std::size_t>(w.last) + 1, 0.0);
    std::vector<double> xs, ys;
    bool zero_tail = true;
    for (int k = w.first; k <= w.last; ++k) {
        double b = blockMax[static_cast<std::size_t>(k)];
        if (b > 0.0) {
            zero_tail = false;
            xs.push_back(std::log(k + 0.5));
            ys.push_back(std::log(b));
        }
    }
    if (zero_tail || xs.size() < 2) {
        f.tailSlope = -inf;
        f.verdict = Verdict::converges;
        f.blocks = std::move(blockMax);
        return f;
    }
    f.tailSlope = least_squares_slope(xs, ys);
    double before = 0.0;
    for (int k = 0; k < w.first; ++k) before = std::max(before, blockMax[static_cast<std::size_t>(k)]);
    double inside = 0.0;
    for (int k = w.first; k <= w.last; ++k) inside = std::max(inside, blockMax[static_cast<std::size_t>(k)]);
    if (f.tailSlope > margin) f.verdict = Verdict::diverges;
    else if (f.tailSlope < -margin) f.verdict = Verdict::converges;
    else f.verdict = inside <= before ? Verdict::converges : Verdict::inconclusive;
    f.blocks = std::move(blockMax);
    return f;
}

void finalize_report(CriterionReport& r, const std::string& slopeForm) {
    if (r.forms.empty()) {
        r.verdict = Verdict::inconclusive;
        r.consistent = true;
        return;
    }
    Verdict v = r.forms.front().verdict;
    r.consistent = true;
    for (const auto& f : r.forms)
        if (f.verdict != v) r.consistent = false;
    r.verdict = r.consistent ? v : Verdict::inconclusive;
    r.tailSlope = r.forms.front().tailSlope;
    for (const auto& f : r.forms)
        if (f.name == slopeForm) r.tailSlope = f.tailSlope;
}

namespace {

nlohmann::json num(double x) {
    if (std::isfinite(x)) return x;
    return fmt(x);
}

}  // namespace

void to_json(nlohmann::json& j, const FormResult& f) {
    nlohmann::json blocks = nlohmann::json::array();
    for (double b : f.blocks) blocks.push_back(num(b));
    j = {{"name", f.name},      {"value", num(f.value)},          {"tailSlope", num(f.tailSlope)},
         {"supType", f.supType}, {"verdict", to_string(f.verdict)}, {"blocks", blocks}};
}

void to_json(nlohmann::json& j, const CriterionReport& r) {
    nlohmann::json quantities = nlohmann::json::object();
    for (const auto& f : r.forms) quantities[f.name] = num(f.value);
    j = {{"criterion", r.criterion},
         {"quantities", quantities},
         {"forms", r.forms},
         {"truncationN", r.truncationN},
         {"tailSlope", num(r.tailSlope)},
         {"slopeMargin", r.slopeMargin},
         {"verdict", to_string(r.verdict)},
         {"consistent", r.consistent}};
    if (!r.extra.is_null()) j["extra"] = r.extra;
}

}  // namespace ergorate
