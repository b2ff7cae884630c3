#include "ergorate/slowly_varying.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "ergorate/errors.hpp"
#include "ergorate/summation.hpp"

namespace ergorate {

namespace {

const double kE = std::exp(1.0);
const double kEe = std::exp(kE);

double natural_floor(SvFamily f) {
    switch (f) {
        case SvFamily::constant: return 0.0;
        case SvFamily::logPow: return 1.0;
        default: return kE;
    }
}

}  // namespace

SlowlyVaryingSpec SlowlyVaryingSpec::constant() { return {SvFamily::constant, 0.0, 0.0, 1.0}; }

SlowlyVaryingSpec SlowlyVaryingSpec::log_pow(double alpha) {
    return {SvFamily::logPow, alpha, 0.0, kE};
}

SlowlyVaryingSpec SlowlyVaryingSpec::log_log_pow(double alpha, double beta) {
    return {SvFamily::logLogPow, alpha, beta, kEe};
}

SlowlyVaryingSpec SlowlyVaryingSpec::reciprocal_log_pow(double alpha, double beta) {
    return {SvFamily::reciprocalLogPow, alpha, beta, kEe};
}

SlowlyVaryingSpec SlowlyVaryingSpec::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    std::map<std::string, double> kv;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos) throw DomainError("b-family parameter without '=': " + item);
            try {
                kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw DomainError("b-family parameter is not a number: " + item);
            }
        }
    }
    auto get = [&](const char* k, double def) {
        auto it = kv.find(k);
        if (it == kv.end()) return def;
        double v = it->second;
        kv.erase(it);
        return v;
    };
    SlowlyVaryingSpec s;
    if (name == "const" || name == "constant") {
        s = constant();
    } else if (name == "log") {
        s = log_pow(get("alpha", 1.0));
    } else if (name == "loglog") {
        double a = get("alpha", 0.0);
        s = log_log_pow(a, get("beta", 1.0));
    } else if (name == "reclog") {
        double a = get("alpha", 1.0);
        s = reciprocal_log_pow(a, get("beta", 0.0));
    } else {
        throw DomainError("unknown b-family '" + name + "' (expected const, log, loglog, reclog)");
    }
    double x0 = get("x0", s.x0);
    if (!kv.empty()) throw DomainError("unknown b-family parameter '" + kv.begin()->first + "'");
    if (!(x0 > natural_floor(s.family)) && s.family != SvFamily::constant)
        throw DomainError("x0 below the natural domain of the b-family");
    if (s.family == SvFamily::constant && !(x0 > 0.0)) throw DomainError("x0 must be positive");
    s.x0 = x0;
    return s;
}

std::string SlowlyVaryingSpec::to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (family) {
        case SvFamily::constant: os << "const"; break;
        case SvFamily::logPow: os << "log:alpha=" << alpha; break;
        case SvFamily::logLogPow: os << "loglog:alpha=" << alpha << ",beta=" << beta; break;
        case SvFamily::reciprocalLogPow: os << "reclog:alpha=" << alpha << ",beta=" << beta; break;
    }
    os << (family == SvFamily::constant ? ":" : ",") << "x0=" << x0;
    return os.str();
}

double eval_b(const SlowlyVaryingSpec& spec, double x) {
    if (!(x >= spec.x0)) throw DomainError("b(x) evaluated below x0");
    switch (spec.family) {
        case SvFamily::constant: return 1.0;
        case SvFamily::logPow: return std::pow(std::log(x), spec.alpha);
        case SvFamily::logLogPow: {
            double l = std::log(x);
            return std::pow(l, spec.alpha) * std::pow(std::log(l), spec.beta);
        }
        case SvFamily::reciprocalLogPow: {
            double l = std::log(x);
            return 1.0 / (std::pow(l, spec.alpha) * std::pow(std::log(l), spec.beta));
        }
    }
    return 1.0;
}

double eval_b_clamped(const SlowlyVaryingSpec& spec, double x) {
    return eval_b(spec, x < spec.x0 ? spec.x0 : x);
}

double b_star(const SlowlyVaryingSpec& spec, long long n) {
    if (n < 1) throw DomainError("b_star needs n >= 1");
    CompensatedSum s;
    for (long long k = 1; k <= n; ++k) {
        double x = static_cast<double>(k);
        s.add(1.0 / (x * eval_b_clamped(spec, x)));
    }
    return s.value();
}

bool sampled_regular_variation(const SlowlyVaryingSpec& spec, double delta, double from, double to) {
    if (from < spec.x0) from = spec.x0;
    const int steps = 400;
    double ratio = std::pow(to / from, 1.0 / steps);
    double x = from;
    double up_prev = std::pow(x, delta) * eval_b(spec, x);
    double dn_prev = std::pow(x, -delta) * eval_b(spec, x);
    for (int i = 1; i <= steps; ++i) {
        x *= ratio;
        double b = eval_b(spec, x);
        double up = std::pow(x, delta) * b;
        double dn = std::pow(x, -delta) * b;
        if (up < up_prev * (1 - 1e-14) || dn > dn_prev * (1 + 1e-14)) return false;
        up_prev = up;
        dn_prev = dn;
    }
    return true;
}

bool sampled_b_bstar_increasing(const SlowlyVaryingSpec& spec, long long nMax) {
    CompensatedSum s;
    double prev = -1.0;
    long long next = 2;
    for (long long k = 1; k <= nMax; ++k) {
        double x = static_cast<double>(k);
        s.add(1.0 / (x * eval_b_clamped(spec, x)));
        if (k == next) {
            double v = eval_b_clamped(spec, x) * s.value();
            if (v <= prev) return false;
            prev = v;
            next *= 2;
        }
    }
    return true;
}

void to_json(nlohmann::json& j, const SlowlyVaryingSpec& s) {
    static const char* names[] = {"constant", "logPow", "logLogPow", "reciprocalLogPow"};
    j = {{"family", names[static_cast<int>(s.family)]}, {"alpha", s.alpha}, {"beta", s.beta}, {"x0", s.x0}};
}

void from_json(const nlohmann::json& j, SlowlyVaryingSpec& s) {
    std::string f = j.at("family").get<std::string>();
    if (f == "constant") s.family = SvFamily::constant;
    else if (f == "logPow") s.family = SvFamily::logPow;
    else if (f == "logLogPow") s.family = SvFamily::logLogPow;
    else if (f == "reciprocalLogPow") s.family = SvFamily::reciprocalLogPow;
    else throw DomainError("unknown b-family " + f);
    s.alpha = j.value("alpha", 0.0);
    s.beta = j.value("beta", 0.0);
    s.x0 = j.value("x0", 1.0);
}

}  // namespace ergorate
