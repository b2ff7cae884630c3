#include "ergorate/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/zeta.hpp>

#include "ergorate/errors.hpp"
#include "ergorate/parallel.hpp"
#include "ergorate/quadrature.hpp"
#include "ergorate/rng.hpp"
#include "ergorate/summation.hpp"

namespace ergorate {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLacExp = 2.25;
constexpr long long kMaxSimLag = 1LL << 26;

// sum_{l >= from} l^{-s}, from >= 1.
double zeta_tail(double s, long long from) {
    if (from <= 1) return boost::math::zeta(s);
    if (from > 1000000) {
        // Euler-Maclaurin: int + f/2 - f'/12.
        double x = static_cast<double>(from);
        return std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s) + s / 12.0 * std::pow(x, -s - 1.0);
    }
    CompensatedSum partial;
    for (long long l = 1; l < from; ++l) partial.add(std::pow(static_cast<double>(l), -s));
    return boost::math::zeta(s) - partial.value();
}

// Smallest l >= 1 with 2^l >= m.
long long dyadic_level(long long m) {
    long long l = 1;
    while (l < 63 && (1LL << l) < m) ++l;
    return l;
}

std::map<std::string, std::string> parse_kv(const std::string& rest) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) kv[item] = "";
        else kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

double to_num(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw DomainError("parameter '" + key + "' is not a number: '" + v + "'");
    }
}

// Prefix sums of retained coefficients over lag positions.
struct LagPrefix {
    std::vector<long long> lag;
    std::vector<double> cum;  // cum[i] = sum_{q <= i} a_q

    explicit LagPrefix(const LinearProcessSpec& s) {
        double acc = 0.0;
        for (const auto& l : s.lags) {
            lag.push_back(l.lag);
            acc += l.a;
            cum.push_back(acc);
        }
    }
    // sum of a over lags <= x
    double upto(long long x) const {
        auto it = std::upper_bound(lag.begin(), lag.end(), x);
        if (it == lag.begin()) return 0.0;
        return cum[static_cast<std::size_t>(it - lag.begin()) - 1];
    }
};

}  // namespace

double LinearProcessSpec::coeff_sum() const {
    CompensatedSum s;
    for (const auto& l : lags) s.add(l.a);
    return s.value();
}

double LinearProcessSpec::sq_sum() const {
    CompensatedSum s;
    for (const auto& l : lags) s.add(l.a * l.a);
    return s.value();
}

LinearProcessSpec build_lacunary(int kMax, double sigma) {
    if (kMax < 3) throw DomainError("lacunary process needs kMax >= 3");
    if (kMax > 62) throw RangeError("lacunary kMax above 62 exceeds the lag range");
    if (!(sigma > 0.0)) throw DomainError("innovation std must be positive");
    LinearProcessSpec s;
    s.rule = CoeffRule::lacunary94;
    s.kMax = kMax;
    s.innovationStd = sigma;
    for (int k = 1; k <= kMax; ++k) s.lags.push_back({1LL << k, std::pow(static_cast<double>(k), -kLacExp)});
    s.truncationM = 1LL << kMax;
    s.tailL2 = zeta_tail(2.0 * kLacExp, kMax + 1);
    s.tailL1 = zeta_tail(kLacExp, kMax + 1);
    return s;
}

LinearProcessSpec build_geometric(double rho, double sigma) {
    if (!(std::fabs(rho) < 1.0) || rho == 0.0) throw DomainError("geometric coefficients need 0 < |rho| < 1");
    if (!(sigma > 0.0)) throw DomainError("innovation std must be positive");
    LinearProcessSpec s;
    s.rule = CoeffRule::geometric;
    s.rho = rho;
    s.innovationStd = sigma;
    double ar = std::fabs(rho);
    long long M = static_cast<long long>(std::ceil(std::log(1e-16) / std::log(ar)));
    double p = 1.0;
    for (long long i = 0; i <= M; ++i) {
        s.lags.push_back({i, p});
        p *= rho;
    }
    s.truncationM = M;
    s.tailL2 = std::pow(ar, 2.0 * static_cast<double>(M + 1)) / (1.0 - ar * ar);
    s.tailL1 = std::pow(ar, static_cast<double>(M + 1)) / (1.0 - ar);
    return s;
}

LinearProcessSpec build_table(std::vector<double> a, double sigma) {
    if (a.empty()) throw DomainError("coefficient table is empty");
    if (!(sigma > 0.0)) throw DomainError("innovation std must be positive");
    LinearProcessSpec s;
    s.rule = CoeffRule::userTable;
    s.innovationStd = sigma;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i])) throw DomainError("coefficient table has a non-finite entry");
        if (a[i] != 0.0) s.lags.push_back({static_cast<long long>(i), a[i]});
    }
    s.table = std::move(a);
    s.truncationM = static_cast<long long>(s.table.size()) - 1;
    return s;
}

LinearProcessSpec LinearProcessSpec::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (name == "table") {
        std::vector<double> a;
        double sigma = 1.0;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.rfind("sigma=", 0) == 0) sigma = to_num("sigma", item.substr(6));
            else a.push_back(to_num("table", item));
        }
        return build_table(std::move(a), sigma);
    }
    auto kv = parse_kv(rest);
    double sigma = kv.count("sigma") ? to_num("sigma", kv["sigma"]) : 1.0;
    kv.erase("sigma");
    LinearProcessSpec s;
    if (name == "lacunary") {
        int k = kv.count("kmax") ? static_cast<int>(to_num("kmax", kv["kmax"])) : 10;
        kv.erase("kmax");
        s = build_lacunary(k, sigma);
    } else if (name == "geometric") {
        double r = kv.count("rho") ? to_num("rho", kv["rho"]) : 0.5;
        kv.erase("rho");
        s = build_geometric(r, sigma);
    } else if (name == "iid") {
        s = build_table({1.0}, sigma);
    } else {
        throw DomainError("unknown process '" + name + "' (expected lacunary, geometric, table, iid)");
    }
    if (!kv.empty()) throw DomainError("unknown process parameter '" + kv.begin()->first + "'");
    return s;
}

std::string LinearProcessSpec::to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (rule) {
        case CoeffRule::lacunary94: os << "lacunary:kmax=" << kMax; break;
        case CoeffRule::geometric: os << "geometric:rho=" << rho; break;
        case CoeffRule::userTable:
            os << "table:";
            for (std::size_t i = 0; i < table.size(); ++i) os << (i ? "," : "") << table[i];
            break;
    }
    os << ",sigma=" << innovationStd;
    return os.str();
}

nlohmann::json LinearProcessSpec::to_json() const {
    static const char* names[] = {"lacunary94", "geometric", "userTable"};
    nlohmann::json j = {{"kind", "linear"},
                        {"coeffRule", names[static_cast<int>(rule)]},
                        {"innovationStd", innovationStd},
                        {"truncationM", truncationM},
                        {"tailL2", tailL2},
                        {"tailL1", tailL1},
                        {"text", to_string()}};
    if (rule == CoeffRule::lacunary94) j["kMax"] = kMax;
    if (rule == CoeffRule::geometric) j["rho"] = rho;
    if (rule == CoeffRule::userTable) j["table"] = table;
    return j;
}

double abs_sum_from(const LinearProcessSpec& spec, long long m) {
    if (m < 0) m = 0;
    switch (spec.rule) {
        case CoeffRule::lacunary94: return zeta_tail(kLacExp, dyadic_level(m));
        case CoeffRule::geometric: {
            double ar = std::fabs(spec.rho);
            return std::pow(ar, static_cast<double>(m)) / (1.0 - ar);
        }
        case CoeffRule::userTable: {
            CompensatedSum s;
            for (const auto& l : spec.lags)
                if (l.lag >= m) s.add(std::fabs(l.a));
            return s.value();
        }
    }
    return 0.0;
}

double sq_sum_from(const LinearProcessSpec& spec, long long m) {
    if (m < 0) m = 0;
    switch (spec.rule) {
        case CoeffRule::lacunary94: return zeta_tail(2.0 * kLacExp, dyadic_level(m));
        case CoeffRule::geometric: {
            double r2 = spec.rho * spec.rho;
            return std::pow(r2, static_cast<double>(m)) / (1.0 - r2);
        }
        case CoeffRule::userTable: {
            CompensatedSum s;
            for (const auto& l : spec.lags)
                if (l.lag >= m) s.add(l.a * l.a);
            return s.value();
        }
    }
    return 0.0;
}

double cond_sn_norm_retained(const LinearProcessSpec& spec, long long n) {
    if (n < 1) throw DomainError("cond_sn_norm needs n >= 1");
    LagPrefix pre(spec);
    std::vector<long long> pts{0};
    for (const auto& l : spec.lags) {
        if (l.lag == 0) continue;
        pts.push_back(std::max(0LL, l.lag - n));
        pts.push_back(l.lag);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    CompensatedSum s;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        long long j = pts[i];
        double w = pre.upto(j + n) - pre.upto(j);
        s.add(static_cast<double>(pts[i + 1] - j) * w * w);
    }
    return spec.innovationStd * spec.innovationStd * s.value();
}

Certified cond_sn_norm_linear(const LinearProcessSpec& spec, long long n) {
    double sig2 = spec.innovationStd * spec.innovationStd;
    if (spec.rule == CoeffRule::geometric) {
        double r = spec.rho;
        double g = (1.0 - std::pow(r, static_cast<double>(n))) / (1.0 - r);
        return {sig2 * r * r / (1.0 - r * r) * g * g, 0.0};
    }
    double ret = cond_sn_norm_retained(spec, n);
    if (spec.rule == CoeffRule::userTable) return {ret, 0.0};
    double dn = static_cast<double>(n);
    if ((1LL << spec.kMax) >= n) {
        // Omitted lags are at least n apart from every other lag, so each
        // contributes n a^2 with no cross terms.
        return {ret + sig2 * dn * spec.tailL2, 1e-15 * (ret + sig2 * dn * spec.tailL2)};
    }
    double v = sig2 * dn * spec.tailL1 * spec.tailL1;
    return {ret, 2.0 * std::sqrt(ret * v) + v};
}

namespace {

// sum_{m=0}^{n-1} f(C(m)) with C(m) the cumulative retained coefficient sum.
template <class F>
double cumulative_sum(const LinearProcessSpec& spec, long long n, F f) {
    CompensatedSum s;
    double c = 0.0;
    long long pos = 0;
    for (const auto& l : spec.lags) {
        if (l.lag >= n) break;
        if (l.lag > pos) s.add(static_cast<double>(l.lag - pos) * f(c));
        c += l.a;
        pos = l.lag;
    }
    s.add(static_cast<double>(n - pos) * f(c));
    return s.value();
}

}  // namespace

double sum_variance_retained(const LinearProcessSpec& spec, long long n) {
    double sig2 = spec.innovationStd * spec.innovationStd;
    return cond_sn_norm_retained(spec, n) + sig2 * cumulative_sum(spec, n, [](double c) { return c * c; });
}

double wu_remainder_variance(const LinearProcessSpec& spec, long long n) {
    double sig2 = spec.innovationStd * spec.innovationStd;
    double A = spec.coeff_sum();
    return cond_sn_norm_retained(spec, n) +
           sig2 * cumulative_sum(spec, n, [A](double c) { return (c - A) * (c - A); });
}

double autocovariance_retained(const LinearProcessSpec& spec, long long h) {
    if (h < 0) h = -h;
    std::map<long long, double> byLag;
    for (const auto& l : spec.lags) byLag[l.lag] = l.a;
    CompensatedSum s;
    for (const auto& l : spec.lags) {
        auto it = byLag.find(l.lag + h);
        if (it != byLag.end()) s.add(l.a * it->second);
    }
    return spec.innovationStd * spec.innovationStd * s.value();
}

double theta_linear(const LinearProcessSpec& spec, long long m) {
    if (m < 0) throw DomainError("theta needs m >= 0");
    return spec.innovationStd * abs_sum_from(spec, m);
}

double theta_linear_retained(const LinearProcessSpec& spec, long long m) {
    CompensatedSum s;
    for (const auto& l : spec.lags)
        if (l.lag >= m) s.add(std::fabs(l.a));
    return spec.innovationStd * s.value();
}

LinearPath::LinearPath(const LinearProcessSpec& spec, std::uint64_t seed, long long rep)
    : spec_(&spec), eng_(make_engine(seed, static_cast<std::uint64_t>(rep))) {
    if (spec.truncationM > kMaxSimLag) throw DomainError("truncation lag too large to simulate");
    ring_.assign(static_cast<std::size_t>(spec.truncationM) + 1, 0.0);
    // eps_{1-M}, ..., eps_0
    for (std::size_t i = 1; i < ring_.size(); ++i) ring_[i] = spec.innovationStd * normal_(eng_);
    head_ = ring_.size() - 1;
}

double LinearPath::next() {
    const std::size_t size = ring_.size();
    head_ = head_ + 1 == size ? 0 : head_ + 1;
    last_eps_ = spec_->innovationStd * normal_(eng_);
    ring_[head_] = last_eps_;
    double x = 0.0;
    for (const auto& l : spec_->lags) {
        std::size_t back = static_cast<std::size_t>(l.lag);
        std::size_t idx = head_ >= back ? head_ - back : head_ + size - back;
        x += l.a * ring_[idx];
    }
    return x;
}

TrajectoryBatch simulate_linear(const LinearProcessSpec& spec, long long n, std::uint64_t seed, long long reps,
                                std::vector<long long> grid, int threads) {
    if (n < 1) throw DomainError("simulate needs n >= 1");
    if (reps < 1) throw DomainError("simulate needs reps >= 1");
    if (grid.empty()) grid = dyadic_grid(n);
    if (grid.back() > n) throw DomainError("grid exceeds n");
    TrajectoryBatch b;
    b.source = "linear";
    b.params = spec.to_json();
    b.seed = seed;
    b.n = n;
    b.reps = reps;
    b.grid = grid;
    b.S.assign(static_cast<std::size_t>(reps) * grid.size(), 0.0);
    b.aux.assign(b.S.size(), 0.0);
    parallel_for(reps, threads, [&](long long r) {
        LinearPath path(spec, seed, r);
        CompensatedSum s, e;
        std::size_t gi = 0;
        const std::size_t base = static_cast<std::size_t>(r) * grid.size();
        for (long long t = 1; t <= grid.back(); ++t) {
            s.add(path.next());
            e.add(path.innovation());
            if (t == grid[gi]) {
                b.S[base + gi] = s.value();
                b.aux[base + gi] = e.value();
                ++gi;
            }
        }
    });
    return b;
}

// --------------------------------------------------------------- rotation

const char* to_string(CoefficientConvention c) {
    return c == CoefficientConvention::literal ? "literal" : "level";
}

double factorial_remainder(double x) {
    CompensatedSum s;
    double term = 1.0;
    for (int j = 1; j < 200; ++j) {
        term /= (x + j);
        s.add(term);
        if (term < 1e-18 * s.value()) break;
    }
    return s.value();
}

double rotation_coefficient(double level, CoefficientConvention conv) {
    if (conv == CoefficientConvention::literal) {
        double lf = std::lgamma(level + 1.0);
        return std::exp(-1.5 * lf) / (lf * lf);
    }
    double l = std::log(level);
    return std::pow(level, -1.5) / (l * l);
}

namespace {

Mode make_level_mode(double level, CoefficientConvention conv) {
    Mode m;
    m.level = level;
    m.frequency = level <= 18.0 ? std::tgamma(level + 1.0) : 0.0;
    m.coeff = rotation_coefficient(level, conv);
    double r = factorial_remainder(level);
    m.phaseStep = 2.0 * r;
    double s = std::sin(2.0 * kPi * r);
    double c = std::cos(2.0 * kPi * r);
    m.oneMinusLambda = s * s;
    m.lambda = c * c;
    m.logLambda = std::log1p(-m.oneMinusLambda);
    m.simulable = level <= 12.0;
    return m;
}

const double kAlphaTurns = 2.0 * std::numbers::e - 5.0;

}  // namespace

bool FourierDiagonalModel::simulable() const {
    for (const auto& m : modes)
        if (!m.simulable) return false;
    return true;
}

nlohmann::json FourierDiagonalModel::to_json() const {
    nlohmann::json j = {{"kind", "fourier"},
                        {"alphaTurns", alphaTurns},
                        {"convention", to_string(convention)},
                        {"lMax", lMax},
                        {"explicitLevels", explicitLevels},
                        {"continuum", continuum},
                        {"modeCount", modes.size()}};
    if (modes.size() <= 64) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& m : modes)
            arr.push_back({{"level", m.level}, {"coeff", m.coeff}, {"lambda", m.lambda}, {"phaseStep", m.phaseStep}});
        j["modes"] = arr;
    }
    return j;
}

FourierDiagonalModel FourierDiagonalModel::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    if (name != "rotation") throw DomainError("unknown model '" + name + "' (expected rotation)");
    auto kv = parse_kv(colon == std::string::npos ? "" : text.substr(colon + 1));
    int lmax = kv.count("lmax") ? static_cast<int>(to_num("lmax", kv["lmax"])) : 8;
    kv.erase("lmax");
    CoefficientConvention conv = CoefficientConvention::literal;
    if (kv.count("coeffs")) {
        if (kv["coeffs"] == "level") conv = CoefficientConvention::level;
        else if (kv["coeffs"] != "literal") throw DomainError("coeffs must be literal or level");
        kv.erase("coeffs");
    }
    bool spectrum = false;
    if (kv.count("spectrum")) {
        spectrum = true;
        kv.erase("spectrum");
    }
    if (!kv.empty()) throw DomainError("unknown model parameter '" + kv.begin()->first + "'");
    if (spectrum) return build_rotation_spectrum(lmax, conv, true);
    return build_rotation_chain(lmax, conv);
}

FourierDiagonalModel build_rotation_chain(int lMax, CoefficientConvention conv) {
    if (lMax < 3 || lMax > 12) throw RangeError("rotation chain needs 3 <= lMax <= 12");
    FourierDiagonalModel m;
    m.alphaTurns = kAlphaTurns;
    m.convention = conv;
    m.lMax = lMax;
    m.explicitLevels = lMax;
    for (int l = 3; l <= lMax; ++l) m.modes.push_back(make_level_mode(l, conv));
    return m;
}

FourierDiagonalModel build_rotation_spectrum(int lExplicit, CoefficientConvention conv, bool continuum, double span) {
    if (lExplicit < 3) throw RangeError("spectrum needs at least level 3");
    FourierDiagonalModel m;
    m.alphaTurns = kAlphaTurns;
    m.convention = conv;
    m.lMax = lExplicit;
    m.explicitLevels = lExplicit;
    m.continuum = continuum;
    for (int l = 3; l <= lExplicit; ++l) m.modes.push_back(make_level_mode(l, conv));
    if (continuum) {
        // 8-point Gauss-Legendre on panels of width 0.25 in u = ln(level).
        const double h = 0.25;
        double u0 = std::log(lExplicit + 0.5);
        int panels = static_cast<int>(std::ceil(span / h));
        for (int p = 0; p < panels; ++p) {
            double mid = u0 + (p + 0.5) * h;
            for (int i = 0; i < 4; ++i)
                for (int sgn : {-1, 1}) {
                    double x = std::exp(mid + sgn * kGl8Nodes[i] * h / 2);
                    Mode md = make_level_mode(x, conv);
                    md.frequency = 0.0;
                    md.simulable = false;
                    md.weight = kGl8Weights[i] * h / 2 * x;
                    m.modes.push_back(md);
                }
        }
    }
    return m;
}

FourierDiagonalModel make_diagonal_model(const std::vector<std::pair<double, double>>& coeffLambda) {
    FourierDiagonalModel m;
    m.alphaTurns = 0.0;
    for (std::size_t i = 0; i < coeffLambda.size(); ++i) {
        auto [c, lam] = coeffLambda[i];
        if (!(lam >= -1.0 && lam <= 1.0)) throw DomainError("eigenvalue outside [-1, 1]");
        Mode md;
        md.level = static_cast<double>(i + 1);
        md.frequency = static_cast<double>(i + 1);
        md.coeff = c;
        md.lambda = lam;
        md.oneMinusLambda = 1.0 - lam;
        md.logLambda = lam > 0.0 ? std::log1p(-md.oneMinusLambda) : (lam < 0.0 ? std::log(-lam) : -INFINITY);
        md.simulable = false;
        m.modes.push_back(md);
    }
    m.lMax = static_cast<int>(coeffLambda.size());
    return m;
}

AtomicSpectralMeasure chain_measure(const FourierDiagonalModel& model) {
    std::map<double, double> byLambda;
    for (const auto& m : model.modes) {
        if (m.lambda == 1.0) throw DomainError("eigenvalue rounds to 1; use the power-norm routines instead");
        byLambda[m.lambda] += 2.0 * m.coeff * m.coeff * m.weight;
    }
    std::vector<Atom> atoms;
    for (auto [lam, w] : byLambda) atoms.push_back({std::fabs(lam), lam < 0.0 ? -0.5 : 0.0, w});
    return AtomicSpectralMeasure(std::move(atoms));
}

namespace {

// lambda^p for real p >= 0 (integer p when lambda < 0).
double lam_pow(const Mode& m, double p) {
    if (p == 0.0) return 1.0;
    if (m.lambda >= 0.0) return m.lambda == 0.0 ? 0.0 : std::exp(p * m.logLambda);
    return std::pow(m.lambda, p);
}

double one_minus_lam_pow(const Mode& m, double p) {
    if (m.lambda > 0.0) return -std::expm1(p * m.logLambda);
    return 1.0 - lam_pow(m, p);
}

}  // namespace

PowerNorms p_power_norms(const FourierDiagonalModel& model, double n) {
    if (n < 0) throw DomainError("power norms need n >= 0");
    CompensatedSum pn, un;
    for (const auto& m : model.modes) {
        double w = 2.0 * m.coeff * m.coeff * m.weight;
        pn.add(w * lam_pow(m, 2.0 * n));
        double g = m.oneMinusLambda == 0.0 ? n : m.lambda * one_minus_lam_pow(m, n) / m.oneMinusLambda;
        un.add(w * g * g);
    }
    return {pn.value(), un.value()};
}

double p_power_decrement(const FourierDiagonalModel& model, double k) {
    if (k < 1) throw DomainError("decrement needs k >= 1");
    CompensatedSum s;
    for (const auto& m : model.modes) {
        double w = 2.0 * m.coeff * m.coeff * m.weight;
        s.add(w * lam_pow(m, 2.0 * (k - 1.0)) * m.oneMinusLambda * (1.0 + m.lambda));
    }
    return s.value();
}

RotationPath::RotationPath(const FourierDiagonalModel& model, std::optional<double> x0, std::uint64_t seed,
                           long long rep)
    : eng_(make_engine(seed, static_cast<std::uint64_t>(rep))) {
    if (!model.simulable()) throw UnsupportedCombination("model has modes that cannot be simulated");
    x0_ = x0 ? *x0 : uniform01(eng_);
    if (!(x0_ >= 0.0 && x0_ < 1.0)) throw DomainError("start must lie in [0, 1)");
    for (const auto& m : model.modes) {
        amp_.push_back(2.0 * m.coeff);
        double hi, lo;
        two_product(m.frequency, x0_, hi, lo);
        phase0_.push_back(frac(frac(hi) + lo));
        step_.push_back(m.phaseStep);
    }
}

double RotationPath::phase(std::size_t m, long long steps) const {
    double hi, lo;
    two_product(static_cast<double>(steps), step_[m], hi, lo);
    return frac(frac(hi) + (phase0_[m] + lo));
}

double RotationPath::value_at(long long steps) const { return combination(steps, amp_); }

double RotationPath::combination(long long steps, const std::vector<double>& weights) const {
    double v = 0.0;
    for (std::size_t m = 0; m < amp_.size(); ++m) v += weights[m] * std::cos(2.0 * kPi * phase(m, steps));
    return v;
}

void RotationPath::mode_cosines(long long steps, std::vector<double>& out) const {
    out.resize(amp_.size());
    for (std::size_t m = 0; m < amp_.size(); ++m) out[m] = std::cos(2.0 * kPi * phase(m, steps));
}

long long RotationPath::advance() {
    if (bits_left_ == 0) {
        bits_ = eng_();
        bits_left_ = 32;
    }
    unsigned b = static_cast<unsigned>(bits_ & 3U);
    bits_ >>= 2;
    --bits_left_;
    if (b == 0) --steps_;
    else if (b == 3) ++steps_;
    return steps_;
}

double RotationPath::next() { return value_at(advance()); }

TrajectoryBatch simulate_rotation(const FourierDiagonalModel& model, long long n, std::optional<double> x0,
                                  std::uint64_t seed, long long reps, std::vector<long long> grid, int threads) {
    if (n < 1) throw DomainError("simulate needs n >= 1");
    if (reps < 1) throw DomainError("simulate needs reps >= 1");
    if (grid.empty()) grid = dyadic_grid(n);
    if (grid.back() > n) throw DomainError("grid exceeds n");
    TrajectoryBatch b;
    b.source = "rotation";
    b.params = model.to_json();
    b.params["start"] = x0 ? nlohmann::json(*x0) : nlohmann::json("stationary");
    b.seed = seed;
    b.n = n;
    b.reps = reps;
    b.grid = grid;
    b.S.assign(static_cast<std::size_t>(reps) * grid.size(), 0.0);
    b.aux.assign(b.S.size(), 0.0);
    b.start.assign(static_cast<std::size_t>(reps), 0.0);
    parallel_for(reps, threads, [&](long long r) {
        RotationPath path(model, x0, seed, r);
        b.start[static_cast<std::size_t>(r)] = path.start();
        CompensatedSum s;
        std::size_t gi = 0;
        const std::size_t base = static_cast<std::size_t>(r) * grid.size();
        for (long long t = 1; t <= grid.back(); ++t) {
            s.add(path.next());
            if (t == grid[gi]) {
                b.S[base + gi] = s.value();
                b.aux[base + gi] = static_cast<double>(path.steps());
                ++gi;
            }
        }
    });
    return b;
}

// ------------------------------------------------------------- rho-mixing

double RhoMixingSpec::rho(double n) const {
    switch (kind) {
        case RhoKind::zero: return 0.0;
        case RhoKind::one: return 1.0;
        case RhoKind::logDecay: {
            if (n <= std::exp(1.0)) return 1.0;
            double l = std::log(n);
            double ll = std::log(l);
            double v = 1.0 / (std::pow(l, a) * std::pow(ll, tau));
            return std::isfinite(v) ? std::min(1.0, std::max(0.0, v)) : 1.0;
        }
    }
    return 1.0;
}

RhoMixingSpec RhoMixingSpec::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    if (name != "rho") throw DomainError("unknown rho-mixing spec '" + name + "'");
    auto kv = parse_kv(colon == std::string::npos ? "" : text.substr(colon + 1));
    RhoMixingSpec s;
    if (kv.count("zero")) {
        s.kind = RhoKind::zero;
        kv.erase("zero");
    } else if (kv.count("one")) {
        s.kind = RhoKind::one;
        kv.erase("one");
    }
    if (kv.count("a")) s.a = to_num("a", kv["a"]), kv.erase("a");
    if (kv.count("tau")) s.tau = to_num("tau", kv["tau"]), kv.erase("tau");
    if (kv.count("C")) s.constantC = to_num("C", kv["C"]), kv.erase("C");
    if (!kv.empty()) throw DomainError("unknown rho parameter '" + kv.begin()->first + "'");
    return s;
}

RhoBound rho_dyadic_bound(const RhoMixingSpec& spec, long long n) {
    if (n < 2) throw DomainError("rho bound needs n >= 2");
    int levels = 0;
    while ((1LL << levels) < n) ++levels;  // r + 1 = ceil(log2 n)
    CompensatedSum s;
    for (int j = 0; j < levels; ++j) s.add(std::pow(2.0, 0.5 * j) * spec.rho(std::ldexp(1.0, j)));
    RhoBound b;
    b.bound = spec.constantC * s.value();
    double x = std::max(static_cast<double>(n), std::exp(std::exp(1.0)));
    double l = std::log(x);
    b.normalized = b.bound * l * l * std::pow(std::log(l), spec.tau) / std::sqrt(static_cast<double>(n));
    return b;
}

}  // namespace ergorate
