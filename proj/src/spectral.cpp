#include "ergorate/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "ergorate/errors.hpp"
#include "ergorate/io.hpp"
#include "ergorate/rng.hpp"
#include "ergorate/summation.hpp"

namespace ergorate {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// e^{w} - 1 for w = a + 2 pi i phi, accurate for small |w|.
cplx expm1_turns(double a, double phi) {
    double b = 2.0 * kPi * phi;
    double ea_m1 = std::expm1(a);
    double hs = std::sin(0.5 * b);
    return {ea_m1 * std::cos(b) - 2.0 * hs * hs, (ea_m1 + 1.0) * std::sin(b)};
}

double log_r(double r) { return std::log1p(r - 1.0); }

}  // namespace

cplx Atom::z() const { return std::polar(r, 2.0 * kPi * theta); }

cplx Atom::one_minus() const {
    double s = std::sin(kPi * theta);
    return {(1.0 - r) + r * 2.0 * s * s, -r * std::sin(2.0 * kPi * theta)};
}

AtomicSpectralMeasure::AtomicSpectralMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::set<std::pair<double, double>> seen;
    for (auto& a : atoms_) {
        if (!(a.r >= 0.0 && a.r <= 1.0)) throw DomainError("atom outside the closed unit disk");
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw DomainError("atom weight must be finite and >= 0");
        if (!std::isfinite(a.theta)) throw DomainError("atom angle must be finite");
        a.theta = wrap_turns(a.theta);
        if (a.r == 0.0) a.theta = 0.0;
        if (!seen.insert({a.r, a.theta}).second) throw DomainError("atoms must be pairwise distinct");
    }
}

Atom AtomicSpectralMeasure::atom_at(cplx z, double weight) {
    double r = std::abs(z);
    if (r > 1.0 && r < 1.0 + 1e-15) r = 1.0;
    double th = (r == 0.0) ? 0.0 : std::atan2(z.imag(), z.real()) / (2.0 * kPi);
    return {r, wrap_turns(th), weight};
}

double AtomicSpectralMeasure::total_mass() const {
    CompensatedSum s;
    for (const auto& a : atoms_) s.add(a.weight);
    return s.value();
}

AtomicSpectralMeasure AtomicSpectralMeasure::read_csv(const std::string& path) {
    CsvTable t = ergorate::read_csv(path);
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < t.header.size(); ++i)
            if (t.header[i] == name) return i;
        throw DomainError("measure CSV " + path + " lacks column '" + name + "'");
    };
    std::size_t ir = col("r"), it = col("theta_turns"), iw = col("weight");
    std::vector<Atom> atoms;
    for (std::size_t row = 0; row < t.rows.size(); ++row) {
        const auto& cells = t.rows[row];
        if (cells.size() < t.header.size())
            throw DomainError("measure CSV " + path + ": short row " + std::to_string(row + 2));
        try {
            atoms.push_back({std::stod(cells[ir]), std::stod(cells[it]), std::stod(cells[iw])});
        } catch (const std::invalid_argument&) {
            throw DomainError("measure CSV " + path + ": non-numeric value in row " + std::to_string(row + 2));
        }
    }
    return AtomicSpectralMeasure(std::move(atoms));
}

void AtomicSpectralMeasure::write_csv(const std::string& path) const {
    CsvWriter w(path, {"r", "theta_turns", "weight"});
    for (const auto& a : atoms_) w.row({a.r, a.theta, a.weight});
    w.close();
}

std::uint64_t dn_index(const Atom& a) {
    if (a.is_one()) return kInfiniteIndex;
    const double inf = std::numeric_limits<double>::infinity();
    double by_r = a.r < 1.0 ? 1.0 / (1.0 - a.r) : inf;
    double by_t = a.theta != 0.0 ? 1.0 / std::fabs(a.theta) : inf;
    double m = std::min(by_r, by_t) * (1.0 + 1e-12);
    if (m >= static_cast<double>(kIndexCap)) return kIndexCap;
    return static_cast<std::uint64_t>(std::floor(m));
}

std::uint64_t dn_index(cplx z) {
    if (std::abs(z) > 1.0 + 1e-15) throw DomainError("dn_index needs |z| <= 1");
    if (z == cplx(1.0, 0.0)) return kInfiniteIndex;
    return dn_index(AtomicSpectralMeasure::atom_at(z, 0.0));
}

double mu_dn(const AtomicSpectralMeasure& m, long long n) {
    if (n < 1) throw DomainError("mu_dn needs n >= 1");
    CompensatedSum s;
    for (const auto& a : m.atoms())
        if (dn_index(a) >= static_cast<std::uint64_t>(n)) s.add(a.weight);
    return s.value();
}

double gn_abs_sq(const Atom& a, long long n) {
    if (a.r == 0.0) return 0.0;
    if (a.is_one()) return static_cast<double>(n) * static_cast<double>(n);
    double lr = log_r(a.r);
    double dn = static_cast<double>(n);
    cplx num = expm1_turns(dn * lr, wrap_turns(dn * a.theta));
    cplx den = expm1_turns(lr, a.theta);
    return a.r * a.r * std::norm(num) / std::norm(den);
}

double un_norm_sq(const AtomicSpectralMeasure& m, long long n) {
    if (n < 1) throw DomainError("un_norm_sq needs n >= 1");
    CompensatedSum s;
    for (const auto& a : m.atoms())
        if (a.weight > 0.0) s.add(a.weight * gn_abs_sq(a, n));
    return s.value();
}

double weighted_norm_sq(const AtomicSpectralMeasure& m, const std::vector<cplx>& a) {
    CompensatedSum s;
    for (const auto& at : m.atoms()) {
        cplx z = at.z();
        cplx p(0.0, 0.0);
        for (std::size_t k = a.size(); k-- > 0;) p = p * z + a[k];
        s.add(at.weight * std::norm(p));
    }
    return s.value();
}

double kernel_value(const Kernel& k, const Atom& a) {
    const double inf = std::numeric_limits<double>::infinity();
    cplx omz = a.one_minus();
    double d = std::abs(omz);
    switch (k.kind) {
        case KernelKind::invOneMinus: return d == 0.0 ? inf : 1.0 / d;
        case KernelKind::invOneMinusSq: return d == 0.0 ? inf : 1.0 / (d * d);
        case KernelKind::logSq: {
            if (d == 0.0) return inf;
            double l = std::log(d);
            return l * l;
        }
        case KernelKind::bOverOneMinus:
        case KernelKind::psiSq:
            return d == 0.0 ? inf : eval_b_clamped(k.spec, 1.0 / d) / d;
        case KernelKind::resolventMixed: {
            if (d == 0.0) return inf;
            double q = std::norm(cplx(1.0 - k.t, 0.0) + k.t * omz);
            return 1.0 / (d * q);
        }
        case KernelKind::resolventSq: {
            double q = std::norm(cplx(1.0 - k.t, 0.0) + k.t * omz);
            return 1.0 / q;
        }
    }
    return 0.0;
}

double spectral_integral(const AtomicSpectralMeasure& m, const Kernel& k) {
    if ((k.kind == KernelKind::resolventMixed || k.kind == KernelKind::resolventSq) && !(k.t >= 0.0 && k.t < 1.0))
        throw DomainError("resolvent kernels need t in [0, 1)");
    CompensatedSum s;
    for (const auto& a : m.atoms()) {
        if (a.weight == 0.0) continue;
        double v = kernel_value(k, a);
        if (std::isinf(v)) return std::numeric_limits<double>::infinity();
        s.add(a.weight * v);
    }
    return s.value();
}

std::vector<SnBoundRow> check_sn_bounds(const AtomicSpectralMeasure& m, long long nMax) {
    if (nMax < 2) throw DomainError("check_sn_bounds needs nMax >= 2");
    std::vector<SnBoundRow> rows;
    CompensatedSum ub;
    for (long long n = 1; n <= nMax; ++n) {
        double mu = mu_dn(m, n);
        if (n >= 2) {
            SnBoundRow r;
            r.n = n;
            r.unNormSq = un_norm_sq(m, n);
            r.muDn = mu;
            double lhs = static_cast<double>(n) * static_cast<double>(n) * mu;
            r.lhsRatio = r.unNormSq > 0.0 ? lhs / r.unNormSq : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            r.ubSlack = ub.value() - r.unNormSq;
            rows.push_back(r);
        }
        ub.add((2.0 * static_cast<double>(n) + 1.0) * mu);
    }
    return rows;
}

double ChiSpec::operator()(double x) const {
    switch (form) {
        case ChiForm::identity: return x;
        case ChiForm::xLogPow: {
            const double fl = std::exp(std::exp(1.0));
            double y = std::max(x, fl);
            double l = std::log(y);
            return x * l * std::pow(std::log(l), delta);
        }
        case ChiForm::xTimesB: return x * eval_b_clamped(spec, x);
        case ChiForm::logSquared: {
            double l = std::log(std::max(x, 1.0));
            return l * l;
        }
    }
    return x;
}

std::string ChiSpec::name() const {
    std::ostringstream os;
    switch (form) {
        case ChiForm::identity: os << "x"; break;
        case ChiForm::xLogPow: os << "x*log(x)*loglog(x)^" << delta; break;
        case ChiForm::xTimesB: os << "x*b(x)[" << spec.to_string() << "]"; break;
        case ChiForm::logSquared: os << "log^2"; break;
    }
    return os.str();
}

ChiValidation validate_chi(const ChiSpec& chi) {
    ChiValidation v;
    const int kMax = 40;
    const int per = 8;
    v.nondecreasing = true;
    double prev = chi(1.0);
    std::vector<double> ratio;
    for (int i = 0; i <= kMax * per; ++i) {
        double x = std::ldexp(std::pow(2.0, static_cast<double>(i % per) / per), i / per);
        double c = chi(x);
        if (c < prev * (1 - 1e-14)) v.nondecreasing = false;
        prev = c;
        ratio.push_back(c / std::pow(x, chi.alphaWitness));
    }
    int last_up = -1;
    for (std::size_t i = 1; i < ratio.size(); ++i)
        if (ratio[i] > ratio[i - 1] * (1 + 1e-14)) last_up = static_cast<int>(i);
    v.witnessHolds = last_up < static_cast<int>(ratio.size()) - per * 8;
    int thr_i = std::max(last_up, 0);
    v.threshold = std::ldexp(std::pow(2.0, static_cast<double>(thr_i % per) / per), thr_i / per);
    int k0 = static_cast<int>(std::ceil(std::log2(std::max(v.threshold, 1.0))));
    v.tau = std::numeric_limits<double>::infinity();
    for (int k = k0; k < kMax; ++k) v.tau = std::min(v.tau, chi(std::ldexp(1.0, k + 1)) / chi(std::ldexp(1.0, k)));
    return v;
}

MeasureProfile make_profile(const AtomicSpectralMeasure& m, long long N) {
    if (N < 16) throw DomainError("criteria need N >= 16");
    MeasureProfile p;
    p.N = N;
    p.measure = &m;
    p.unSq.assign(static_cast<std::size_t>(N) + 1, 0.0);
    p.muDn.assign(static_cast<std::size_t>(N) + 2, 0.0);
    std::vector<double> at_index(static_cast<std::size_t>(N) + 2, 0.0);
    for (const auto& a : m.atoms()) {
        std::uint64_t d = dn_index(a);
        std::size_t slot = d > static_cast<std::uint64_t>(N) ? static_cast<std::size_t>(N) + 1 : static_cast<std::size_t>(d);
        at_index[slot] += a.weight;
    }
    CompensatedSum suffix;
    for (long long n = N + 1; n >= 1; --n) {
        suffix.add(at_index[static_cast<std::size_t>(n)]);
        p.muDn[static_cast<std::size_t>(n)] = suffix.value();
    }
    p.muDn.resize(static_cast<std::size_t>(N) + 1);
    for (const auto& a : m.atoms()) {
        if (a.weight == 0.0) continue;
        for (long long n = 1; n <= N; ++n) p.unSq[static_cast<std::size_t>(n)] += a.weight * gn_abs_sq(a, n);
    }
    return p;
}

namespace {

int block_of(std::uint64_t n) { return 63 - std::countl_zero(n); }

struct FormWeights {
    std::function<double(const Atom&)> integrand;
    std::function<double(int)> dyadic;       // weight of mu(D_{2^k})
    std::function<double(double)> harmonic;  // weight of mu(D_n)
    std::function<double(double)> series;    // weight of ||U_n||^2
};

CriterionReport evaluate_forms(const MeasureProfile& p, const std::string& name, const FormWeights& w, double margin) {
    const long long N = p.N;
    const int top = block_of(static_cast<std::uint64_t>(N));
    CriterionReport r;
    r.criterion = name;
    r.truncationN = N;
    r.slopeMargin = margin;

    {
        std::vector<double> blocks(64, 0.0);
        CompensatedSum total;
        bool infinite = false;
        for (const auto& a : p.measure->atoms()) {
            if (a.weight == 0.0) continue;
            double v = a.weight * w.integrand(a);
            if (std::isinf(v)) {
                infinite = true;
                continue;
            }
            total.add(v);
            std::uint64_t d = dn_index(a);
            blocks[static_cast<std::size_t>(block_of(d))] += v;
        }
        double value = infinite ? std::numeric_limits<double>::infinity() : total.value();
        blocks.resize(static_cast<std::size_t>(top) + 1);
        r.forms.push_back(classify_series("integral", std::move(blocks), N, margin, value));
    }
    {
        std::vector<double> blocks(static_cast<std::size_t>(top) + 1, 0.0);
        CompensatedSum total;
        for (int k = 0; k <= top; ++k) {
            double v = w.dyadic(k) * p.muDn[std::size_t{1} << k];
            blocks[static_cast<std::size_t>(k)] = v;
            total.add(v);
        }
        r.forms.push_back(classify_series("dyadic", std::move(blocks), N, margin, total.value()));
    }
    {
        std::vector<double> blocks(static_cast<std::size_t>(top) + 1, 0.0);
        CompensatedSum total;
        for (long long n = 1; n <= N; ++n) {
            double v = w.harmonic(static_cast<double>(n)) * p.muDn[static_cast<std::size_t>(n)];
            blocks[static_cast<std::size_t>(block_of(static_cast<std::uint64_t>(n)))] += v;
            total.add(v);
        }
        r.forms.push_back(classify_series("harmonic", std::move(blocks), N, margin, total.value()));
    }
    {
        std::vector<double> blocks(static_cast<std::size_t>(top) + 1, 0.0);
        CompensatedSum total;
        for (long long n = 1; n <= N; ++n) {
            double v = w.series(static_cast<double>(n)) * p.unSq[static_cast<std::size_t>(n)];
            blocks[static_cast<std::size_t>(block_of(static_cast<std::uint64_t>(n)))] += v;
            total.add(v);
        }
        r.forms.push_back(classify_series("series", std::move(blocks), N, margin, total.value()));
    }
    finalize_report(r, "series");
    return r;
}

FormWeights chi_weights(const ChiSpec& chi) {
    FormWeights w;
    w.integrand = [chi](const Atom& a) {
        double d = std::abs(a.one_minus());
        if (d == 0.0) return std::numeric_limits<double>::infinity();
        return chi(1.0 / d);
    };
    w.dyadic = [chi](int k) { return chi(std::ldexp(1.0, k)); };
    w.harmonic = [chi](double n) { return chi(n) / n; };
    w.series = [chi](double n) { return chi(n) / (n * n * n); };
    return w;
}

}  // namespace

CriterionReport criterion_lemma(const MeasureProfile& p, const ChiSpec& chi, double margin) {
    if (chi.form == ChiForm::logSquared) return criterion_log(p, margin);
    CriterionReport r = evaluate_forms(p, "lemma[" + chi.name() + "]", chi_weights(chi), margin);
    ChiValidation v = validate_chi(chi);
    r.extra = {{"chi", chi.name()},
               {"alphaWitness", chi.alphaWitness},
               {"witnessHolds", v.witnessHolds},
               {"tau", v.tau},
               {"threshold", v.threshold}};
    return r;
}

CriterionReport criterion_sqrt(const MeasureProfile& p, double margin) {
    CriterionReport r = evaluate_forms(p, "sqrt", chi_weights(ChiSpec::identity()), margin);
    return r;
}

CriterionReport criterion_log(const MeasureProfile& p, double margin) {
    FormWeights w;
    w.integrand = [](const Atom& a) { return kernel_value(Kernel::log_sq(), a); };
    w.dyadic = [](int k) { return static_cast<double>(k); };
    w.harmonic = [](double n) { return std::log(n) / n; };
    w.series = [](double n) { return std::log(n) / (n * n * n); };
    return evaluate_forms(p, "log", w, margin);
}

CriterionReport criterion_b(const MeasureProfile& p, const SlowlyVaryingSpec& spec, double margin) {
    FormWeights w = chi_weights(ChiSpec::x_times_b(spec));
    w.integrand = [spec](const Atom& a) { return kernel_value(Kernel::b_over_one_minus(spec), a); };
    CriterionReport r = evaluate_forms(p, "b[" + spec.to_string() + "]", w, margin);
    return r;
}

CriterionReport criterion_lemma(const AtomicSpectralMeasure& m, const ChiSpec& chi, long long N) {
    return criterion_lemma(make_profile(m, N), chi);
}
CriterionReport criterion_sqrt(const AtomicSpectralMeasure& m, long long N) { return criterion_sqrt(make_profile(m, N)); }
CriterionReport criterion_log(const AtomicSpectralMeasure& m, long long N) { return criterion_log(make_profile(m, N)); }
CriterionReport criterion_b(const AtomicSpectralMeasure& m, const SlowlyVaryingSpec& spec, long long N) {
    return criterion_b(make_profile(m, N), spec);
}

AtomicSpectralMeasure canonical_measure(const std::string& name) {
    std::vector<Atom> atoms;
    if (name == "far") {
        atoms = {{0.0, 0.0, 1.0}, {1.0, -0.5, 0.5}, {0.5, 0.25, 0.25}};
    } else if (name == "super-dyadic") {
        for (int j = 1; j <= 40; ++j) atoms.push_back({1.0 - std::ldexp(1.0, -j), 0.0, std::ldexp(1.0, -2 * j)});
    } else if (name == "angular") {
        for (int k = 1; k <= 40; ++k) atoms.push_back({1.0, std::ldexp(1.0, -k), std::ldexp(1.0, -k) / std::pow(k, 5)});
    } else if (name == "atom-at-one") {
        atoms = {{1.0, 0.0, 0.25}, {0.0, 0.0, 0.5}, {1.0, -0.5, 0.25}};
    } else if (name == "dyadic") {
        for (int j = 1; j <= 40; ++j) atoms.push_back({1.0 - std::ldexp(1.0, -j), 0.0, std::ldexp(1.0, -j)});
    } else if (name == "slow-dyadic") {
        for (int k = 1; k <= 40; ++k) atoms.push_back({1.0 - std::ldexp(1.0, -k), 0.0, 1.0 / (double(k) * k)});
    } else {
        throw DomainError("unknown builtin measure '" + name + "'");
    }
    return AtomicSpectralMeasure(std::move(atoms));
}

std::vector<CanonicalMeasure> canonical_corpus() {
    const Verdict C = Verdict::converges;
    const Verdict D = Verdict::diverges;
    std::vector<CanonicalMeasure> out;
    auto add = [&](const std::string& name, Verdict lx, Verdict sq, Verdict lg, Verdict bl) {
        out.push_back({name, canonical_measure(name), {{"lemma-x", lx}, {"sqrt", sq}, {"log", lg}, {"b-log", bl}}});
    };
    add("far", C, C, C, C);
    add("super-dyadic", C, C, C, C);
    add("angular", C, C, C, C);
    add("atom-at-one", D, D, D, D);
    add("dyadic", D, D, C, D);
    add("slow-dyadic", D, D, D, D);
    return out;
}

AtomicSpectralMeasure random_measure(std::uint64_t seed, int atoms) {
    auto eng = make_engine(seed, 0x5eed);
    std::vector<Atom> out;
    std::set<std::pair<double, double>> seen;
    while (static_cast<int>(out.size()) < atoms) {
        Atom a;
        double kind = uniform01(eng);
        if (kind < 0.4) {
            a.r = uniform01(eng);
            a.theta = uniform01(eng) - 0.5;
        } else if (kind < 0.8) {
            a.r = 1.0 - std::pow(10.0, -4.0 * uniform01(eng));
            double s = uniform01(eng) < 0.5 ? -1.0 : 1.0;
            a.theta = s * std::pow(10.0, -4.0 * uniform01(eng)) * 0.5;
        } else {
            a.r = 1.0;
            a.theta = (uniform01(eng) - 0.5);
        }
        a.weight = -std::log1p(-uniform01(eng));
        a.theta = wrap_turns(a.theta);
        if (a.r == 0.0) a.theta = 0.0;
        if (std::abs(a.one_minus()) < 1e-4) continue;
        if (!seen.insert({a.r, a.theta}).second) continue;
        out.push_back(a);
    }
    return AtomicSpectralMeasure(std::move(out));
}

}  // namespace ergorate
