#include "ergorate/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ergorate/approx.hpp"
#include "ergorate/coeffs.hpp"
#include "ergorate/errors.hpp"
#include "ergorate/io.hpp"
#include "ergorate/mc.hpp"
#include "ergorate/models.hpp"
#include "ergorate/parallel.hpp"
#include "ergorate/spectral.hpp"

namespace fs = std::filesystem;

namespace ergorate::cli {

namespace {

struct Param {
    std::string name;
    std::string def;
    std::string help;
    bool required = false;
    bool positional = false;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Param> params;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> cmds = {
        {"coeffs",
         "gamma/alpha/delta (and optionally zygmund) coefficient tables and boundary checks",
         {{"b", "", "slowly varying family: const, log[:alpha=], loglog:alpha=,beta=, reclog:alpha=,beta=", true},
          {"N", "4096", "number of coefficients"},
          {"ceiling", "10000000", "largest N accepted"},
          {"tol", "1e-12", "tail tolerance for gamma"},
          {"alpha-N", "0", "alpha terms (0: min(N, 20000))"},
          {"beta", "", "Zygmund exponent in (0,1); writes zygmund.csv"},
          {"check-a1", "", "boundary path for the A(z) asymptotic, e.g. radial:1e-2..1e-5"},
          {"check-series", "", "boundary path for the sum b(n) z^n n^-beta asymptotic"}}},
        {"criteria",
         "convergence criteria as JSON reports (verdicts are data, exit status 0)",
         {{"measure", "", "builtin measure (far, super-dyadic, angular, atom-at-one, dyadic, slow-dyadic) or CSV path"},
          {"model", "", "Markov model, e.g. rotation:lmax=8[,coeffs=level][,spectrum]"},
          {"process", "", "linear process, e.g. lacunary:kmax=10"},
          {"rho", "", "rho-mixing bound, e.g. rho:a=2,tau=1"},
          {"set", "all", "criteria (comma list): lemma-x, lemma-log, sqrt, log, b, ZWC, WC, propC, quenchedWu, "
                         "quenchedMW, normalChain, normal-quenched, all"},
          {"N", "0", "truncation (0: default per source)"},
          {"b", "log", "slowly varying family for the b criterion"},
          {"delta", "1.5", "loglog exponent of the quenched conditions and lemma-log"},
          {"tau", "1", "loglog exponent of ZWC"},
          {"margin", "0.15", "slope margin of the verdict rule"}}},
        {"simulate",
         "seeded trajectory batches",
         {{"kind", "", "rotation or linear", true, true},
          {"lmax", "8", "rotation chain levels 3..lmax"},
          {"coeffs", "literal", "rotation coefficient convention: literal or level"},
          {"process", "lacunary:kmax=10", "linear process spec"},
          {"n", "", "trajectory length", true},
          {"reps", "1", "number of trajectories"},
          {"seed", "", "base seed", true},
          {"start", "stationary", "rotation start x0 in [0,1) or stationary"},
          {"grid", "", "n grid: a..b (dyadic) or a comma list; default dyadic up to n"}}},
        {"approx",
         "martingale approximations and remainder bounds",
         {{"method", "", "wu, normal, resolvent or bounds", true, true},
          {"process", "lacunary:kmax=10", "linear process spec (wu, resolvent)"},
          {"model", "rotation:lmax=7", "rotation model spec (normal, bounds)"},
          {"measure", "", "measure for bounds (builtin name or CSV); overrides model"},
          {"n-grid", "16..4096", "n values"},
          {"reps", "1000", "trajectories"},
          {"seed", "", "base seed (wu, normal); without it only exact columns are written"},
          {"t", "0.5,0.9,0.99,0.999", "resolvent t values"}}},
        {"limits",
         "CLT, LIL and rate diagnostics",
         {{"kind", "", "clt, lil, rate or series", true, true},
          {"model", "", "rotation model spec"},
          {"process", "", "linear process spec"},
          {"starts", "stationary", "clt starts: comma list of x0 values and/or stationary"},
          {"n", "10000", "clt trajectory length"},
          {"N", "1048576", "horizon for lil, rate and series"},
          {"reps", "5000", "trajectories"},
          {"seed", "", "base seed (clt, rate, series)"},
          {"seeds", "1,2,3,4,5", "lil seeds"},
          {"normalizer", "sqrtNLogLogN", "rate normalizer: sqrtN, sqrtNLogLogN, sqrtNbStar:<b>, sqrtNLog2LogLog:<beta>"},
          {"hypothesis", "inconclusive", "recorded verdict of the theorem's hypothesis (converges/diverges/inconclusive)"},
          {"ks-tol", "0.05", "KS acceptance distance"}}},
    };
    return cmds;
}

const Command& find_command(const std::string& name) {
    for (const auto& c : commands())
        if (c.name == name) return c;
    throw UsageError("unknown command '" + name + "'");
}

// Resolved string parameters of one run.
class Params {
public:
    Params(const Command& cmd, nlohmann::json values) : cmd_(&cmd), v_(std::move(values)) {}

    std::string str(const std::string& k) const {
        auto it = v_.find(k);
        return it == v_.end() ? std::string() : it->get<std::string>();
    }
    bool has(const std::string& k) const { return !str(k).empty(); }
    double num(const std::string& k) const {
        std::string s = str(k);
        try {
            std::size_t used = 0;
            double x = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return x;
        } catch (const std::exception&) {
            throw UsageError("--" + k + ": expected a number, got '" + s + "'");
        }
    }
    long long integer(const std::string& k) const {
        double x = num(k);
        if (x != std::floor(x) || std::fabs(x) > 9.0e18) throw UsageError("--" + k + ": expected an integer");
        return static_cast<long long>(x);
    }
    std::uint64_t seed(const std::string& k = "seed") const {
        if (!has(k)) throw UsageError("--" + k + " is required (no wall-clock seeding)");
        long long s = integer(k);
        if (s < 0) throw UsageError("--" + k + ": seeds are nonnegative");
        return static_cast<std::uint64_t>(s);
    }
    const nlohmann::json& json() const { return v_; }

private:
    const Command* cmd_;
    nlohmann::json v_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

template <class F>
auto parse_flag(const std::string& flag, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw UsageError("--" + flag + ": " + e.what());
    } catch (const RangeError& e) {
        throw UsageError("--" + flag + ": " + e.what());
    }
}

AtomicSpectralMeasure load_measure(const std::string& text) {
    static const std::vector<std::string> builtin = {"far",         "super-dyadic", "angular",
                                                     "atom-at-one", "dyadic",       "slow-dyadic"};
    if (std::find(builtin.begin(), builtin.end(), text) != builtin.end()) return canonical_measure(text);
    if (!fs::exists(text)) throw UsageError("--measure: no builtin measure or file named '" + text + "'");
    return AtomicSpectralMeasure::read_csv(text);
}

// Output collector: refuses to overwrite unless forced.
class Outputs {
public:
    Outputs(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {}
    std::string path(const std::string& name) {
        fs::path p = dir_ / name;
        if (fs::exists(p) && !force_) throw UsageError("refusing to overwrite " + p.string() + " (use --force)");
        files_.push_back(name);
        return p.string();
    }
    void json(const std::string& name, const nlohmann::json& j) {
        std::ofstream out(path(name));
        out << j.dump(2) << "\n";
        if (!out) throw std::runtime_error("cannot write " + name);
    }
    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    bool force_;
    std::vector<std::string> files_;
};

// --------------------------------------------------------------- commands

void cmd_coeffs(const Params& p, Outputs& out, int) {
    auto spec = parse_flag("b", [&] { return SlowlyVaryingSpec::parse(p.str("b")); });
    long long N = p.integer("N");
    if (N < 1) throw UsageError("--N must be >= 1");
    if (N > p.integer("ceiling")) throw UsageError("--N exceeds --ceiling");
    double tol = p.num("tol");
    if (!(tol > 0.0)) throw UsageError("--tol must be positive");
    long long aN = p.integer("alpha-N");
    if (aN <= 0) aN = std::min<long long>(N, 20000);
    if (aN > N) throw UsageError("--alpha-N exceeds --N");

    nlohmann::json summary = {{"b", spec.to_string()}, {"N", N}};
    std::optional<BoundaryPath> a1;
    if (p.has("check-a1")) a1 = parse_flag("check-a1", [&] { return BoundaryPath::parse(p.str("check-a1")); });
    long long gN = N;
    if (a1) gN = std::max(gN, gamma_length_for(*a1));
    auto gamma = gamma_seq(spec, gN, tol);
    auto alpha = alpha_seq(gamma, aN);
    auto delta = delta_seq(N);
    CoefficientSeq gOut = gamma;
    if (gN > N) {
        gOut.values.resize(static_cast<std::size_t>(N) + 1);
        gOut.prefixSums.resize(static_cast<std::size_t>(N) + 1);
    }
    write_coeff_csv(gOut, out.path("gamma.csv"));
    write_coeff_csv(alpha, out.path("alpha.csv"));
    write_coeff_csv(delta, out.path("delta.csv"));
    summary["gamma"] = {{"normalizer", gamma.normalizer},
                        {"normalizerError", gamma.normalizerError},
                        {"tailBound", gamma.tailBound},
                        {"cutoff", gamma.cutoff}};
    summary["alphaTerms"] = aN;
    summary["deltaTailBound"] = delta.tailBound;
    if (p.has("beta")) {
        double beta = p.num("beta");
        auto z = parse_flag("beta", [&] { return zygmund_seq(beta, N); });
        write_coeff_csv(z, out.path("zygmund.csv"));
        summary["beta"] = beta;
    }
    if (a1) {
        auto rows = check_prop_a1(gamma, alpha, spec, *a1);
        write_prop_a1_csv(rows, out.path("prop_a1.csv"));
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) arr.push_back({{"epsilon", r.epsilon}, {"ratioI", r.ratioI}, {"ratioII", r.ratioII}});
        summary["propA1"] = arr;
    }
    if (p.has("check-series")) {
        auto path = parse_flag("check-series", [&] { return BoundaryPath::parse(p.str("check-series")); });
        double beta = p.has("beta") ? p.num("beta") : 0.5;
        auto rows = parse_flag("check-series", [&] { return check_series_asymptotic(beta, spec, path, 0); });
        write_series_csv(rows, out.path("series.csv"));
    }
    out.json("coeffs.json", summary);
}

std::vector<std::string> expand_set(const std::string& s, bool measure) {
    std::vector<std::string> items = split(s, ',');
    std::vector<std::string> out;
    for (const auto& it : items) {
        if (it == "all") {
            if (measure) {
                for (const char* x : {"lemma-x", "lemma-log", "sqrt", "log", "b"}) out.push_back(x);
            } else {
                for (const char* x : {"ZWC", "WC", "propC", "quenchedWu", "quenchedMW", "normalChain"}) out.push_back(x);
            }
        } else if (it == "normal-quenched") {
            out.push_back("normalChain");
            out.push_back("quenchedWu");
        } else {
            out.push_back(it);
        }
    }
    return out;
}

// Series conditions concern the full chain: a rotation model here always
// carries the continuum of levels, with level coefficients unless overridden.
std::string criteria_model(std::string text) {
    if (text.find(':') == std::string::npos) text += ":";
    else text += ",";
    if (text.find("coeffs=") == std::string::npos) text += "coeffs=level,";
    if (text.find("spectrum") == std::string::npos) text += "spectrum,";
    text.pop_back();
    return text;
}

void cmd_criteria(const Params& p, Outputs& out, int) {
    int sources = p.has("measure") + p.has("model") + p.has("process") + p.has("rho");
    if (sources != 1) throw UsageError("give exactly one of --measure, --model, --process, --rho");
    const double margin = p.num("margin");
    nlohmann::json reports = nlohmann::json::array();
    if (p.has("measure")) {
        auto m = load_measure(p.str("measure"));
        long long N = p.integer("N");
        if (N == 0) N = 1LL << 16;
        if (N < 16) throw UsageError("--N must be >= 16");
        auto prof = make_profile(m, N);
        for (const auto& c : expand_set(p.str("set"), true)) {
            CriterionReport r;
            if (c == "lemma-x") r = criterion_lemma(prof, ChiSpec::identity(), margin);
            else if (c == "lemma-log") r = criterion_lemma(prof, ChiSpec::x_log_pow(p.num("delta")), margin);
            else if (c == "sqrt") r = criterion_sqrt(prof, margin);
            else if (c == "log") r = criterion_log(prof, margin);
            else if (c == "b") r = criterion_b(prof, parse_flag("b", [&] { return SlowlyVaryingSpec::parse(p.str("b")); }), margin);
            else throw UsageError("--set: '" + c + "' is not a measure criterion");
            nlohmann::json j;
            to_json(j, r);
            reports.push_back(j);
        }
    } else {
        ProcessSource src;
        if (p.has("model")) src = parse_flag("model", [&] { return FourierDiagonalModel::parse(criteria_model(p.str("model"))); });
        else if (p.has("process")) src = parse_flag("process", [&] { return LinearProcessSpec::parse(p.str("process")); });
        else src = parse_flag("rho", [&] { return RhoMixingSpec::parse(p.str("rho")); });
        const bool explicitSet = p.str("set") != "all";
        for (const auto& c : expand_set(p.str("set"), false)) {
            MwForm form = parse_flag("set", [&] { return parse_mw_form(c); });
            MwOptions opt;
            opt.N = p.integer("N");
            opt.tau = p.num("tau");
            opt.delta = form == MwForm::normalChain && p.str("set").find("normal-quenched") != std::string::npos
                            ? 0.0
                            : p.num("delta");
            opt.margin = margin;
            try {
                CriterionReport r = mw_condition_check(src, form, opt);
                nlohmann::json j;
                to_json(j, r);
                reports.push_back(j);
            } catch (const UnsupportedCombination& e) {
                if (explicitSet) throw UsageError(std::string("--set: ") + e.what());
                reports.push_back({{"criterion", c}, {"unsupported", e.what()}});
            }
        }
    }
    out.json("criteria.json", {{"reports", reports}});
}

std::optional<double> parse_start(const std::string& s) {
    if (s == "stationary") return std::nullopt;
    double x;
    try {
        std::size_t used = 0;
        x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw UsageError("--start: expected x0 in [0,1) or 'stationary', got '" + s + "'");
    }
    if (!(x >= 0.0 && x < 1.0)) throw UsageError("--start: x0 must lie in [0,1)");
    return x;
}

void cmd_simulate(const Params& p, Outputs& out, int threads) {
    long long n = p.integer("n"), reps = p.integer("reps");
    if (n < 1 || reps < 1) throw UsageError("--n and --reps must be >= 1");
    std::vector<long long> grid;
    if (p.has("grid")) grid = parse_flag("grid", [&] { return parse_grid(p.str("grid")); });
    TrajectoryBatch b;
    const std::string kind = p.str("kind");
    if (kind == "rotation") {
        std::string conv = p.str("coeffs");
        if (conv != "literal" && conv != "level") throw UsageError("--coeffs must be literal or level");
        auto model = parse_flag("lmax", [&] {
            return build_rotation_chain(static_cast<int>(p.integer("lmax")),
                                        conv == "level" ? CoefficientConvention::level : CoefficientConvention::literal);
        });
        b = simulate_rotation(model, n, parse_start(p.str("start")), p.seed(), reps, grid, threads);
    } else if (kind == "linear") {
        auto spec = parse_flag("process", [&] { return LinearProcessSpec::parse(p.str("process")); });
        b = parse_flag("grid", [&] { return simulate_linear(spec, n, p.seed(), reps, grid, threads); });
    } else {
        throw UsageError("simulate: kind must be rotation or linear");
    }
    b.write_csv(out.path("batch.csv"));
    out.json("batch.json", {{"source", b.source}, {"params", b.params}, {"n", b.n}, {"reps", b.reps}, {"grid", b.grid}});
}

void cmd_approx(const Params& p, Outputs& out, int threads) {
    const std::string method = p.str("method");
    std::vector<long long> grid = parse_flag("n-grid", [&] { return parse_grid(p.str("n-grid")); });
    // Without a seed only the exact columns are produced.
    const bool sampled = p.has("seed");
    if (method == "wu") {
        auto spec = parse_flag("process", [&] { return LinearProcessSpec::parse(p.str("process")); });
        auto rep = wu_bounds(spec, grid);
        nlohmann::json report = {{"bounds", nullptr}};
        if (sampled) {
            auto batch = simulate_linear(spec, grid.back(), p.seed(), p.integer("reps"), grid, threads);
            auto d = wu_decompose_linear(spec, batch, false, threads);
            attach_empirical(rep, d);
            report["decomposition"] = d.summary();
        }
        report["bounds"] = rep.to_json();
        rep.write_csv(out.path("remainder.csv"));
        out.json("report.json", report);
    } else if (method == "normal") {
        auto model = parse_flag("model", [&] { return FourierDiagonalModel::parse(p.str("model")); });
        auto measure = chain_measure(model);
        auto rep = remainder_bounds(measure, grid);
        nlohmann::json decs = nlohmann::json::array();
        for (auto& row : rep.rows) {
            double t = 1.0 - 1.0 / static_cast<double>(row.n);
            if (sampled) {
                auto batch =
                    simulate_rotation(model, row.n, std::nullopt, p.seed(), p.integer("reps"), {row.n}, threads);
                auto d = normal_chain_martingale(model, batch, t, false, threads);
                attach_empirical(rep, d);
                decs.push_back(d.summary());
            }
            row.exactRn2 = normal_chain_remainder_exact(model, t, row.n);
        }
        rep.write_csv(out.path("remainder.csv"));
        out.json("report.json", {{"bounds", rep.to_json()}, {"decompositions", decs}});
    } else if (method == "resolvent") {
        auto spec = parse_flag("process", [&] { return LinearProcessSpec::parse(p.str("process")); });
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& ts : split(p.str("t"), ',')) {
            double t = Params(find_command("approx"), {{"t", ts}}).num("t");
            auto r = parse_flag("t", [&] { return resolvent_gamma(spec, t); });
            rows.push_back({{"t", r.t}, {"exact", r.exact}, {"majorant", r.majorant},
                            {"majorantTail", r.majorantTail}, {"terms", r.terms}});
        }
        out.json("resolvent.json", {{"process", spec.to_json()}, {"rows", rows}});
    } else if (method == "bounds") {
        AtomicSpectralMeasure m = p.has("measure") ? load_measure(p.str("measure"))
                                                   : chain_measure(parse_flag("model", [&] {
                                                         return FourierDiagonalModel::parse(p.str("model"));
                                                     }));
        auto rep = remainder_bounds(m, grid);
        rep.write_csv(out.path("bounds.csv"));
        out.json("bounds.json", rep.to_json());
    } else {
        throw UsageError("approx: method must be wu, normal, resolvent or bounds");
    }
}

ProcessSource limits_source(const Params& p) {
    if (p.has("model") == p.has("process")) throw UsageError("give exactly one of --model, --process");
    if (p.has("model")) return parse_flag("model", [&] { return FourierDiagonalModel::parse(p.str("model")); });
    return parse_flag("process", [&] { return LinearProcessSpec::parse(p.str("process")); });
}

Verdict parse_verdict(const std::string& s) {
    for (Verdict v : {Verdict::converges, Verdict::diverges, Verdict::inconclusive})
        if (s == to_string(v)) return v;
    throw UsageError("--hypothesis must be converges, diverges or inconclusive");
}

void cmd_limits(const Params& p, Outputs& out, int threads) {
    const std::string kind = p.str("kind");
    auto src = limits_source(p);
    if (kind == "clt") {
        long long n = p.integer("n"), reps = p.integer("reps");
        if (reps < 100) throw UsageError("--reps must be >= 100 for the CLT test");
        double ref = std::holds_alternative<LinearProcessSpec>(src) ? sigma_sq_exact(std::get<LinearProcessSpec>(src))
                                                                    : sigma_sq_exact(std::get<FourierDiagonalModel>(src));
        nlohmann::json results = nlohmann::json::array();
        for (const auto& s : split(p.str("starts"), ',')) {
            auto x0 = parse_start(s);
            auto batch = simulate_source(src, n, x0, p.seed(), reps, {n}, threads);
            results.push_back(clt_from_batch(batch, ref, p.num("ks-tol"), x0 ? fmt(*x0) : "stationary").to_json());
        }
        out.json("clt.json", {{"results", results}});
    } else if (kind == "lil") {
        std::vector<std::uint64_t> seeds;
        for (const auto& s : split(p.str("seeds"), ',')) seeds.push_back(Params(find_command("limits"), {{"seed", s}}).seed());
        auto r = lil_diagnostic(src, p.integer("N"), seeds, threads);
        out.json("lil.json", r.to_json());
    } else if (kind == "rate") {
        auto norm = parse_flag("normalizer", [&] { return Normalizer::parse(p.str("normalizer")); });
        long long N = p.integer("N");
        auto batch = simulate_source(src, N, std::nullopt, p.seed(), p.integer("reps"), {}, threads);
        auto r = rate_check(batch, norm, parse_verdict(p.str("hypothesis")));
        r.write_csv(out.path("rate.csv"));
        out.json("rate.json", r.to_json());
    } else if (kind == "series") {
        auto r = series_sqrt_check(src, p.integer("N"), p.integer("reps"), p.seed(), parse_verdict(p.str("hypothesis")),
                                   threads);
        out.json("series.json", r.to_json());
    } else {
        throw UsageError("limits: kind must be clt, lil, rate or series");
    }
}

using Runner = std::function<void(const Params&, Outputs&, int)>;

Runner runner(const std::string& name) {
    static const std::map<std::string, Runner> table = {{"coeffs", cmd_coeffs},
                                                        {"criteria", cmd_criteria},
                                                        {"simulate", cmd_simulate},
                                                        {"approx", cmd_approx},
                                                        {"limits", cmd_limits}};
    auto it = table.find(name);
    if (it == table.end()) throw UsageError("unknown command '" + name + "'");
    return it->second;
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string default_out_dir() {
    const char* env = std::getenv("ERGORATE_OUT");
    return env && *env ? env : "out";
}

}  // namespace

nlohmann::json run_command(const std::string& command, const nlohmann::json& params, const std::string& outDir,
                           int threads, bool force) {
    const Command& cmd = find_command(command);
    for (const auto& prm : cmd.params)
        if (prm.required && (!params.contains(prm.name) || params[prm.name].get<std::string>().empty()))
            throw UsageError(command + ": --" + prm.name + " is required");
    fs::path dir(outDir);
    fs::create_directories(dir);
    if (fs::exists(dir / "manifest.json") && !force)
        throw UsageError("refusing to overwrite " + (dir / "manifest.json").string() + " (use --force)");
    Params p(cmd, params);
    Outputs out(dir, force);
    runner(command)(p, out, threads);

    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : out.files()) {
        std::string content = read_file((dir / f).string());
        files.push_back({{"path", f}, {"fnv1a64", hex64(fnv1a64(content))}, {"bytes", content.size()}});
    }
    nlohmann::json manifest = {{"command", command},
                               {"parameters", params},
                               {"parameterHash", hex64(fnv1a64(params.dump()))},
                               {"seed", params.contains("seed") ? params["seed"] : nlohmann::json("")},
                               {"version", kVersion},
                               {"timestamp", timestamp()},
                               {"outputs", files}};
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
    if (!mf) throw std::runtime_error("cannot write manifest");
    return manifest;
}

std::vector<std::string> verify_manifest(const std::string& manifestPath, int threads) {
    if (!fs::exists(manifestPath)) throw UsageError("no manifest at " + manifestPath);
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_file(manifestPath));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed manifest: ") + e.what());
    }
    fs::path scratch = fs::temp_directory_path() /
                       ("ergorate-verify-" + hex64(fnv1a64(manifestPath + timestamp() + std::to_string(std::rand()))));
    fs::create_directories(scratch);
    run_command(m.at("command").get<std::string>(), m.at("parameters"), scratch.string(), threads, true);
    fs::path orig = fs::path(manifestPath).parent_path();
    std::vector<std::string> bad;
    for (const auto& f : m.at("outputs")) {
        std::string name = f.at("path").get<std::string>();
        std::string fresh = read_file((scratch / name).string());
        if (hex64(fnv1a64(fresh)) != f.at("fnv1a64").get<std::string>()) {
            bad.push_back(name);
            continue;
        }
        fs::path old = orig / name;
        if (fs::exists(old) && read_file(old.string()) != fresh) bad.push_back(name);
    }
    fs::remove_all(scratch);
    return bad;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"ergorate: rates in ergodic theorems, numerically"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);
    std::string config, outDir = default_out_dir();
    int threads = default_threads();
    bool force = false;
    app.add_option("--config", config, "JSON file of parameters; flags override it");
    app.add_option("--out", outDir, "output directory (default $ERGORATE_OUT or ./out)");
    app.add_option("--threads", threads, "worker threads for rep-parallel stages");
    app.add_flag("--force", force, "overwrite existing outputs");

    std::map<std::string, std::map<std::string, std::string>> store;
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : commands()) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        subs[c.name] = sub;
        for (const auto& prm : c.params) {
            auto& slot = store[c.name][prm.name];
            std::string help = prm.help + (prm.def.empty() ? "" : " [" + prm.def + "]");
            if (prm.positional) sub->add_option(prm.name, slot, help);
            else sub->add_option("--" + prm.name, slot, help);
        }
    }
    CLI::App* verify = app.add_subcommand("verify", "re-run a manifest and diff its outputs");
    std::string manifestPath;
    verify->add_option("manifest", manifestPath, "path to manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) {
            auto bad = verify_manifest(manifestPath, threads);
            for (const auto& b : bad) std::cerr << "mismatch: " << b << "\n";
            if (bad.empty()) std::cout << "verified: all outputs identical\n";
            return bad.empty() ? 0 : 1;
        }
        nlohmann::json cfg = nlohmann::json::object();
        if (!config.empty()) {
            if (!fs::exists(config)) throw UsageError("--config: no file '" + config + "'");
            try {
                cfg = nlohmann::json::parse(read_file(config));
            } catch (const nlohmann::json::exception& e) {
                throw UsageError(std::string("--config: ") + e.what());
            }
        }
        for (const auto& c : commands()) {
            CLI::App* sub = subs[c.name];
            if (!sub->parsed()) continue;
            nlohmann::json params = nlohmann::json::object();
            for (const auto& prm : c.params) {
                std::string opt = prm.positional ? prm.name : "--" + prm.name;
                std::string v = prm.def;
                if (cfg.contains(prm.name)) {
                    const auto& x = cfg[prm.name];
                    v = x.is_string() ? x.get<std::string>() : x.dump();
                }
                if (sub->count(opt) > 0) v = store[c.name][prm.name];
                if (prm.required && v.empty()) throw UsageError(c.name + ": " + opt + " is required");
                params[prm.name] = v;
            }
            auto manifest = run_command(c.name, params, outDir, threads, force);
            std::cout << (fs::path(outDir) / "manifest.json").string() << "\n";
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace ergorate::cli
