#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ergorate/cli.hpp"
#include "ergorate/io.hpp"

namespace fs = std::filesystem;
using namespace ergorate;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "ergorate");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("coeffs writes three tables and a manifest") {
    TempDir t("ergorate-cli-coeffs");
    CHECK(run({"coeffs", "--b", "log", "--N", "4096", "--out", t / "c"}) == 0);
    for (const char* f : {"gamma.csv", "alpha.csv", "delta.csv", "manifest.json"}) CHECK(fs::exists(t / ("c/" + std::string(f))));
    auto m = nlohmann::json::parse(read_file(t / "c/manifest.json"));
    CHECK(m["command"] == "coeffs");
    CHECK(m["parameters"]["b"] == "log");
    CHECK(m["version"] == cli::kVersion);
}

TEST_CASE("usage errors exit with status 2") {
    TempDir t("ergorate-cli-usage");
    CHECK(run({"coeffs", "--b", "bogus", "--out", t / "a"}) == 2);
    CHECK(run({"coeffs", "--out", t / "b"}) == 2);
    CHECK(run({"criteria", "--measure", t / "missing.csv", "--out", t / "c"}) == 2);
    CHECK(run({"simulate", "rotation", "--n", "10", "--out", t / "d"}) == 2);  // no seed
    CHECK(run({"simulate", "rotation", "--n", "10", "--seed", "1", "--start", "1.5", "--out", t / "e"}) == 2);
    CHECK(run({"nonsense"}) == 2);
    CHECK(run({"coeffs", "--b", "const", "--N", "100", "--ceiling", "10", "--out", t / "f"}) == 2);
}

TEST_CASE("outputs are not overwritten without --force") {
    TempDir t("ergorate-cli-force");
    CHECK(run({"coeffs", "--b", "const", "--N", "64", "--out", t / "o"}) == 0);
    CHECK(run({"coeffs", "--b", "const", "--N", "64", "--out", t / "o"}) == 2);
    CHECK(run({"--force", "coeffs", "--b", "const", "--N", "64", "--out", t / "o"}) == 0);
}

TEST_CASE("criteria verdicts are data, not exit status") {
    TempDir t("ergorate-cli-criteria");
    CHECK(run({"criteria", "--measure", "dyadic", "--set", "sqrt", "--out", t / "d"}) == 0);
    auto j = nlohmann::json::parse(read_file(t / "d/criteria.json"));
    CHECK(j["reports"][0]["verdict"] == "diverges");

    CHECK(run({"criteria", "--model", "rotation:lmax=8", "--set", "normal-quenched", "--out", t / "r"}) == 0);
    auto k = nlohmann::json::parse(read_file(t / "r/criteria.json"));
    REQUIRE(k["reports"].size() == 2);
    CHECK(k["reports"][0]["criterion"] == "normalChain");
    CHECK(k["reports"][0]["verdict"] == "converges");
    CHECK(k["reports"][1]["criterion"] == "quenchedWu");
    CHECK(k["reports"][1]["verdict"] == "diverges");
}

TEST_CASE("measure CSV input") {
    TempDir t("ergorate-cli-csv");
    {
        std::ofstream f(t / "m.csv");
        f << "r,theta_turns,weight\n0.5,0,1\n";
    }
    CHECK(run({"criteria", "--measure", t / "m.csv", "--set", "sqrt,log", "--out", t / "ok"}) == 0);
    {
        std::ofstream f(t / "bad.csv");
        f << "r,theta_turns,weight\n0.5\n";
    }
    CHECK(run({"criteria", "--measure", t / "bad.csv", "--out", t / "bad"}) != 0);
}

TEST_CASE("config file supplies parameters, flags override it") {
    TempDir t("ergorate-cli-config");
    {
        std::ofstream f(t / "cfg.json");
        f << R"({"b": "const", "N": 32})";
    }
    CHECK(run({"--config", t / "cfg.json", "coeffs", "--N", "16", "--out", t / "o"}) == 0);
    auto m = nlohmann::json::parse(read_file(t / "o/manifest.json"));
    CHECK(m["parameters"]["b"] == "const");
    CHECK(m["parameters"]["N"] == "16");
    auto rows = read_csv(t / "o/gamma.csv").rows;
    CHECK(rows.size() == 17);
}

TEST_CASE("manifest re-run reproduces outputs bit for bit") {
    TempDir t("ergorate-cli-verify");
    CHECK(run({"simulate", "rotation", "--lmax", "7", "--n", "2000", "--reps", "20", "--seed", "7", "--start", "0.0",
               "--out", t / "s"}) == 0);
    CHECK(cli::verify_manifest(t / "s/manifest.json", 1).empty());
    CHECK(run({"verify", t / "s/manifest.json"}) == 0);
    // A tampered output is detected.
    {
        std::ofstream f(t / "s/batch.csv", std::ios::app);
        f << "x\n";
    }
    CHECK(run({"verify", t / "s/manifest.json"}) == 1);
}

TEST_CASE("approx and limits subcommands produce reports") {
    TempDir t("ergorate-cli-approx");
    CHECK(run({"approx", "wu", "--process", "lacunary:kmax=10", "--n-grid", "16..4096", "--out", t / "w"}) == 0);
    CHECK(read_csv(t / "w/remainder.csv").rows.size() == 9);
    CHECK(run({"approx", "resolvent", "--process", "lacunary:kmax=10", "--t", "0.5,0.999", "--out", t / "r"}) == 0);
    CHECK(run({"limits", "clt", "--model", "rotation:lmax=5", "--starts", "0,0.333", "--n", "1000", "--reps", "200",
               "--seed", "4", "--out", t / "c"}) == 0);
    auto j = nlohmann::json::parse(read_file(t / "c/clt.json"));
    CHECK(j["results"].size() == 2);
    CHECK(run({"limits", "clt", "--model", "rotation:lmax=5", "--process", "iid", "--seed", "1", "--out", t / "x"}) == 2);
}

}
