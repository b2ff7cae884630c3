#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ergorate::cli {

inline constexpr const char* kVersion = "0.1.0";

// Bad flags, missing inputs, refused overwrites: exit status 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runs one subcommand from fully resolved parameters, writes its outputs and
// manifest.json into outDir and returns the manifest.
nlohmann::json run_command(const std::string& command, const nlohmann::json& params, const std::string& outDir,
                           int threads, bool force);

// Re-runs the command recorded in a manifest into a scratch directory and
// compares every output byte for byte. Returns the mismatching file names.
std::vector<std::string> verify_manifest(const std::string& manifestPath, int threads);

// Full command line entry point; returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace ergorate::cli
