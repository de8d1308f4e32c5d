#pragma once

#include <filesystem>
#include <iosfwd>

#include "drt/cli/config.hpp"

namespace drt::cli {

inline constexpr const char* kToolkitVersion = "0.3.0";

// Each command writes into cfg.out and a manifest.json describing the run.
std::filesystem::path cmd_attack(const RunConfig& cfg, std::ostream& log);
std::filesystem::path cmd_profile(const RunConfig& cfg, std::ostream& log);
std::filesystem::path cmd_eval(const RunConfig& cfg, std::ostream& log);
std::filesystem::path cmd_sweep(const RunConfig& cfg, std::ostream& log);
std::filesystem::path cmd_train(const RunConfig& cfg, std::ostream& log);

// Entry point used by the drt binary. Exit codes: 0 success, 2 config
// error, 3 runtime failure.
int run_cli(int argc, char** argv);

}  // namespace drt::cli
