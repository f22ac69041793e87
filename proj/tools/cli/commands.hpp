#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "model_spec.hpp"

namespace ksym::cli {

using Json = nlohmann::ordered_json;

/// Flags shared by every subcommand.
struct Options {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::vector<std::string> tol;  // KEY=VAL
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

struct CommandResult {
  Json report;
  int exit_code = kExitPass;
};

/// Applies --seed, --samples and --tol overrides to a loaded model.
void apply_options(ModelSpec& spec, const Options& options);

Json to_json(const CheckReport& report);

CommandResult cmd_analyze(const ModelSpec& spec, const Options& options);
CommandResult cmd_solve(const ModelSpec& spec, const std::string& solution, const Options& options);
CommandResult cmd_noether(const ModelSpec& spec, const std::string& symmetry, const std::optional<std::string>& solution,
                          const std::optional<Side>& side, const Options& options);
CommandResult cmd_check_symmetry(const ModelSpec& spec, const std::string& symmetry,
                                 const std::optional<std::string>& solution, const Options& options);
CommandResult cmd_gauge(const ModelSpec& first, const ModelSpec& second, const Options& options);

/// Maps an exception escaping a command to the exit-code contract.
int exit_code_for(const std::exception& e);

/// Full command line entry point; reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ksym::cli
