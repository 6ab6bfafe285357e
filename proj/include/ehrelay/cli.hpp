#pragma once

// Command-line front end. Settings come from built-in defaults, then an
// optional key=value config file, then flags; later sources win.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehrelay/experiments.hpp"

namespace ehrelay::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitGap = 4;

inline const std::vector<std::string> kSubcommands = {
    "solve", "sweep-beta", "compare-alloc", "sweep-epsilon", "monte-carlo", "verify"};

struct CliConfig {
  std::string command;
  std::string config_path;
  std::string out;                      ///< empty = stdout
  std::optional<OutputFormat> format;   ///< unset: text for solve/verify, csv otherwise
  std::vector<double> p_db;             ///< budgets in dB relative to N0
  std::optional<double> budget;         ///< linear budget; excludes p_db
  double eta = 0.5;
  double n0 = 1.0;
  std::optional<ChannelRealization> gains;
  std::optional<std::array<double, 3>> eps;  ///< per-link bounds for solve/verify
  std::array<bool, 3> known{false, false, false};
  std::vector<double> eps_grid;         ///< studies over epsilon
  std::vector<CsiCase> csi_cases;       ///< sweep-epsilon cases
  std::uint64_t seed = 1;
  int restarts = 5;
  std::optional<double> delta;          ///< unset: the library or study default
  int trials = 100;
  int grid = 50;                        ///< oracle points per axis (verify)
  int refinements = 3;                  ///< oracle zoom passes (verify)
  bool timing = false;                  ///< add wall-clock columns to result files

  bool operator==(const CliConfig&) const = default;
};

/// Flat key=value text, one setting per line; '#' starts a comment.
/// Unknown keys and malformed values raise ContractError.
void apply_config_text(CliConfig& cfg, const std::string& text);

/// Settings that differ from a default CliConfig, as config-file keys.
/// Feeding them back through apply_config_text reproduces `cfg`.
[[nodiscard]] std::map<std::string, std::string> config_echo(const CliConfig& cfg);
[[nodiscard]] std::string config_text(const CliConfig& cfg);

/// Parses argv into a CliConfig (reading --config if given). Throws
/// ContractError on conflicting or malformed settings.
[[nodiscard]] CliConfig parse_args(int argc, const char* const* argv);

/// Runs the command line and returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ehrelay::cli
