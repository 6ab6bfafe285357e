#pragma once

// Parameter studies built on the optimizer: beta sensitivity, optimal versus
// equal power allocation under CSI error, epsilon sweeps over CSI-knowledge
// patterns, and Monte-Carlo averaging over Rayleigh fading.
//
// Budgets are given in dB relative to the noise power: P = N0 * 10^(P_dB/10).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehrelay/core_model.hpp"
#include "ehrelay/sgp.hpp"

namespace ehrelay {

enum class ExperimentKind { BetaSweep, AllocCompare, EpsilonSweep, MonteCarlo };

[[nodiscard]] std::string to_string(ExperimentKind k);
[[nodiscard]] ExperimentKind experiment_kind_from_string(const std::string& s);

/// A named per-link known mask (link order 1, 2, J).
struct CsiCase {
  std::string label;
  std::array<bool, 3> known{false, false, false};

  bool operator==(const CsiCase&) const = default;
};

/// Masks written as three 0/1 characters, e.g. "001" = only hJ known.
[[nodiscard]] std::array<bool, 3> parse_known_mask(const std::string& s);
[[nodiscard]] std::string format_known_mask(const std::array<bool, 3>& m);

/// I: nothing known, II: hJ known, III: h1 and h2 known (only hJ imperfect).
[[nodiscard]] std::vector<CsiCase> default_csi_cases();

/// Unit-mean exponential power gains unless the means are overridden.
struct FadingSpec {
  double mean1 = 1.0;
  double mean2 = 1.0;
  double meanJ = 1.0;

  void validate() const;
};

inline constexpr ChannelRealization kBetaSweepChannel{0.6647, 2.9152, 1.3289};
inline constexpr ChannelRealization kEpsilonSweepChannel{1.2479, 1.4484, 6.0162};

struct ExperimentPlan {
  ExperimentKind kind = ExperimentKind::BetaSweep;
  std::vector<double> power_grid_db{10.0, 15.0, 20.0, 25.0, 30.0};
  std::vector<double> epsilon_grid{0.0};
  std::vector<CsiCase> csi_cases{{"I", {false, false, false}}};
  std::optional<ChannelRealization> channels;  ///< fixed gains; Monte Carlo draws when empty
  FadingSpec fading;
  int trials = 1;
  std::uint64_t seed = 1;
  double eta = 0.5;
  double N0 = 1.0;
  double T = 1.0;
  SgpConfig sgp;
  std::vector<double> fixed_betas{0.15, 0.85};  ///< beta sweep comparison points
  bool equal_optimize_beta = true;  ///< equal-split baseline searches beta; else uses equal_beta
  double equal_beta = 0.5;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  void validate() const;

  /// Defaults for each study.
  static ExperimentPlan beta_sweep();
  static ExperimentPlan alloc_compare();
  static ExperimentPlan epsilon_sweep();  ///< tighter SGP tolerance: jammer power is reported
  static ExperimentPlan monte_carlo(int trials, std::uint64_t seed);
};

struct ResultRow {
  std::string policy;  ///< "optimal", "equal", or "beta=<value>"
  double p_db = 0.0;
  double P = 0.0;
  double eps = 0.0;
  std::string csi_case;
  std::array<bool, 3> known{false, false, false};
  int trial = 0;
  ChannelRealization channel;
  double c_sum = 0.0;
  double P1 = 0.0;
  double P2 = 0.0;
  double PJ = 0.0;
  double beta = 0.0;
  double harvested_energy = 0.0;
  CaseId case_id = CaseId::IV;
  int iterations = 0;
  bool converged = true;
  bool ok = true;
  std::string error;
  double wall_seconds = 0.0;
};

struct SummaryRow {
  std::string policy;
  double p_db = 0.0;
  double eps = 0.0;
  std::string csi_case;
  int trials = 0;
  int failures = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
};

[[nodiscard]] std::vector<ResultRow> run_beta_sweep(const ExperimentPlan& plan);
[[nodiscard]] std::vector<ResultRow> run_alloc_compare(const ExperimentPlan& plan);
[[nodiscard]] std::vector<ResultRow> run_epsilon_sweep(const ExperimentPlan& plan);
[[nodiscard]] std::vector<ResultRow> run_monte_carlo(const ExperimentPlan& plan);
[[nodiscard]] std::vector<ResultRow> run_experiment(const ExperimentPlan& plan);

/// Mean and standard error of c_sum over successful trials, grouped by
/// (policy, P_dB, eps, csi_case).
[[nodiscard]] std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

/// Equal split with beta maximized by a coarse scan refined by golden-section search.
[[nodiscard]] Allocation best_equal_split(const ChannelRealization& ch, const SystemParams& sys,
                                          const std::optional<CsiErrorBounds>& err);

/// Smallest eps at which `reference`'s jammer power falls from above to below
/// the largest jammer power of the other cases (linear interpolation between
/// grid points). Rows must come from run_epsilon_sweep with a single P.
[[nodiscard]] std::optional<double> jammer_crossover(const std::vector<ResultRow>& rows,
                                                     const std::string& reference);

/// Values emitted with every result file.
struct OutputMetadata {
  std::string git_describe;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::string db_convention = "P = N0 * 10^(P_dB/10)";
};

enum class OutputFormat { Csv, Json };

[[nodiscard]] OutputFormat output_format_from_string(const std::string& s);

/// Locale-independent shortest round-trip formatting.
[[nodiscard]] std::string format_number(double v);

/// One header line plus one line per row; fields quoted per RFC 4180 when needed.
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool with_timing = false);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_json(std::ostream& os, const std::vector<ResultRow>& rows,
                const std::vector<SummaryRow>& summary, const OutputMetadata& meta,
                bool with_timing = false);

/// Library version string baked in at configure time.
[[nodiscard]] std::string build_describe();

}  // namespace ehrelay
