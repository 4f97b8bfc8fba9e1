#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rshape/agents.hpp"
#include "rshape/core.hpp"
#include "rshape/environments.hpp"
#include "rshape/shaping.hpp"
#include "rshape/stats.hpp"
#include "rshape/subgoal.hpp"

namespace rshape {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct AgentConfig {
  enum class Kind { sarsa, actor_critic };
  Kind kind = Kind::sarsa;
  double alpha = 0.01;
  double gamma = 0.99;
  double temperature = 1.0;
  double explore_prob = 0.1;
  int fourier_order = 3;
  bool scaled_rates = true;
};

enum class ShapingMethod { baseline, hrs, rrs, nrs, static_agg };

struct ShapingConfig {
  std::string label;
  ShapingMethod method = ShapingMethod::baseline;
  double eta = 1.0;
  /// One entry per subgoal pattern; each seed runs every pattern.
  std::vector<SubgoalSeries> series;
  std::size_t random_count = 2;
  bool terminal_update = true;
  bool pre_update_potential = false;
  bool absorbing_terminal = true;
  bool terminal_update_final_only = true;
  std::optional<double> alpha_v;  // abstract-value learning rate; defaults to the agent's
};

struct RunConfig {
  MapDocument map;
  AgentConfig agent;
  std::vector<ShapingConfig> methods;
  int episodes = 1000;
  std::vector<std::uint64_t> seeds;
  std::vector<double> thresholds;
  int smoothing_window = 1;
  int asymptotic_tail = 10;
};

/// Directory holding the shipped maps and series (RSHAPE_DATA_DIR overrides).
std::filesystem::path default_data_dir();

/// Parses a run-config document. Relative paths resolve against `base_dir`,
/// then the data directory. Throws ConfigError / LoadError.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

std::string_view to_string(ShapingMethod method);

/// "fourrooms", "pinball" or a path to a map document.
MapDocument resolve_environment(const std::string& env_or_path);

/// Parses and validates a subgoal series document against `map`. Parse
/// failures are reported as issues too.
std::vector<ValidationIssue> check_series_document(const nlohmann::json& doc, const MapDocument& map);

/// A subgoal series in a run config failed validation against the map.
struct SeriesValidationError : ConfigError {
  explicit SeriesValidationError(std::vector<ValidationIssue> issues);
  std::vector<ValidationIssue> issues;
};

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct EpisodeStats {
  int steps = 0;
  double total_reward = 0.0;
  bool terminal = false;
};

/// Runs one episode to termination or truncation. When `record` is given the
/// transitions are appended to it.
EpisodeStats run_episode(Environment& env, Agent& agent, RewardTransformer& shaper, RunStreams& streams,
                         Trajectory* record = nullptr);

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const MapDocument& map);
std::unique_ptr<RewardTransformer> make_shaper(const ShapingConfig& config, std::size_t series_index,
                                               const AgentConfig& agent, const MapDocument& map);

/// One (method, subgoal pattern, seed) learning.
struct RunSpec {
  std::size_t method = 0;
  std::size_t series = 0;
  std::uint64_t seed = 0;
};

struct RunResult {
  std::string method;  // "label" or "label/pattern" for multi-pattern methods
  std::uint64_t seed = 0;
  std::vector<double> steps;
  std::vector<double> returns;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

std::vector<RunSpec> plan_battery(const RunConfig& config);
std::string sample_label(const RunConfig& config, const RunSpec& spec);
RunResult run_single(const RunConfig& config, const RunSpec& spec);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Every planned run, ordered by (method, pattern, seed). Runs execute on up
/// to `workers` threads; a failing run is reported in its result and the
/// battery continues.
std::vector<RunResult> run_battery(const RunConfig& config, int workers = 1, const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Trailing moving average; the first window-1 entries average the available
/// prefix.
std::vector<double> smooth(std::span<const double> series, int window);

struct ThresholdHit {
  int episode = 0;  // 1-based; episodes + 1 when censored
  bool censored = false;
};
ThresholdHit time_to_threshold(std::span<const double> series, double threshold);

double asymptotic_performance(std::span<const double> series, int tail = 10);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  int n = 0;
  int censored = 0;
};

struct Comparison {
  std::string first;
  std::string second;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double p_adjusted = 1.0;
  bool degenerate = false;
};

struct MetricBlock {
  std::string name;  // "ttt@<threshold>" or "asymptotic"
  std::vector<std::string> methods;
  std::vector<Summary> summaries;
  stats::AnovaResult anova;
  std::vector<Comparison> comparisons;
  bool degenerate = false;
};

struct MetricsReport {
  std::vector<MetricBlock> blocks;           // grouped by method label
  std::vector<MetricBlock> pattern_blocks;   // grouped by method/pattern (empty if no patterns)
  bool degenerate() const;
};

/// Groups a value per run by method and compares them.
MetricBlock compare_methods(const std::string& name, const std::vector<std::string>& methods,
                            const std::vector<std::vector<double>>& samples);

MetricsReport compute_report(const std::vector<RunResult>& results, std::span<const double> thresholds,
                             int smoothing_window, int asymptotic_tail);

nlohmann::json report_to_json(const MetricsReport& report);
/// Plain-text table, one row per metric, "Mean (S.D.)" per method.
std::string format_table(const MetricsReport& report);

struct Curve {
  std::string method;
  std::vector<double> mean;
  std::vector<double> se;
};
/// Per-method mean and standard error of (smoothed) steps per episode.
std::vector<Curve> learning_curves(const std::vector<RunResult>& results, int smoothing_window);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// CSV with header method,seed,episode,steps,return.
void write_results_csv(std::ostream& out, const std::vector<RunResult>& results);
std::vector<RunResult> read_results_csv(std::istream& in);

std::string method_group(const std::string& label);

}  // namespace rshape
