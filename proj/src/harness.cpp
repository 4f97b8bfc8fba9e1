#include "rshape/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef RSHAPE_DATA_DIR
#define RSHAPE_DATA_DIR "data"
#endif

namespace rshape {

using nlohmann::json;

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("RSHAPE_DATA_DIR"); env && *env) return env;
  return RSHAPE_DATA_DIR;
}

std::string_view to_string(ShapingMethod method) {
  switch (method) {
    case ShapingMethod::baseline: return "baseline";
    case ShapingMethod::hrs: return "hrs";
    case ShapingMethod::rrs: return "rrs";
    case ShapingMethod::nrs: return "nrs";
    default: return "static_agg";
  }
}

namespace {

void reject_unknown(const json& doc, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, _] : doc.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + "/" + key + ": unknown key");
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback, const std::string& where) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "/" + key + ": wrong type");
  }
}

std::filesystem::path resolve(const std::string& name, const std::filesystem::path& base_dir) {
  const std::filesystem::path p(name);
  if (p.is_absolute()) return p;
  if (!base_dir.empty() && std::filesystem::exists(base_dir / p)) return base_dir / p;
  if (std::filesystem::exists(p)) return p;
  return default_data_dir() / p;
}

MapDocument resolve_map(const json& doc, const std::filesystem::path& base_dir) {
  if (doc.contains("map")) {
    const json& m = doc.at("map");
    if (m.is_object()) return parse_map(m);
    if (m.is_string()) return load_map(resolve(m.get<std::string>(), base_dir));
    throw ConfigError("/map: expected a map document or a path");
  }
  const std::string env = get_or<std::string>(doc, "env", "", "");
  if (env == "fourrooms") return load_map(default_data_dir() / "maps" / "fourrooms.json");
  if (env == "pinball") return load_map(default_data_dir() / "maps" / "pinball.json");
  throw ConfigError("/env: expected fourrooms or pinball (or give /map)");
}

AgentConfig parse_agent(const json& doc, const MapDocument& map) {
  AgentConfig a;
  const bool grid = std::holds_alternative<GridMap>(map);
  a.kind = grid ? AgentConfig::Kind::sarsa : AgentConfig::Kind::actor_critic;
  if (!doc.is_object()) throw ConfigError("/agent: expected an object");
  reject_unknown(doc, {"agent", "alpha", "gamma", "temperature", "explore_prob", "fourier_order", "scaled_rates"},
                 "/agent");
  if (doc.contains("agent")) {
    const std::string kind = get_or<std::string>(doc, "agent", "", "/agent");
    if (kind == "sarsa") a.kind = AgentConfig::Kind::sarsa;
    else if (kind == "actor_critic") a.kind = AgentConfig::Kind::actor_critic;
    else throw ConfigError("/agent/agent: expected sarsa or actor_critic");
  }
  a.alpha = get_or(doc, "alpha", a.alpha, "/agent");
  a.gamma = get_or(doc, "gamma", a.gamma, "/agent");
  a.temperature = get_or(doc, "temperature", a.temperature, "/agent");
  a.explore_prob = get_or(doc, "explore_prob", a.explore_prob, "/agent");
  a.fourier_order = get_or(doc, "fourier_order", a.fourier_order, "/agent");
  a.scaled_rates = get_or(doc, "scaled_rates", a.scaled_rates, "/agent");
  if (!(a.alpha > 0.0)) throw ConfigError("/agent/alpha: must be positive");
  if (!(a.gamma > 0.0 && a.gamma <= 1.0)) throw ConfigError("/agent/gamma: must be in (0, 1]");
  if (!(a.temperature > 0.0)) throw ConfigError("/agent/temperature: must be positive");
  if (!(a.explore_prob >= 0.0 && a.explore_prob <= 1.0)) throw ConfigError("/agent/explore_prob: must be in [0, 1]");
  if (a.fourier_order < 0) throw ConfigError("/agent/fourier_order: must be non-negative");
  if ((a.kind == AgentConfig::Kind::sarsa) != grid)
    throw ConfigError("/agent/agent: sarsa needs the grid map, actor_critic the pinball map");
  return a;
}

SubgoalSeries checked_series(SubgoalSeries series, const MapDocument& map, const std::string& where) {
  const auto issues = validate_series(series, map);
  if (!issues.empty()) {
    std::vector<ValidationIssue> located;
    for (const auto& i : issues) located.push_back({where + i.field, i.message});
    throw SeriesValidationError(std::move(located));
  }
  return series;
}

std::vector<SubgoalSeries> parse_series_field(const json& v, const MapDocument& map,
                                              const std::filesystem::path& base_dir, const std::string& where) {
  std::vector<SubgoalSeries> out;
  auto one = [&](const json& item, const std::string& at) {
    try {
      if (item.is_string()) return checked_series(load_series(resolve(item.get<std::string>(), base_dir)), map, at);
      return checked_series(parse_series(item), map, at);
    } catch (const SeriesValidationError&) {
      throw;
    } catch (const ConfigError& e) {
      throw SeriesValidationError({{at, e.what()}});
    }
  };
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(one(v[i], where + "/" + std::to_string(i)));
  } else {
    out.push_back(one(v, where));
  }
  if (out.empty()) throw ConfigError(where + ": at least one subgoal series is required");
  return out;
}

ShapingConfig parse_shaping(const json& doc, const MapDocument& map, const std::filesystem::path& base_dir,
                            const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  reject_unknown(doc,
                 {"label", "method", "eta", "subgoal_series", "random_count", "series_count", "series_seed",
                  "terminal_update", "pre_update_potential", "absorbing_terminal", "terminal_update_final_only", "alpha_v"},
                 where);
  ShapingConfig s;
  const std::string method = get_or<std::string>(doc, "method", "baseline", where);
  if (method == "baseline") s.method = ShapingMethod::baseline;
  else if (method == "hrs") s.method = ShapingMethod::hrs;
  else if (method == "rrs") s.method = ShapingMethod::rrs;
  else if (method == "nrs") s.method = ShapingMethod::nrs;
  else if (method == "static_agg") s.method = ShapingMethod::static_agg;
  else throw ConfigError(where + "/method: expected baseline, hrs, rrs, nrs or static_agg");
  s.label = get_or<std::string>(doc, "label", method, where);
  if (s.label.empty() || s.label.find_first_of(",/\n\"") != std::string::npos)
    throw ConfigError(where + "/label: must be non-empty without , / \" or newlines");
  s.eta = get_or(doc, "eta", std::holds_alternative<GridMap>(map) ? 1.0 : kPinballGoalReward, where);
  s.random_count = get_or<std::size_t>(doc, "random_count", 2, where);
  s.terminal_update = get_or(doc, "terminal_update", true, where);
  s.pre_update_potential = get_or(doc, "pre_update_potential", false, where);
  s.absorbing_terminal = get_or(doc, "absorbing_terminal", true, where);
  s.terminal_update_final_only = get_or(doc, "terminal_update_final_only", true, where);
  if (doc.contains("alpha_v")) {
    s.alpha_v = get_or(doc, "alpha_v", 0.0, where);
    if (!(*s.alpha_v > 0.0 && *s.alpha_v <= 1.0)) throw ConfigError(where + "/alpha_v: must be in (0, 1]");
  }

  const bool wants_random = s.method == ShapingMethod::rrs &&
                            (!doc.contains("subgoal_series") || doc.at("subgoal_series") == "random");
  if (wants_random) {
    const auto count = get_or<std::size_t>(doc, "series_count", 1, where);
    const auto base = get_or<std::uint64_t>(doc, "series_seed", 0, where);
    if (count < 1) throw ConfigError(where + "/series_count: must be at least 1");
    for (std::size_t p = 0; p < count; ++p) s.series.push_back(random_series(map, s.random_count, base + p));
  } else if (s.method == ShapingMethod::hrs || s.method == ShapingMethod::nrs || s.method == ShapingMethod::rrs) {
    if (!doc.contains("subgoal_series")) throw ConfigError(where + "/subgoal_series: required for " + method);
    s.series = parse_series_field(doc.at("subgoal_series"), map, base_dir, where + "/subgoal_series");
  }
  if (s.method == ShapingMethod::static_agg && !std::holds_alternative<GridMap>(map))
    throw ConfigError(where + "/method: static_agg needs a grid map");
  return s;
}

}  // namespace

SeriesValidationError::SeriesValidationError(std::vector<ValidationIssue> issues_)
    : ConfigError([&] {
        std::string msg = "invalid subgoal series";
        for (const auto& i : issues_) msg += "; " + i.field + ": " + i.message;
        return msg;
      }()),
      issues(std::move(issues_)) {}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
  reject_unknown(doc,
                 {"env", "map", "agent", "methods", "shaping", "episodes", "seeds", "thresholds", "smoothing_window",
                  "asymptotic_tail"},
                 "");
  RunConfig c{resolve_map(doc, base_dir), {}, {}, 1000, {}, {}, 1, 10};
  const bool grid = std::holds_alternative<GridMap>(c.map);
  c.agent = parse_agent(doc.contains("agent") ? doc.at("agent") : json::object(), c.map);

  if (doc.contains("methods")) {
    const json& m = doc.at("methods");
    if (!m.is_array() || m.empty()) throw ConfigError("/methods: expected a non-empty array");
    for (std::size_t i = 0; i < m.size(); ++i)
      c.methods.push_back(parse_shaping(m[i], c.map, base_dir, "/methods/" + std::to_string(i)));
  } else if (doc.contains("shaping")) {
    c.methods.push_back(parse_shaping(doc.at("shaping"), c.map, base_dir, "/shaping"));
  } else {
    c.methods.push_back(parse_shaping(json{{"method", "baseline"}}, c.map, base_dir, "/shaping"));
  }
  for (std::size_t i = 0; i < c.methods.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (c.methods[i].label == c.methods[j].label)
        throw ConfigError("/methods/" + std::to_string(i) + "/label: duplicate label " + c.methods[i].label);

  c.episodes = get_or(doc, "episodes", grid ? 1000 : 200, "");
  if (c.episodes < 1) throw ConfigError("/episodes: must be at least 1");

  if (!doc.contains("seeds")) throw ConfigError("/seeds: required");
  const json& seeds = doc.at("seeds");
  if (seeds.is_array()) {
    for (const auto& s : seeds) {
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
        throw ConfigError("/seeds: expected non-negative integers");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (seeds.is_object()) {
    reject_unknown(seeds, {"first", "count"}, "/seeds");
    const auto first = get_or<std::uint64_t>(seeds, "first", 0, "/seeds");
    const auto count = get_or<std::uint64_t>(seeds, "count", 0, "/seeds");
    for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
  } else {
    throw ConfigError("/seeds: expected an array or {first, count}");
  }
  if (c.seeds.empty()) throw ConfigError("/seeds: must not be empty");

  c.thresholds = get_or(doc, "thresholds",
                        grid ? std::vector<double>{500, 300, 100, 50} : std::vector<double>{3000, 2000, 1000, 500}, "");
  for (const double t : c.thresholds)
    if (!(t > 0.0)) throw ConfigError("/thresholds: must be positive");
  c.smoothing_window = get_or(doc, "smoothing_window", grid ? 1 : 10, "");
  if (c.smoothing_window < 1) throw ConfigError("/smoothing_window: must be at least 1");
  c.asymptotic_tail = get_or(doc, "asymptotic_tail", 10, "");
  if (c.asymptotic_tail < 1 || c.asymptotic_tail > c.episodes)
    throw ConfigError("/asymptotic_tail: must be in [1, episodes]");
  return c;
}

MapDocument resolve_environment(const std::string& env_or_path) {
  if (env_or_path == "fourrooms" || env_or_path == "pinball")
    return load_map(default_data_dir() / "maps" / (env_or_path + ".json"));
  return load_map(resolve(env_or_path, {}));
}

std::vector<ValidationIssue> check_series_document(const json& doc, const MapDocument& map) {
  try {
    return validate_series(parse_series(doc), map);
  } catch (const LoadError& e) {
    return {{e.where, e.what()}};
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (!msg.empty() && msg.front() == '/' && colon != std::string::npos)
      return {{msg.substr(0, colon), msg.substr(colon + 2)}};
    return {{"", msg}};
  } catch (const UsageError& e) {
    return {{"", e.what()}};
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open run config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

EpisodeStats run_episode(Environment& env, Agent& agent, RewardTransformer& shaper, RunStreams& streams,
                         Trajectory* record) {
  EnvState state = env.reset(streams.environment());
  shaper.begin_episode(state);
  ActionId action = agent.start(state, streams.policy);
  EpisodeStats stats;
  while (true) {
    const StepOutcome out = env.step(action);
    const Transition transition{state, action, out.reward, out.next_state, out.terminal, out.truncated};
    const double shaping = shaper.shape(transition);
    const ActionId next =
        agent.observe(state, action, out.reward, shaping, out.next_state, out.terminal, out.truncated, streams.policy);
    if (record) record->steps.push_back(transition);
    ++stats.steps;
    stats.total_reward += out.reward;
    if (out.terminal || out.truncated) {
      stats.terminal = out.terminal;
      break;
    }
    state = out.next_state;
    action = next;
  }
  shaper.end_episode();
  return stats;
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const MapDocument& map) {
  if (config.kind == AgentConfig::Kind::sarsa) {
    const auto* grid = std::get_if<GridMap>(&map);
    if (!grid) throw ConfigError("sarsa agent needs a grid map");
    return std::make_unique<SarsaAgent>(grid->cell_count(), kGridActionCount, config.alpha, config.gamma,
                                        config.temperature);
  }
  if (!std::holds_alternative<PinballMap>(map)) throw ConfigError("actor_critic agent needs a pinball map");
  return std::make_unique<ActorCriticAgent>(config.fourier_order, kPinballActionCount, config.alpha, config.gamma,
                                            config.temperature, config.explore_prob, config.scaled_rates);
}

std::unique_ptr<RewardTransformer> make_shaper(const ShapingConfig& config, std::size_t series_index,
                                               const AgentConfig& agent, const MapDocument& map) {
  switch (config.method) {
    case ShapingMethod::baseline: return std::make_unique<IdentityTransformer>();
    case ShapingMethod::hrs:
    case ShapingMethod::rrs: {
      DynamicShapingOptions options;
      options.gamma = agent.gamma;
      options.terminal_update = config.terminal_update;
      options.pre_update_potential = config.pre_update_potential;
      options.absorbing_terminal = config.absorbing_terminal;
      options.terminal_update_final_only = config.terminal_update_final_only;
      return std::make_unique<SubgoalShaper>(config.series.at(series_index), config.alpha_v.value_or(agent.alpha),
                                             agent.gamma, options);
    }
    case ShapingMethod::nrs: {
      NrsPotential potential{config.eta, config.series.at(series_index).subgoals()};
      return std::make_unique<StaticPotentialShaper>(std::move(potential), agent.gamma);
    }
    case ShapingMethod::static_agg: {
      const auto* grid = std::get_if<GridMap>(&map);
      if (!grid) throw ConfigError("static_agg needs a grid map");
      return std::make_unique<StaticAggregationShaper>(room_labels(*grid), config.alpha_v.value_or(agent.alpha),
                                                       agent.gamma, agent.gamma,
                                                       config.terminal_update);
    }
  }
  throw ConfigError("unknown shaping method");
}

std::vector<RunSpec> plan_battery(const RunConfig& config) {
  std::vector<RunSpec> plan;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const std::size_t patterns = std::max<std::size_t>(1, config.methods[m].series.size());
    for (std::size_t p = 0; p < patterns; ++p)
      for (const auto seed : config.seeds) plan.push_back({m, p, seed});
  }
  return plan;
}

std::string sample_label(const RunConfig& config, const RunSpec& spec) {
  const auto& method = config.methods.at(spec.method);
  if (method.series.size() > 1) return method.label + "/" + std::to_string(spec.series);
  return method.label;
}

RunResult run_single(const RunConfig& config, const RunSpec& spec) {
  RunResult result;
  result.method = sample_label(config, spec);
  result.seed = spec.seed;
  const auto started = std::chrono::steady_clock::now();
  try {
    auto env = make_environment(config.map);
    auto agent = make_agent(config.agent, config.map);
    auto shaper = make_shaper(config.methods.at(spec.method), spec.series, config.agent, config.map);
    RunStreams streams = RunStreams::from_seed(spec.seed);
    result.steps.reserve(static_cast<std::size_t>(config.episodes));
    result.returns.reserve(static_cast<std::size_t>(config.episodes));
    for (int e = 0; e < config.episodes; ++e) {
      const EpisodeStats s = run_episode(*env, *agent, *shaper, streams);
      result.steps.push_back(s.steps);
      result.returns.push_back(s.total_reward);
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::vector<RunResult> run_battery(const RunConfig& config, int workers, const ProgressFn& progress) {
  const auto plan = plan_battery(config);
  std::vector<RunResult> results(plan.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      results[i] = run_single(config, plan[i]);
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, plan.size());
      }
    }
  };
  const int threads = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(plan.size(), 1)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

std::vector<double> smooth(std::span<const double> series, int window) {
  if (window < 1) throw UsageError("smooth: window must be at least 1");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= static_cast<std::size_t>(window)) sum -= series[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    // recompute exactly for the window to avoid drift in long series
    if (window > 1 && (i % 1024) == 1023) {
      sum = 0.0;
      for (std::size_t j = i + 1 - n; j <= i; ++j) sum += series[j];
    }
    out[i] = window == 1 ? series[i] : sum / static_cast<double>(n);
  }
  return out;
}

ThresholdHit time_to_threshold(std::span<const double> series, double threshold) {
  if (!(threshold > 0.0)) throw UsageError("time_to_threshold: threshold must be positive");
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i] <= threshold) return {static_cast<int>(i) + 1, false};
  return {static_cast<int>(series.size()) + 1, true};
}

double asymptotic_performance(std::span<const double> series, int tail) {
  if (tail < 1 || static_cast<std::size_t>(tail) > series.size())
    throw UsageError("asymptotic_performance: tail must be in [1, length]");
  return stats::mean(series.subspan(series.size() - static_cast<std::size_t>(tail)));
}

bool MetricsReport::degenerate() const {
  return std::any_of(blocks.begin(), blocks.end(), [](const MetricBlock& b) { return b.degenerate; });
}

MetricBlock compare_methods(const std::string& name, const std::vector<std::string>& methods,
                            const std::vector<std::vector<double>>& samples) {
  if (methods.size() != samples.size()) throw UsageError("compare_methods: labels and samples differ in length");
  MetricBlock block;
  block.name = name;
  block.methods = methods;
  for (const auto& s : samples) {
    Summary sum;
    sum.n = static_cast<int>(s.size());
    sum.mean = stats::mean(s);
    sum.sd = stats::stddev(s);
    sum.se = stats::std_error(s);
    block.summaries.push_back(sum);
  }
  const bool testable = samples.size() >= 2 &&
                        std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.size() >= 2; });
  if (!testable) return block;

  block.anova = stats::anova_oneway(samples);
  if (block.anova.degenerate) {
    block.degenerate = true;
    return block;
  }
  std::vector<double> raw;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const auto w = stats::welch_t_test(samples[i], samples[j]);
      block.comparisons.push_back({methods[i], methods[j], w.t, w.df, w.p, w.p, w.degenerate});
      raw.push_back(w.p);
    }
  }
  const auto adjusted = stats::holm_adjust(raw);
  for (std::size_t i = 0; i < adjusted.size(); ++i) block.comparisons[i].p_adjusted = adjusted[i];
  return block;
}

std::string method_group(const std::string& label) { return label.substr(0, label.find('/')); }

namespace {

std::vector<MetricBlock> blocks_for(const std::vector<RunResult>& results, std::span<const double> thresholds,
                                    int smoothing_window, int asymptotic_tail, bool by_group) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunResult*>> groups;
  for (const auto& r : results) {
    if (r.failed) continue;
    const std::string key = by_group ? method_group(r.method) : r.method;
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<MetricBlock> blocks;
  for (const double threshold : thresholds) {
    std::vector<std::vector<double>> samples;
    std::vector<int> censored;
    for (const auto& key : order) {
      std::vector<double> values;
      int c = 0;
      for (const auto* r : groups[key]) {
        const auto smoothed = smooth(r->steps, smoothing_window);
        const auto hit = time_to_threshold(smoothed, threshold);
        values.push_back(hit.episode);
        c += hit.censored;
      }
      samples.push_back(std::move(values));
      censored.push_back(c);
    }
    std::ostringstream name;
    name << "ttt@" << threshold;
    MetricBlock b = compare_methods(name.str(), order, samples);
    for (std::size_t i = 0; i < censored.size(); ++i) b.summaries[i].censored = censored[i];
    blocks.push_back(std::move(b));
  }
  std::vector<std::vector<double>> tails;
  for (const auto& key : order) {
    std::vector<double> values;
    for (const auto* r : groups[key]) {
      const auto smoothed = smooth(r->steps, smoothing_window);
      values.push_back(asymptotic_performance(smoothed, std::min<int>(asymptotic_tail, static_cast<int>(smoothed.size()))));
    }
    tails.push_back(std::move(values));
  }
  blocks.push_back(compare_methods("asymptotic", order, tails));
  return blocks;
}

json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"se", s.se}, {"n", s.n}, {"censored", s.censored}};
}

json block_json(const MetricBlock& b) {
  json methods = json::object();
  for (std::size_t i = 0; i < b.methods.size(); ++i) methods[b.methods[i]] = summary_json(b.summaries[i]);
  json comparisons = json::array();
  for (const auto& c : b.comparisons)
    comparisons.push_back({{"first", c.first}, {"second", c.second}, {"t", c.t}, {"df", c.df}, {"p", c.p},
                           {"p_adjusted", c.p_adjusted}, {"degenerate", c.degenerate}});
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"metric", b.name},
          {"methods", methods},
          {"method_order", b.methods},
          {"anova", {{"f", finite_or_null(b.anova.f)}, {"df_between", b.anova.df_between},
                     {"df_within", b.anova.df_within}, {"p", b.anova.p}}},
          {"comparisons", comparisons},
          {"degenerate", b.degenerate}};
}

std::string format_mean_sd(const Summary& s) {
  std::ostringstream out;
  out << std::setprecision(3) << s.mean << " (" << std::setprecision(3) << s.sd << ")";
  if (s.censored > 0) out << " [" << s.censored << " censored]";
  return out.str();
}

}  // namespace

MetricsReport compute_report(const std::vector<RunResult>& results, std::span<const double> thresholds,
                             int smoothing_window, int asymptotic_tail) {
  MetricsReport report;
  report.blocks = blocks_for(results, thresholds, smoothing_window, asymptotic_tail, true);
  const bool has_patterns =
      std::any_of(results.begin(), results.end(), [](const RunResult& r) { return r.method.find('/') != std::string::npos; });
  if (has_patterns) report.pattern_blocks = blocks_for(results, thresholds, smoothing_window, asymptotic_tail, false);
  return report;
}

json report_to_json(const MetricsReport& report) {
  json blocks = json::array();
  for (const auto& b : report.blocks) blocks.push_back(block_json(b));
  json doc{{"metrics", blocks}, {"degenerate", report.degenerate()}};
  if (!report.pattern_blocks.empty()) {
    json patterns = json::array();
    for (const auto& b : report.pattern_blocks) patterns.push_back(block_json(b));
    doc["pattern_metrics"] = patterns;
  }
  return doc;
}

std::string format_table(const MetricsReport& report) {
  std::ostringstream out;
  if (report.blocks.empty()) return {};
  const auto& methods = report.blocks.front().methods;
  std::size_t name_width = 6;
  std::vector<std::size_t> widths;
  for (const auto& m : methods) widths.push_back(m.size());
  for (const auto& b : report.blocks) {
    name_width = std::max(name_width, b.name.size());
    for (std::size_t i = 0; i < b.summaries.size() && i < widths.size(); ++i)
      widths[i] = std::max(widths[i], format_mean_sd(b.summaries[i]).size());
  }
  out << std::left << std::setw(static_cast<int>(name_width + 2)) << "Metric";
  for (std::size_t i = 0; i < methods.size(); ++i) out << std::setw(static_cast<int>(widths[i] + 2)) << methods[i];
  out << "ANOVA p\n";
  for (const auto& b : report.blocks) {
    out << std::setw(static_cast<int>(name_width + 2)) << b.name;
    for (std::size_t i = 0; i < b.summaries.size(); ++i)
      out << std::setw(static_cast<int>((i < widths.size() ? widths[i] : 0) + 2)) << format_mean_sd(b.summaries[i]);
    if (b.degenerate) out << "degenerate";
    else out << std::setprecision(3) << b.anova.p;
    out << "\n";
    for (const auto& c : b.comparisons)
      out << "    " << c.first << " vs " << c.second << ": Holm-adjusted p = " << std::setprecision(3)
          << c.p_adjusted << (c.p_adjusted < 0.05 ? " *" : " n.s.") << "\n";
  }
  return out.str();
}

std::vector<Curve> learning_curves(const std::vector<RunResult>& results, int smoothing_window) {
  std::vector<Curve> curves;
  std::map<std::string, std::vector<std::vector<double>>> groups;
  std::vector<std::string> order;
  for (const auto& r : results) {
    if (r.failed) continue;
    const std::string key = method_group(r.method);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(smooth(r.steps, smoothing_window));
  }
  for (const auto& key : order) {
    const auto& runs = groups[key];
    std::size_t length = runs.front().size();
    for (const auto& r : runs) length = std::min(length, r.size());
    Curve c{key, std::vector<double>(length), std::vector<double>(length)};
    std::vector<double> column(runs.size());
    for (std::size_t e = 0; e < length; ++e) {
      for (std::size_t i = 0; i < runs.size(); ++i) column[i] = runs[i][e];
      c.mean[e] = stats::mean(column);
      c.se[e] = stats::std_error(column);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void write_results_csv(std::ostream& out, const std::vector<RunResult>& results) {
  out << "method,seed,episode,steps,return\n";
  out << std::setprecision(17);
  for (const auto& r : results) {
    if (r.failed) continue;
    for (std::size_t e = 0; e < r.steps.size(); ++e)
      out << r.method << ',' << r.seed << ',' << (e + 1) << ',' << static_cast<long long>(r.steps[e]) << ','
          << r.returns[e] << '\n';
  }
}

std::vector<RunResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "method,seed,episode,steps,return") throw ConfigError("results CSV: unexpected header \"" + line + "\"");

  std::vector<RunResult> out;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5) throw ConfigError("results CSV row " + std::to_string(row) + ": expected 5 fields");
    try {
      const std::uint64_t seed = std::stoull(cells[1]);
      const long episode = std::stol(cells[2]);
      const auto key = std::make_pair(cells[0], seed);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, out.size()).first;
        out.push_back(RunResult{cells[0], seed, {}, {}, 0.0, false, {}});
      }
      RunResult& r = out[it->second];
      if (episode != static_cast<long>(r.steps.size()) + 1)
        throw ConfigError("results CSV row " + std::to_string(row) + ": episodes out of order");
      r.steps.push_back(std::stod(cells[3]));
      r.returns.push_back(std::stod(cells[4]));
    } catch (const std::invalid_argument&) {
      throw ConfigError("results CSV row " + std::to_string(row) + ": malformed number");
    } catch (const std::out_of_range&) {
      throw ConfigError("results CSV row " + std::to_string(row) + ": number out of range");
    }
  }
  return out;
}

}  // namespace rshape
