#include "rshape/subgoal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace rshape {

using nlohmann::json;

bool matches(const SubgoalSpec& spec, const EnvState& state) {
  if (const auto* c = std::get_if<CellSubgoal>(&spec)) {
    if (!state.is_discrete()) throw UsageError("matches: cell subgoal tested against a continuous state");
    return state.cell() == c->cell;
  }
  if (const auto* circle = std::get_if<CircleSubgoal>(&spec)) {
    if (!state.is_continuous()) throw UsageError("matches: circle subgoal tested against a discrete state");
    const auto& p = state.pinball();
    return std::hypot(p.x - circle->center.x(), p.y - circle->center.y()) <= circle->radius;
  }
  const auto& slice = std::get<SliceSubgoal>(spec);
  for (std::size_t i = 0; i < slice.indices.size(); ++i) {
    if (slice.indices[i] >= state.observation_size())
      throw UsageError("matches: slice index " + std::to_string(slice.indices[i]) + " outside the observation");
    if (std::abs(state.observation(slice.indices[i]) - slice.values[i]) > slice.margin) return false;
  }
  return true;
}

SubgoalSeries::SubgoalSeries(std::vector<SubgoalSpec> subgoals, SeriesSource source, std::string env)
    : subgoals_(std::move(subgoals)), source_(source), env_(std::move(env)) {
  if (subgoals_.empty()) throw ConfigError("subgoal series must not be empty");
  for (std::size_t i = 0; i < subgoals_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (subgoals_[i] == subgoals_[j])
        throw ConfigError("subgoal series: subgoal " + std::to_string(i) + " duplicates subgoal " + std::to_string(j));
    if (const auto* c = std::get_if<CircleSubgoal>(&subgoals_[i]); c && !(c->radius > 0.0))
      throw ConfigError("subgoal series: circle radius must be positive");
    if (const auto* s = std::get_if<SliceSubgoal>(&subgoals_[i])) {
      if (!(s->margin >= 0.0)) throw ConfigError("subgoal series: slice margin must be non-negative");
      if (s->indices.size() != s->values.size() || s->indices.empty())
        throw ConfigError("subgoal series: slice indices and values must be non-empty and equal length");
    }
  }
}

bool AchievementCursor::advance(const EnvState& state, const SubgoalSeries& series) {
  if (saturated()) return false;
  if (!matches(series[next_ - 1], state)) return false;
  ++next_;
  return true;
}

SubgoalSeries random_series(const MapDocument& map, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("random_series: count must be at least 1");
  Rng rng = make_stream(seed, "subgoals");
  std::vector<SubgoalSpec> out;

  if (const auto* grid = std::get_if<GridMap>(&map)) {
    std::vector<std::size_t> candidates;
    for (const std::size_t id : grid->open_cells())
      if (id != grid->id(grid->start()) && id != grid->id(grid->goal())) candidates.push_back(id);
    if (count > candidates.size())
      throw ConfigError("random_series: requested " + std::to_string(count) + " subgoals but only " +
                        std::to_string(candidates.size()) + " cells are eligible");
    // partial Fisher-Yates: the first `count` entries are a uniform random ordered sample
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng)]);
      out.push_back(CellSubgoal{candidates[i]});
    }
    return SubgoalSeries(std::move(out), SeriesSource::random, "fourrooms");
  }

  const auto& pinball = std::get<PinballMap>(map);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 100000 * count) throw ConfigError("random_series: could not place subgoals in free space");
    const Eigen::Vector2d c(unit(rng), unit(rng));
    if (disc_collides(c, pinball.ball_radius, pinball.obstacles)) continue;
    SubgoalSpec spec = CircleSubgoal{c, pinball.target_radius};
    if (std::find(out.begin(), out.end(), spec) != out.end()) continue;
    out.push_back(std::move(spec));
  }
  return SubgoalSeries(std::move(out), SeriesSource::random, "pinball");
}

std::vector<ValidationIssue> validate_series(const SubgoalSeries& series, const MapDocument& map) {
  std::vector<ValidationIssue> issues;
  const std::string kind(map_kind(map));
  if (!series.env().empty() && series.env() != kind)
    issues.push_back({"/env", "series targets \"" + series.env() + "\" but the map is \"" + kind + "\""});

  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string field = "/subgoals/" + std::to_string(i);
    const SubgoalSpec& spec = series[i];
    if (const auto* grid = std::get_if<GridMap>(&map)) {
      if (const auto* c = std::get_if<CellSubgoal>(&spec)) {
        if (c->cell >= grid->cell_count()) issues.push_back({field + "/cell", "cell outside the grid"});
        else if (grid->is_wall(c->cell)) issues.push_back({field + "/cell", "cell is a wall"});
        else if (c->cell == grid->id(grid->start())) issues.push_back({field + "/cell", "cell is the start"});
        else if (c->cell == grid->id(grid->goal())) issues.push_back({field + "/cell", "cell is the goal"});
      } else if (const auto* s = std::get_if<SliceSubgoal>(&spec)) {
        for (const std::size_t idx : s->indices)
          if (idx >= 1) issues.push_back({field + "/indices", "index outside the length-1 grid observation"});
      } else {
        issues.push_back({field + "/kind", "circle subgoals need a pinball map"});
      }
    } else {
      const auto& pinball = std::get<PinballMap>(map);
      if (const auto* c = std::get_if<CircleSubgoal>(&spec)) {
        const bool outside = c->center.x() < 0.0 || c->center.x() > 1.0 || c->center.y() < 0.0 || c->center.y() > 1.0;
        bool inside_obstacle = false;
        for (const auto& poly : pinball.obstacles) inside_obstacle = inside_obstacle || point_in_polygon<double>(c->center, poly);
        if (outside) issues.push_back({field + "/center", "centre outside [0,1]^2"});
        else if (inside_obstacle) issues.push_back({field + "/center", "centre inside an obstacle"});
      } else if (const auto* s = std::get_if<SliceSubgoal>(&spec)) {
        for (const std::size_t idx : s->indices)
          if (idx >= 4) issues.push_back({field + "/indices", "index outside the length-4 pinball observation"});
      } else {
        issues.push_back({field + "/kind", "cell subgoals need a grid map"});
      }
    }
  }
  return issues;
}

namespace {

SeriesSource parse_source(const json& v) {
  if (v == "human") return SeriesSource::human;
  if (v == "random") return SeriesSource::random;
  if (v == "scripted") return SeriesSource::scripted;
  throw ConfigError("/source: expected human, random or scripted");
}

void reject_unknown(const json& doc, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, _] : doc.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + "/" + key + ": unknown key");
}

SubgoalSpec parse_spec(const json& v, const std::string& where) {
  if (!v.is_object() || !v.contains("kind")) throw ConfigError(where + ": expected an object with \"kind\"");
  try {
    const std::string kind = v.at("kind").get<std::string>();
    if (kind == "cell") {
      reject_unknown(v, {"kind", "cell"}, where);
      const auto id = v.at("cell").get<long long>();
      if (id < 0) throw ConfigError(where + "/cell: must be non-negative");
      return CellSubgoal{static_cast<std::size_t>(id)};
    }
    if (kind == "circle") {
      reject_unknown(v, {"kind", "center", "radius"}, where);
      const auto& c = v.at("center");
      if (!c.is_array() || c.size() != 2) throw ConfigError(where + "/center: expected [x, y]");
      return CircleSubgoal{{c[0].get<double>(), c[1].get<double>()}, v.at("radius").get<double>()};
    }
    if (kind == "slice") {
      reject_unknown(v, {"kind", "indices", "values", "margin"}, where);
      return SliceSubgoal{v.at("indices").get<std::vector<std::size_t>>(), v.at("values").get<std::vector<double>>(),
                          v.at("margin").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + "/kind: expected cell, circle or slice");
}

json spec_to_json(const SubgoalSpec& spec) {
  if (const auto* c = std::get_if<CellSubgoal>(&spec)) return {{"kind", "cell"}, {"cell", c->cell}};
  if (const auto* c = std::get_if<CircleSubgoal>(&spec))
    return {{"kind", "circle"}, {"center", {c->center.x(), c->center.y()}}, {"radius", c->radius}};
  const auto& s = std::get<SliceSubgoal>(spec);
  return {{"kind", "slice"}, {"indices", s.indices}, {"values", s.values}, {"margin", s.margin}};
}

}  // namespace

std::string_view to_string(SeriesSource source) {
  switch (source) {
    case SeriesSource::human: return "human";
    case SeriesSource::random: return "random";
    default: return "scripted";
  }
}

SubgoalSeries parse_series(const json& doc) {
  if (!doc.is_object()) throw ConfigError("subgoal series document must be a JSON object");
  reject_unknown(doc, {"env", "subgoals", "source"}, "");
  if (!doc.contains("subgoals") || !doc.at("subgoals").is_array())
    throw ConfigError("/subgoals: expected an array");
  std::vector<SubgoalSpec> specs;
  for (std::size_t i = 0; i < doc.at("subgoals").size(); ++i)
    specs.push_back(parse_spec(doc.at("subgoals")[i], "/subgoals/" + std::to_string(i)));
  std::string env;
  if (doc.contains("env")) {
    env = doc.at("env").is_string() ? doc.at("env").get<std::string>() : "";
    if (env != "fourrooms" && env != "pinball") throw ConfigError("/env: expected fourrooms or pinball");
  }
  const SeriesSource source = doc.contains("source") ? parse_source(doc.at("source")) : SeriesSource::human;
  return SubgoalSeries(std::move(specs), source, std::move(env));
}

SubgoalSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open subgoal series");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_series(json::parse(buf.str()));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
}

json series_to_json(const SubgoalSeries& series) {
  json subgoals = json::array();
  for (const auto& s : series.subgoals()) subgoals.push_back(spec_to_json(s));
  json doc{{"subgoals", subgoals}, {"source", std::string(to_string(series.source()))}};
  if (!series.env().empty()) doc["env"] = series.env();
  return doc;
}

}  // namespace rshape
