#include "rshape/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace rshape {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

GridMap::GridMap(int width, int height, std::vector<Cell> walls, Cell start, Cell goal,
                 std::vector<Cell> hallways)
    : width_(width), height_(height), walls_(std::move(walls)), start_(start), goal_(goal),
      hallways_(std::move(hallways)) {
  if (width_ <= 0 || height_ <= 0) throw LoadError("/width", "grid dimensions must be positive");
  std::sort(walls_.begin(), walls_.end());
  walls_.erase(std::unique(walls_.begin(), walls_.end()), walls_.end());
  blocked_.assign(cell_count(), 0);
  for (std::size_t i = 0; i < walls_.size(); ++i) {
    if (!in_bounds(walls_[i])) throw LoadError("/walls/" + std::to_string(i), "wall outside the grid");
    blocked_[id(walls_[i])] = 1;
  }
  if (!in_bounds(start_)) throw LoadError("/start", "start outside the grid");
  if (!in_bounds(goal_)) throw LoadError("/goal", "goal outside the grid");
  if (is_wall(start_)) throw LoadError("/start", "start is a wall");
  if (is_wall(goal_)) throw LoadError("/goal", "goal is a wall");
  if (start_ == goal_) throw LoadError("/goal", "start and goal coincide");
  for (std::size_t i = 0; i < hallways_.size(); ++i)
    if (!in_bounds(hallways_[i]) || is_wall(hallways_[i]))
      throw LoadError("/hallways/" + std::to_string(i), "hallway must be an open cell");

  // every open cell reachable from start
  std::vector<char> seen(cell_count(), 0);
  std::queue<std::size_t> frontier;
  frontier.push(id(start_));
  seen[id(start_)] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const Cell c = cell(frontier.front());
    frontier.pop();
    for (const Cell n : {Cell{c.row - 1, c.col}, Cell{c.row + 1, c.col}, Cell{c.row, c.col - 1}, Cell{c.row, c.col + 1}}) {
      if (!in_bounds(n) || is_wall(n) || seen[id(n)]) continue;
      seen[id(n)] = 1;
      ++reached;
      frontier.push(id(n));
    }
  }
  if (reached != cell_count() - walls_.size()) {
    if (!seen[id(goal_)]) throw LoadError("/goal", "goal unreachable from start");
    throw LoadError("/walls", "some open cells are unreachable from start");
  }
}

std::vector<std::size_t> GridMap::open_cells() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cell_count(); ++i)
    if (!blocked_[i]) out.push_back(i);
  return out;
}

StepOutcome fourrooms_step(const GridMap& map, std::size_t cell_id, ActionId action) {
  if (cell_id >= map.cell_count() || map.is_wall(cell_id))
    throw UsageError("fourrooms_step: cell " + std::to_string(cell_id) + " is not an open cell");
  Cell c = map.cell(cell_id);
  Cell next = c;
  switch (action.index) {
    case kUp: --next.row; break;
    case kDown: ++next.row; break;
    case kLeft: --next.col; break;
    case kRight: ++next.col; break;
    default: throw UsageError("fourrooms_step: action out of range");
  }
  if (!map.in_bounds(next) || map.is_wall(next)) next = c;
  const bool at_goal = next == map.goal();
  return StepOutcome{EnvState::discrete(map.id(next)), at_goal ? kGridGoalReward : 0.0, at_goal, false};
}

std::optional<int> shortest_path_length(const GridMap& map) {
  std::vector<int> dist(map.cell_count(), -1);
  std::queue<std::size_t> frontier;
  dist[map.id(map.start())] = 0;
  frontier.push(map.id(map.start()));
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    if (u == map.id(map.goal())) return dist[u];
    for (std::size_t a = 0; a < kGridActionCount; ++a) {
      const std::size_t v = fourrooms_step(map, u, ActionId{a}).next_state.cell();
      if (dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      frontier.push(v);
    }
  }
  return std::nullopt;
}

std::vector<int> room_labels(const GridMap& map) {
  std::vector<int> label(map.cell_count(), -1);
  std::vector<char> hallway(map.cell_count(), 0);
  for (const Cell h : map.hallways()) hallway[map.id(h)] = 1;

  int rooms = 0;
  for (const std::size_t seed : map.open_cells()) {
    if (label[seed] >= 0 || hallway[seed]) continue;
    std::queue<std::size_t> frontier;
    frontier.push(seed);
    label[seed] = rooms;
    while (!frontier.empty()) {
      const Cell c = map.cell(frontier.front());
      frontier.pop();
      for (const Cell n : {Cell{c.row - 1, c.col}, Cell{c.row + 1, c.col}, Cell{c.row, c.col - 1}, Cell{c.row, c.col + 1}}) {
        if (!map.in_bounds(n) || map.is_wall(n)) continue;
        const std::size_t nid = map.id(n);
        if (hallway[nid] || label[nid] >= 0) continue;
        label[nid] = rooms;
        frontier.push(nid);
      }
    }
    ++rooms;
  }
  for (const Cell h : map.hallways()) {
    int best = -1;
    for (const Cell n : {Cell{h.row - 1, h.col}, Cell{h.row + 1, h.col}, Cell{h.row, h.col - 1}, Cell{h.row, h.col + 1}}) {
      if (!map.in_bounds(n) || map.is_wall(n)) continue;
      const int l = label[map.id(n)];
      if (l >= 0 && (best < 0 || l < best)) best = l;
    }
    label[map.id(h)] = best >= 0 ? best : rooms++;
  }
  return label;
}

// ---------------------------------------------------------------------------
// Pinball
// ---------------------------------------------------------------------------

void PinballMap::validate() const {
  if (!(target_radius > 0.0)) throw LoadError("/target_radius", "must be positive");
  if (!(ball_radius > 0.0) || ball_radius >= 0.5) throw LoadError("/ball_radius", "must be in (0, 0.5)");
  if (!(drag > 0.0 && drag <= 1.0)) throw LoadError("/drag", "must be in (0, 1]");
  if (!(impulse > 0.0 && impulse <= 1.0)) throw LoadError("/impulse", "must be in (0, 1]");
  if (substeps < 1) throw LoadError("/substeps", "must be a positive integer");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& poly = obstacles[i];
    for (std::size_t j = 0; j < poly.size(); ++j)
      if (!(poly[j].x() >= 0.0 && poly[j].x() <= 1.0 && poly[j].y() >= 0.0 && poly[j].y() <= 1.0))
        throw LoadError("/obstacles/" + std::to_string(i) + "/" + std::to_string(j), "vertex outside [0,1]^2");
    if (!polygon_is_simple(poly))
      throw LoadError("/obstacles/" + std::to_string(i), "polygon must be simple with at least 3 vertices");
  }
  if (disc_collides(start, ball_radius, obstacles)) throw LoadError("/start", "ball at start overlaps an obstacle");
  for (int k = 0; k < 2; ++k)
    if (!(target[k] >= 0.0 && target[k] <= 1.0)) throw LoadError("/target", "target outside [0,1]^2");
  if ((start - target).norm() <= target_radius) throw LoadError("/target", "start lies inside the target");
}

StepOutcome pinball_step(const PinballMap& map, const PinballState& state, ActionId action) {
  Eigen::Vector2d pos(state.x, state.y);
  Eigen::Vector2d vel(state.xdot, state.ydot);
  if (disc_collides(pos, map.ball_radius, map.obstacles))
    throw IntegrityError("pinball_step: ball overlaps an obstacle on entry");

  switch (action.index) {
    case kAccX: vel.x() += map.impulse; break;
    case kDecX: vel.x() -= map.impulse; break;
    case kAccY: vel.y() += map.impulse; break;
    case kDecY: vel.y() -= map.impulse; break;
    case kNoForce: break;
    default: throw UsageError("pinball_step: action out of range");
  }
  vel = vel.cwiseMax(-1.0).cwiseMin(1.0);

  double reward = 0.0;
  if (map.step_penalties) reward = action.index == kNoForce ? -1.0 : -5.0;
  bool terminal = false;

  const double dt = map.ball_radius / map.substeps;
  for (int i = 0; i < map.substeps; ++i) {
    const Eigen::Vector2d moved = pos + vel * dt;
    const Contact contact = find_contact(moved, map.ball_radius, map.obstacles);
    const bool blocked = contact.distance < map.ball_radius;
    if (blocked) {
      if (vel.dot(contact.normal) < 0.0) vel = reflect(vel, contact.normal);
    } else {
      pos = moved;
    }
    if ((pos - map.target).norm() <= map.target_radius) {
      terminal = true;
      reward += kPinballGoalReward;
      break;
    }
  }
  vel *= map.drag;
  vel = vel.cwiseMax(-1.0).cwiseMin(1.0);

  return StepOutcome{EnvState::continuous({pos.x(), pos.y(), vel.x(), vel.y()}), reward, terminal, false};
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

namespace {

void reject_unknown(const json& doc, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : doc.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw LoadError("/" + key, "unknown key");
}

const json& require(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw LoadError("/" + key, "missing required key");
  return doc.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw LoadError(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw LoadError(where, "expected a finite number");
  return d;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw LoadError(where, "expected an integer");
  return v.get<int>();
}

Cell cell_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw LoadError(where, "expected [row, col]");
  return {integer(v[0], where + "/0"), integer(v[1], where + "/1")};
}

std::vector<Cell> cells_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw LoadError(where, "expected an array of [row, col]");
  std::vector<Cell> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(cell_of(v[i], where + "/" + std::to_string(i)));
  return out;
}

Eigen::Vector2d point_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw LoadError(where, "expected [x, y]");
  return {number(v[0], where + "/0"), number(v[1], where + "/1")};
}

GridMap parse_grid(const json& doc) {
  reject_unknown(doc, {"type", "name", "width", "height", "walls", "start", "goal", "hallways"});
  std::vector<Cell> hallways;
  if (doc.contains("hallways")) hallways = cells_of(doc.at("hallways"), "/hallways");
  return GridMap(integer(require(doc, "width"), "/width"), integer(require(doc, "height"), "/height"),
                 cells_of(require(doc, "walls"), "/walls"), cell_of(require(doc, "start"), "/start"),
                 cell_of(require(doc, "goal"), "/goal"), std::move(hallways));
}

PinballMap parse_pinball(const json& doc) {
  reject_unknown(doc, {"type", "name", "obstacles", "start", "target", "target_radius", "ball_radius", "drag",
                       "impulse", "substeps", "step_penalties"});
  PinballMap map;
  const json& obstacles = require(doc, "obstacles");
  if (!obstacles.is_array()) throw LoadError("/obstacles", "expected an array of polygons");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string where = "/obstacles/" + std::to_string(i);
    if (!obstacles[i].is_array()) throw LoadError(where, "expected an array of [x, y]");
    Polygon poly;
    for (std::size_t j = 0; j < obstacles[i].size(); ++j)
      poly.push_back(point_of(obstacles[i][j], where + "/" + std::to_string(j)));
    map.obstacles.push_back(std::move(poly));
  }
  map.start = point_of(require(doc, "start"), "/start");
  map.target = point_of(require(doc, "target"), "/target");
  map.target_radius = number(require(doc, "target_radius"), "/target_radius");
  map.ball_radius = number(require(doc, "ball_radius"), "/ball_radius");
  if (doc.contains("drag")) map.drag = number(doc.at("drag"), "/drag");
  if (doc.contains("impulse")) map.impulse = number(doc.at("impulse"), "/impulse");
  if (doc.contains("substeps")) map.substeps = integer(doc.at("substeps"), "/substeps");
  if (doc.contains("step_penalties")) {
    if (!doc.at("step_penalties").is_boolean()) throw LoadError("/step_penalties", "expected a boolean");
    map.step_penalties = doc.at("step_penalties").get<bool>();
  }
  map.validate();
  return map;
}

json cell_json(Cell c) { return json::array({c.row, c.col}); }
json point_json(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

}  // namespace

MapDocument parse_map(const json& doc) {
  if (!doc.is_object()) throw LoadError("", "map document must be a JSON object");
  const json& type = require(doc, "type");
  if (type == "grid") return parse_grid(doc);
  if (type == "pinball") return parse_pinball(doc);
  throw LoadError("/type", "expected \"grid\" or \"pinball\"");
}

MapDocument parse_map_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_map(doc);
}

MapDocument load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), "cannot open map file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map_text(buf.str());
}

json map_to_json(const MapDocument& map) {
  if (const auto* g = std::get_if<GridMap>(&map)) {
    json walls = json::array();
    for (const Cell c : g->walls()) walls.push_back(cell_json(c));
    json doc{{"type", "grid"},       {"width", g->width()},          {"height", g->height()},
             {"walls", walls},       {"start", cell_json(g->start())}, {"goal", cell_json(g->goal())}};
    if (!g->hallways().empty()) {
      json hallways = json::array();
      for (const Cell c : g->hallways()) hallways.push_back(cell_json(c));
      doc["hallways"] = hallways;
    }
    return doc;
  }
  const auto& p = std::get<PinballMap>(map);
  json obstacles = json::array();
  for (const auto& poly : p.obstacles) {
    json vertices = json::array();
    for (const auto& v : poly) vertices.push_back(point_json(v));
    obstacles.push_back(vertices);
  }
  return json{{"type", "pinball"},
              {"obstacles", obstacles},
              {"start", point_json(p.start)},
              {"target", point_json(p.target)},
              {"target_radius", p.target_radius},
              {"ball_radius", p.ball_radius},
              {"drag", p.drag},
              {"impulse", p.impulse},
              {"substeps", p.substeps},
              {"step_penalties", p.step_penalties}};
}

std::string_view map_kind(const MapDocument& map) {
  return std::holds_alternative<GridMap>(map) ? "fourrooms" : "pinball";
}

std::unique_ptr<Environment> make_environment(const MapDocument& map) {
  if (const auto* g = std::get_if<GridMap>(&map)) return std::make_unique<FourRoomsEnv>(*g);
  return std::make_unique<PinballEnv>(std::get<PinballMap>(map));
}

}  // namespace rshape
