#pragma once

#include <deque>
#include <filesystem>
#include <optional>
#include <vector>

#include "rshape/environments.hpp"
#include "rshape/harness.hpp"

namespace rshape::testing {

inline std::filesystem::path data_dir() { return default_data_dir(); }

inline GridMap fourrooms_map() { return std::get<GridMap>(load_map(data_dir() / "maps" / "fourrooms.json")); }
inline PinballMap pinball_map() { return std::get<PinballMap>(load_map(data_dir() / "maps" / "pinball.json")); }

/// Independent BFS over the cell graph, written against the map's wall list
/// rather than fourrooms_step.
inline std::optional<int> bfs_oracle(const GridMap& map) {
  const int w = map.width();
  const int h = map.height();
  std::vector<char> wall(static_cast<std::size_t>(w * h), 0);
  for (const Cell c : map.walls()) wall[static_cast<std::size_t>(c.row * w + c.col)] = 1;
  std::vector<int> dist(static_cast<std::size_t>(w * h), -1);
  std::deque<Cell> q{map.start()};
  dist[static_cast<std::size_t>(map.start().row * w + map.start().col)] = 0;
  const int dr[] = {-1, 1, 0, 0};
  const int dc[] = {0, 0, -1, 1};
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop_front();
    const int d = dist[static_cast<std::size_t>(c.row * w + c.col)];
    if (c == map.goal()) return d;
    for (int k = 0; k < 4; ++k) {
      const Cell n{c.row + dr[k], c.col + dc[k]};
      if (n.row < 0 || n.col < 0 || n.row >= h || n.col >= w) continue;
      const auto i = static_cast<std::size_t>(n.row * w + n.col);
      if (wall[i] || dist[i] >= 0) continue;
      dist[i] = d + 1;
      q.push_back(n);
    }
  }
  return std::nullopt;
}

}  // namespace rshape::testing
