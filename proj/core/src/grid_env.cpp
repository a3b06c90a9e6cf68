#include "denserew/grid_env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>

#include "denserew/error.hpp"

namespace denserew::g4rl {

namespace {

Cell offset(Cell c, Move m) {
  switch (m) {
    case Move::Up: return {c.x, c.y - 1};
    case Move::Down: return {c.x, c.y + 1};
    case Move::Left: return {c.x - 1, c.y};
    case Move::Right: return {c.x + 1, c.y};
  }
  return c;
}

}  // namespace

GridEnv::GridEnv(int width, int height, std::set<Cell> walls, Cell start, Cell goal,
                 RewardMode mode, std::map<Cell, Move> one_way_doors)
    : width_(width), height_(height), start_(start), goal_(goal), mode_(mode),
      doors_(std::move(one_way_doors)) {
  if (width < 1 || height < 1) throw Error(Errc::InvalidEnv, "grid dimensions must be positive");
  wall_.assign(cell_count(), 0);
  for (const Cell& w : walls) {
    if (!in_bounds(w)) throw Error(Errc::InvalidEnv, "wall outside the grid");
    wall_[index(w)] = 1;
  }
  if (!in_bounds(start_) || !in_bounds(goal_))
    throw Error(Errc::InvalidEnv, "start and goal must lie inside the grid");
  if (is_wall(start_) || is_wall(goal_)) throw Error(Errc::InvalidEnv, "start or goal is a wall");
  for (const auto& [c, m] : doors_)
    if (!in_bounds(c) || is_wall(c)) throw Error(Errc::InvalidEnv, "door must be a floor cell");
}

GridEnv GridEnv::parse(std::string_view map_text, RewardMode mode) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(map_text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw Error(Errc::InvalidEnv, "empty map");
  const std::size_t w = rows.front().size();
  std::set<Cell> walls;
  std::map<Cell, Move> doors;
  std::optional<Cell> start, goal;
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != w) throw Error(Errc::InvalidEnv, "map rows must all have the same width");
    for (std::size_t x = 0; x < w; ++x) {
      const Cell c{static_cast<int>(x), static_cast<int>(y)};
      switch (rows[y][x]) {
        case '#': walls.insert(c); break;
        case '.': case ' ': break;
        case 'S':
          if (start) throw Error(Errc::InvalidEnv, "map has more than one start");
          start = c;
          break;
        case 'G':
          if (goal) throw Error(Errc::InvalidEnv, "map has more than one goal");
          goal = c;
          break;
        case '^': doors[c] = Move::Up; break;
        case 'v': doors[c] = Move::Down; break;
        case '<': doors[c] = Move::Left; break;
        case '>': doors[c] = Move::Right; break;
        default:
          throw Error(Errc::InvalidEnv, std::string("unknown map character '") + rows[y][x] + "'");
      }
    }
  }
  if (!start || !goal) throw Error(Errc::InvalidEnv, "map needs exactly one S and one G");
  GridEnv env(static_cast<int>(w), static_cast<int>(rows.size()), std::move(walls), *start, *goal,
              mode, std::move(doors));
  return env;
}

GridEnv GridEnv::load_map_file(const std::string& path, RewardMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read map file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), mode);
}

bool GridEnv::in_bounds(Cell c) const noexcept {
  return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
}

bool GridEnv::is_wall(Cell c) const { return !in_bounds(c) || wall_[index(c)] != 0; }

std::vector<Cell> GridEnv::free_cells() const {
  std::vector<Cell> out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (!wall_[index({x, y})]) out.push_back({x, y});
  return out;
}

std::vector<double> GridEnv::feature(Cell c) const {
  const double sx = width_ > 1 ? 1.0 / (width_ - 1) : 0.0;
  const double sy = height_ > 1 ? 1.0 / (height_ - 1) : 0.0;
  return {c.x * sx, c.y * sy};
}

Cell GridEnv::cell_of_feature(const std::vector<double>& f) const {
  const int x = static_cast<int>(std::lround(f.at(0) * (width_ > 1 ? width_ - 1 : 0)));
  const int y = static_cast<int>(std::lround(f.at(1) * (height_ > 1 ? height_ - 1 : 0)));
  return Cell{std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1)};
}

Cell GridEnv::move_target(Cell from, Move m) const {
  if (auto it = doors_.find(from); it != doors_.end() && it->second != m) return from;
  const Cell to = offset(from, m);
  if (is_wall(to)) return from;
  if (auto it = doors_.find(to); it != doors_.end() && it->second != m) return from;
  return to;
}

GridEnv::StepResult GridEnv::step(Cell from, Move m) const {
  StepResult r;
  r.next = move_target(from, m);
  r.done = r.next == goal_;
  if (mode_ == RewardMode::Sparse) {
    r.reward = r.done ? 1.0 : 0.0;
  } else {
    const auto a = feature(r.next);
    const auto b = feature(goal_);
    r.reward = -std::hypot(a[0] - b[0], a[1] - b[1]);
  }
  return r;
}

int GridEnv::distance_to_goal(Cell from) const {
  std::vector<int> dist(cell_count(), -1);
  std::deque<Cell> queue{from};
  dist[index(from)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (c == goal_) return dist[index(c)];
    for (std::size_t m = 0; m < kMoveCount; ++m) {
      const Cell n = move_target(c, static_cast<Move>(m));
      if (dist[index(n)] >= 0) continue;
      dist[index(n)] = dist[index(c)] + 1;
      queue.push_back(n);
    }
  }
  return -1;
}

bool GridEnv::goal_reachable() const { return distance_to_goal(start_) >= 0; }

std::string GridEnv::render() const {
  std::string out;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Cell c{x, y};
      char ch = wall_[index(c)] ? '#' : '.';
      if (auto it = doors_.find(c); it != doors_.end())
        ch = "^v<>"[static_cast<int>(it->second)];
      if (c == start_) ch = 'S';
      if (c == goal_) ch = 'G';
      out += ch;
    }
    out += '\n';
  }
  return out;
}

std::string_view four_room_map() {
  return "#########\n"
         "#S..#...#\n"
         "#.......#\n"
         "#...#...#\n"
         "##.###.##\n"
         "#...#...#\n"
         "#.......#\n"
         "#...#..G#\n"
         "#########\n";
}

}  // namespace denserew::g4rl
