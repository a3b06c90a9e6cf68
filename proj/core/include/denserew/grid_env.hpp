#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace denserew::g4rl {

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Move { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr std::size_t kMoveCount = 4;

enum class RewardMode { Dense, Sparse };

/// Deterministic 4-connected gridworld.
///
/// Map files use one character per cell: `#` wall, `S` start, `G` goal,
/// `.` or space floor, and `>` `<` `^` `v` one-way doors. A door cell can
/// only be entered and left by moving in its arrow direction. Moves into
/// walls, off the map, or against a door leave the agent in place.
class GridEnv {
 public:
  struct StepResult {
    Cell next;
    double reward = 0.0;
    bool done = false;
  };

  GridEnv(int width, int height, std::set<Cell> walls, Cell start, Cell goal, RewardMode mode,
          std::map<Cell, Move> one_way_doors = {});

  static GridEnv parse(std::string_view map_text, RewardMode mode);
  static GridEnv load_map_file(const std::string& path, RewardMode mode);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Cell start() const noexcept { return start_; }
  Cell goal() const noexcept { return goal_; }
  RewardMode reward_mode() const noexcept { return mode_; }
  const std::map<Cell, Move>& one_way_doors() const noexcept { return doors_; }

  bool in_bounds(Cell c) const noexcept;
  bool is_wall(Cell c) const;
  std::vector<Cell> free_cells() const;
  std::size_t cell_count() const noexcept { return static_cast<std::size_t>(width_ * height_); }
  std::size_t index(Cell c) const noexcept { return static_cast<std::size_t>(c.y * width_ + c.x); }
  Cell cell_at(std::size_t i) const noexcept {
    return Cell{static_cast<int>(i % static_cast<std::size_t>(width_)),
                static_cast<int>(i / static_cast<std::size_t>(width_))};
  }

  /// Normalised coordinates (x / (W-1), y / (H-1)).
  std::vector<double> feature(Cell c) const;
  /// Cell whose feature is nearest to `f`.
  Cell cell_of_feature(const std::vector<double>& f) const;

  Cell move_target(Cell from, Move m) const;
  StepResult step(Cell from, Move m) const;

  /// Breadth-first reachability of the goal from the start.
  bool goal_reachable() const;
  /// Shortest path length in moves from `from` to the goal, or -1.
  int distance_to_goal(Cell from) const;

  std::string render() const;

 private:
  int width_;
  int height_;
  std::vector<char> wall_;
  Cell start_;
  Cell goal_;
  RewardMode mode_;
  std::map<Cell, Move> doors_;
};

/// The 9x9 four-room layout used by the directional experiments.
std::string_view four_room_map();

}  // namespace denserew::g4rl
