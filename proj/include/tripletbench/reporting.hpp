#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tripletbench/disentangle.hpp"
#include "tripletbench/metrics.hpp"

namespace tripletbench {

struct LeaderboardRow {
  std::string team_id;
  std::array<double, 6> ap{};  // mean AP per task, indexed by task_index()
  std::map<int, double> topk;
  double topk_mean = 0.0;

  friend bool operator==(const LeaderboardRow&, const LeaderboardRow&) = default;
};

// Per-class AP of every team for one task.
struct PerClassTable {
  std::vector<std::string> class_labels;
  std::vector<std::string> teams;  // same order as the leaderboard rows
  std::vector<ApVector> values;    // [team][class]
  std::vector<std::optional<LeaderboardStats>> footer;  // per class, over defined entries

  friend bool operator==(const PerClassTable&, const PerClassTable&) = default;
};

struct Leaderboard {
  Task sort_key = Task::kIVT;
  std::vector<LeaderboardRow> rows;
  std::array<LeaderboardStats, 6> footer{};
  std::map<int, LeaderboardStats> topk_footer;
  LeaderboardStats topk_mean_footer;
  std::array<PerClassTable, 6> per_class;

  friend bool operator==(const Leaderboard&, const Leaderboard&) = default;
};

// Rows sorted by the sort task's mean AP (descending), ties by team id.
// Footers use leaderboard_stats over all rows. Team ids must be unique and
// every report must carry the same top-K list.
Leaderboard build_leaderboard(const std::vector<EvalReport>& reports, Task sort_key = Task::kIVT,
                              StdConvention convention = StdConvention::kSample);

void to_json(nlohmann::json& j, const Leaderboard& lb);
void from_json(const nlohmann::json& j, Leaderboard& lb);

// CSV renderings; values shown as percentages with one decimal.
std::string leaderboard_csv(const Leaderboard& lb);
std::string per_class_csv(const Leaderboard& lb, Task task);
std::string topk_csv(const Leaderboard& lb);

// A parsed display table: header, body rows, and the `mean_std` footer cells.
struct DisplayTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer;
};

DisplayTable parse_display_csv(std::string_view text);

// Writes leaderboard.csv, leaderboard.json, per_class_<task>.csv for the six
// tasks and topk.csv into `dir`. Returns the paths written.
std::vector<std::filesystem::path> emit_tables(const Leaderboard& lb,
                                               const std::filesystem::path& dir);

}  // namespace tripletbench
