#include "tripletbench/reporting.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "tripletbench/csv.hpp"

namespace tripletbench {
namespace {

std::string percent(double fraction) { return csv::format_fixed(fraction * 100.0, 1); }

std::string stats_cell(const LeaderboardStats& s) {
  return percent(s.mean) + "±" + percent(s.std);
}

nlohmann::json stats_json(const LeaderboardStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
}

LeaderboardStats stats_from_json(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("n").get<std::size_t>()};
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

}  // namespace

Leaderboard build_leaderboard(const std::vector<EvalReport>& reports, Task sort_key,
                              StdConvention convention) {
  if (reports.empty()) throw std::invalid_argument("build_leaderboard: no reports");
  std::set<std::string> seen;
  for (const auto& r : reports) {
    if (!seen.insert(r.team_id).second) {
      throw std::invalid_argument("build_leaderboard: duplicate team " + r.team_id);
    }
    for (Task t : kAllTasks) {
      if (r.task(t).class_labels.size() != reports.front().task(t).class_labels.size()) {
        throw std::invalid_argument("build_leaderboard: report " + r.team_id + " has a different " +
                                    std::string(task_name(t)) + " class set");
      }
    }
    if (r.topk.by_k.size() != reports.front().topk.by_k.size() ||
        !std::equal(r.topk.by_k.begin(), r.topk.by_k.end(), reports.front().topk.by_k.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw std::invalid_argument("build_leaderboard: report " + r.team_id +
                                  " uses a different top-K list");
    }
  }

  std::vector<const EvalReport*> order;
  for (const auto& r : reports) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [&](const EvalReport* a, const EvalReport* b) {
    const double sa = a->task(sort_key).mean_ap;
    const double sb = b->task(sort_key).mean_ap;
    if (sa != sb) return sa > sb;
    return a->team_id < b->team_id;
  });

  Leaderboard lb;
  lb.sort_key = sort_key;
  for (const EvalReport* r : order) {
    LeaderboardRow row;
    row.team_id = r->team_id;
    for (Task t : kAllTasks) row.ap[task_index(t)] = r->task(t).mean_ap;
    row.topk = r->topk.by_k;
    row.topk_mean = r->topk.mean;
    lb.rows.push_back(std::move(row));
  }

  for (Task t : kAllTasks) {
    std::vector<double> column;
    for (const auto& row : lb.rows) column.push_back(row.ap[task_index(t)]);
    lb.footer[task_index(t)] = leaderboard_stats(column, convention);

    PerClassTable& table = lb.per_class[task_index(t)];
    table.class_labels = order.front()->task(t).class_labels;
    for (const EvalReport* r : order) {
      table.teams.push_back(r->team_id);
      table.values.push_back(r->task(t).per_class_ap);
    }
    for (std::size_t c = 0; c < table.class_labels.size(); ++c) {
      std::vector<double> defined;
      for (const auto& v : table.values) {
        if (v[c]) defined.push_back(*v[c]);
      }
      table.footer.push_back(defined.empty() ? std::nullopt
                                             : std::optional(leaderboard_stats(defined, convention)));
    }
  }
  for (const auto& [k, unused] : lb.rows.front().topk) {
    std::vector<double> column;
    for (const auto& row : lb.rows) column.push_back(row.topk.at(k));
    lb.topk_footer[k] = leaderboard_stats(column, convention);
  }
  std::vector<double> means;
  for (const auto& row : lb.rows) means.push_back(row.topk_mean);
  lb.topk_mean_footer = leaderboard_stats(means, convention);
  return lb;
}

void to_json(nlohmann::json& j, const Leaderboard& lb) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : lb.rows) {
    nlohmann::json ap = nlohmann::json::object();
    for (Task t : kAllTasks) ap[std::string(task_name(t))] = row.ap[task_index(t)];
    nlohmann::json topk = nlohmann::json::object();
    for (const auto& [k, v] : row.topk) topk[std::to_string(k)] = v;
    rows.push_back({{"team_id", row.team_id}, {"ap", ap}, {"topk", topk}, {"topk_mean", row.topk_mean}});
  }
  nlohmann::json footer = nlohmann::json::object();
  for (Task t : kAllTasks) footer[std::string(task_name(t))] = stats_json(lb.footer[task_index(t)]);
  nlohmann::json topk_footer = nlohmann::json::object();
  for (const auto& [k, s] : lb.topk_footer) topk_footer[std::to_string(k)] = stats_json(s);
  nlohmann::json per_class = nlohmann::json::object();
  for (Task t : kAllTasks) {
    const PerClassTable& table = lb.per_class[task_index(t)];
    nlohmann::json values = nlohmann::json::array();
    for (const auto& v : table.values) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& x : v) row.push_back(optional_json(x));
      values.push_back(row);
    }
    nlohmann::json table_footer = nlohmann::json::array();
    for (const auto& s : table.footer) {
      table_footer.push_back(s ? stats_json(*s) : nlohmann::json());
    }
    per_class[std::string(task_name(t))] = {{"class_labels", table.class_labels},
                                            {"teams", table.teams},
                                            {"values", values},
                                            {"footer", table_footer}};
  }
  j = nlohmann::json{{"sort_key", task_name(lb.sort_key)},
                     {"rows", rows},
                     {"footer", footer},
                     {"topk_footer", topk_footer},
                     {"topk_mean_footer", stats_json(lb.topk_mean_footer)},
                     {"per_class", per_class}};
}

void from_json(const nlohmann::json& j, Leaderboard& lb) {
  const auto sort_key = parse_task(j.at("sort_key").get<std::string>());
  if (!sort_key) throw std::invalid_argument("leaderboard: unknown sort key");
  lb = Leaderboard{};
  lb.sort_key = *sort_key;
  for (const auto& r : j.at("rows")) {
    LeaderboardRow row;
    row.team_id = r.at("team_id").get<std::string>();
    for (Task t : kAllTasks) {
      row.ap[task_index(t)] = r.at("ap").at(std::string(task_name(t))).get<double>();
    }
    for (const auto& [k, v] : r.at("topk").items()) row.topk[std::stoi(k)] = v.get<double>();
    row.topk_mean = r.at("topk_mean").get<double>();
    lb.rows.push_back(std::move(row));
  }
  for (Task t : kAllTasks) {
    lb.footer[task_index(t)] = stats_from_json(j.at("footer").at(std::string(task_name(t))));
    const auto& table_json = j.at("per_class").at(std::string(task_name(t)));
    PerClassTable& table = lb.per_class[task_index(t)];
    table.class_labels = table_json.at("class_labels").get<std::vector<std::string>>();
    table.teams = table_json.at("teams").get<std::vector<std::string>>();
    for (const auto& row : table_json.at("values")) {
      ApVector v;
      for (const auto& x : row) {
        v.push_back(x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()));
      }
      table.values.push_back(std::move(v));
    }
    for (const auto& s : table_json.at("footer")) {
      table.footer.push_back(s.is_null() ? std::nullopt : std::optional(stats_from_json(s)));
    }
  }
  for (const auto& [k, s] : j.at("topk_footer").items()) lb.topk_footer[std::stoi(k)] = stats_from_json(s);
  lb.topk_mean_footer = stats_from_json(j.at("topk_mean_footer"));
}

std::string leaderboard_csv(const Leaderboard& lb) {
  std::string out = "team";
  for (Task t : kAllTasks) out += ",AP_" + std::string(task_name(t));
  out += "\n";
  for (const auto& row : lb.rows) {
    out += row.team_id;
    for (Task t : kAllTasks) out += "," + percent(row.ap[task_index(t)]);
    out += "\n";
  }
  out += "mean_std";
  for (Task t : kAllTasks) out += "," + stats_cell(lb.footer[task_index(t)]);
  out += "\n";
  return out;
}

std::string per_class_csv(const Leaderboard& lb, Task task) {
  const PerClassTable& table = lb.per_class[task_index(task)];
  std::string out = "team";
  for (const auto& label : table.class_labels) out += "," + label;
  out += ",mean\n";
  for (std::size_t r = 0; r < table.teams.size(); ++r) {
    out += table.teams[r];
    for (const auto& v : table.values[r]) out += "," + (v ? percent(*v) : std::string());
    out += "," + percent(lb.rows[r].ap[task_index(task)]) + "\n";
  }
  out += "mean_std";
  for (const auto& s : table.footer) out += "," + (s ? stats_cell(*s) : std::string());
  out += "," + stats_cell(lb.footer[task_index(task)]) + "\n";
  return out;
}

std::string topk_csv(const Leaderboard& lb) {
  std::string out = "team";
  const auto& ks = lb.topk_footer;
  for (const auto& [k, unused] : ks) out += ",top" + std::to_string(k);
  if (!ks.empty()) {
    out += ",top" + std::to_string(ks.begin()->first) + "-" + std::to_string(ks.rbegin()->first);
  }
  out += "\n";
  for (const auto& row : lb.rows) {
    out += row.team_id;
    for (const auto& [k, v] : row.topk) out += "," + percent(v);
    out += "," + percent(row.topk_mean) + "\n";
  }
  out += "mean_std";
  for (const auto& [k, s] : ks) out += "," + stats_cell(s);
  out += "," + stats_cell(lb.topk_mean_footer) + "\n";
  return out;
}

DisplayTable parse_display_csv(std::string_view text) {
  DisplayTable table;
  const auto all_lines = csv::lines(text);
  if (all_lines.empty()) throw ParseError("display table is empty");
  for (auto cell : csv::split(all_lines.front())) table.header.emplace_back(cell);
  for (std::size_t i = 1; i < all_lines.size(); ++i) {
    if (csv::trim(all_lines[i]).empty()) continue;
    std::vector<std::string> cells;
    for (auto cell : csv::split(all_lines[i])) cells.emplace_back(cell);
    if (cells.size() != table.header.size()) {
      throw ParseError("display table line " + std::to_string(i + 1) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(table.header.size()));
    }
    if (cells.front() == "mean_std") {
      table.footer = std::move(cells);
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

std::vector<std::filesystem::path> emit_tables(const Leaderboard& lb,
                                               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    csv::write_file(path, content);
    written.push_back(path);
  };
  emit("leaderboard.csv", leaderboard_csv(lb));
  emit("leaderboard.json", nlohmann::json(lb).dump(2) + "\n");
  for (Task t : kAllTasks) {
    emit("per_class_" + std::string(task_name(t)) + ".csv", per_class_csv(lb, t));
  }
  emit("topk.csv", topk_csv(lb));
  return written;
}

}  // namespace tripletbench
