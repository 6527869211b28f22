#include "tripletbench/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tripletbench/csv.hpp"
#include "tripletbench/metrics.hpp"
#include "tripletbench/parallel.hpp"
#include "tripletbench/rng.hpp"

namespace tripletbench {

std::vector<ClipSample> sample_batches(const GroundTruth& gt, std::size_t n, std::size_t length,
                                       std::uint64_t seed) {
  if (length == 0) throw std::invalid_argument("clip length must be positive");
  // Cumulative count of valid start positions per eligible video.
  std::vector<std::pair<const VideoLabels*, std::uint64_t>> eligible;
  std::uint64_t total = 0;
  for (const auto& video : gt.videos) {
    if (video.labels.rows() < length) continue;
    total += video.labels.rows() - length + 1;
    eligible.emplace_back(&video, total);
  }
  if (eligible.empty()) throw NoValidWindow();

  Rng rng(seed);
  std::vector<ClipSample> clips;
  clips.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t position = rng.below(total);
    const auto it = std::upper_bound(
        eligible.begin(), eligible.end(), position,
        [](std::uint64_t pos, const auto& entry) { return pos < entry.second; });
    const std::uint64_t before = it == eligible.begin() ? 0 : std::prev(it)->second;
    clips.push_back({it->first->video_id, static_cast<std::size_t>(position - before), length});
  }
  return clips;
}

namespace {

// Midranks of |d| (1-based), for the non-zero differences.
std::vector<double> average_ranks(const std::vector<double>& magnitudes) {
  const std::size_t n = magnitudes.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank_test(std::span<const double> diffs, WilcoxonMethod method) {
  std::vector<double> nonzero;
  for (double d : diffs) {
    if (std::isnan(d)) throw std::invalid_argument("wilcoxon: NaN difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  WilcoxonResult result;
  result.n_effective = nonzero.size();
  if (nonzero.empty()) return result;

  std::vector<double> magnitudes;
  for (double d : nonzero) magnitudes.push_back(std::abs(d));
  const std::vector<double> ranks = average_ranks(magnitudes);
  const std::size_t n = nonzero.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (nonzero[i] > 0) result.w_plus += ranks[i];
  }

  const bool exact = method == WilcoxonMethod::kExact ||
                     (method == WilcoxonMethod::kAuto && n <= kWilcoxonExactLimit);
  if (exact && n > 62) throw std::invalid_argument("wilcoxon: exact test limited to 62 differences");
  if (exact) {
    // Midranks are multiples of 1/2, so doubled ranks are integers and the
    // null distribution of 2 W+ is a subset-sum count over them.
    std::vector<std::size_t> doubled(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<std::uint64_t> ways(total + 1, 0);
    ways[0] = 1;
    for (std::size_t r : doubled) {
      for (std::size_t s = total; s >= r; --s) {
        ways[s] += ways[s - r];
        if (s == r) break;
      }
    }
    const auto observed = static_cast<std::size_t>(std::lround(2.0 * result.w_plus));
    std::uint64_t lower = 0, upper = 0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s <= observed) lower += ways[s];
      if (s >= observed) upper += ways[s];
    }
    const double outcomes = std::ldexp(1.0, static_cast<int>(n));
    const double tail = static_cast<double>(std::min(lower, upper)) / outcomes;
    result.p_value = std::min(1.0, 2.0 * tail);
    result.exact = true;
    return result;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    variance -= (t * t * t - t) / 48.0;
    i = j;
  }
  const double z = std::max(0.0, std::abs(result.w_plus - mean) - 0.5) / std::sqrt(variance);
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  result.exact = false;
  return result;
}

StabilityMatrix stability_matrix(std::span<const Run> team_runs, const GroundTruth& gt,
                                 const TripletTaxonomy& taxonomy,
                                 const StabilityOptions& options, std::size_t threads) {
  if (team_runs.size() < 2) throw std::invalid_argument("stability needs at least two teams");
  StabilityMatrix out;
  out.n_batches = options.n_batches;
  out.clip_length = options.clip_length;
  out.seed = options.seed;
  out.clips = sample_batches(gt, options.n_batches, options.clip_length, options.seed);
  for (const auto& run : team_runs) out.teams.push_back(run.team_id);

  EvalOptions eval_options;
  eval_options.apply_mask = options.apply_mask;
  const Evaluator evaluator(taxonomy, eval_options);

  const std::size_t teams = team_runs.size();
  const std::size_t clips = out.clips.size();
  out.clip_scores.assign(teams, std::vector<double>(clips, std::numeric_limits<double>::quiet_NaN()));
  parallel_for(teams * clips, threads, [&](std::size_t job) {
    const std::size_t team = job / clips;
    const std::size_t clip = job % clips;
    const ClipSample& sample = out.clips[clip];
    const VideoLabels* truth = gt.find(sample.video_id);
    const VideoScores* scores = team_runs[team].find(sample.video_id);
    if (scores == nullptr || !scores->probs.same_shape(truth->labels)) {
      throw std::invalid_argument("run " + team_runs[team].team_id +
                                  " is not aligned with ground truth video " + sample.video_id);
    }
    const auto value = evaluator.block_mean_ap(
        scores->probs.slice_rows(sample.start_frame, sample.length),
        truth->labels.slice_rows(sample.start_frame, sample.length), Task::kIVT);
    if (value) out.clip_scores[team][clip] = *value;
  });

  // A clip's score is undefined exactly when the clip has no ranked positive,
  // which depends on the ground truth only; such clips are skipped for all.
  std::vector<std::size_t> used;
  for (std::size_t c = 0; c < clips; ++c) {
    if (!std::isnan(out.clip_scores[0][c])) used.push_back(c);
  }
  out.clips_used = used.size();
  if (used.empty()) throw std::invalid_argument("no sampled clip contains a ranked positive");

  out.p = Matrix<double>(teams, teams, 1.0);
  std::vector<double> diffs(used.size());
  for (std::size_t a = 0; a < teams; ++a) {
    for (std::size_t b = 0; b < teams; ++b) {
      if (a == b) continue;
      for (std::size_t i = 0; i < used.size(); ++i) {
        diffs[i] = out.clip_scores[a][used[i]] - out.clip_scores[b][used[i]];
      }
      out.p(a, b) = wilcoxon_signed_rank(diffs);
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const StabilityMatrix& m) {
  nlohmann::json p = nlohmann::json::array();
  for (std::size_t r = 0; r < m.p.rows(); ++r) {
    const auto row = m.p.row(r);
    p.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json clips = nlohmann::json::array();
  for (const auto& c : m.clips) {
    clips.push_back({{"video_id", c.video_id}, {"start_frame", c.start_frame}, {"length", c.length}});
  }
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& team : m.clip_scores) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : team) row.push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(v));
    scores.push_back(row);
  }
  j = nlohmann::json{{"teams", m.teams},
                     {"p", p},
                     {"n_batches", m.n_batches},
                     {"clip_length", m.clip_length},
                     {"seed", m.seed},
                     {"clips", clips},
                     {"clips_used", m.clips_used},
                     {"clip_scores", scores},
                     {"significance_level", 0.05}};
}

std::string stability_csv(const StabilityMatrix& m) {
  std::string out = "team";
  for (const auto& t : m.teams) out += "," + t;
  out += "\n";
  for (std::size_t a = 0; a < m.teams.size(); ++a) {
    out += m.teams[a];
    for (std::size_t b = 0; b < m.teams.size(); ++b) out += "," + csv::format_double(m.p(a, b));
    out += "\n";
  }
  return out;
}

}  // namespace tripletbench
