#include "tripletbench/postprocess.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "tripletbench/csv.hpp"
#include "tripletbench/parallel.hpp"

namespace tripletbench {

bool ClassFrequencies::is_rare(std::size_t triplet_id) const {
  return std::find(rare_set.begin(), rare_set.end(), triplet_id) != rare_set.end();
}

ClassFrequencies rare_classes(std::vector<std::uint64_t> counts, std::size_t rare_count) {
  if (rare_count > counts.size()) {
    throw std::invalid_argument("rare class count " + std::to_string(rare_count) +
                                " exceeds the " + std::to_string(counts.size()) + " classes");
  }
  ClassFrequencies out;
  out.counts = std::move(counts);
  std::vector<std::size_t> order(out.counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.counts[a] < out.counts[b];
  });
  out.rare_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(rare_count));
  return out;
}

ClassFrequencies class_frequencies(const GroundTruth& gt, std::size_t rare_count) {
  if (gt.videos.empty()) throw std::invalid_argument("class_frequencies: empty corpus");
  std::vector<std::uint64_t> counts(gt.num_classes(), 0);
  for (const auto& video : gt.videos) {
    if (video.labels.cols() != counts.size()) {
      throw std::invalid_argument("class_frequencies: class count differs in " + video.video_id);
    }
    for (std::size_t f = 0; f < video.labels.rows(); ++f) {
      const auto row = video.labels.row(f);
      for (std::size_t c = 0; c < row.size(); ++c) counts[c] += row[c];
    }
  }
  return rare_classes(std::move(counts), rare_count);
}

std::string format_frequencies_csv(const ClassFrequencies& freq) {
  std::string out = "triplet_id,count\n";
  for (std::size_t c = 0; c < freq.counts.size(); ++c) {
    out += std::to_string(c) + "," + std::to_string(freq.counts[c]) + "\n";
  }
  return out;
}

std::vector<std::uint64_t> parse_frequencies_csv(std::string_view text) {
  const auto all_lines = csv::lines(text);
  if (all_lines.empty() || csv::trim(all_lines.front()) != "triplet_id,count") {
    throw ParseError("frequency file must start with header triplet_id,count");
  }
  std::vector<std::optional<std::uint64_t>> slots;
  for (std::size_t i = 1; i < all_lines.size(); ++i) {
    if (csv::trim(all_lines[i]).empty()) continue;
    const auto cells = csv::split(all_lines[i]);
    std::size_t id = 0, count = 0;
    if (cells.size() != 2 || !csv::parse_size(cells[0], id) || !csv::parse_size(cells[1], count)) {
      throw ParseError("frequency file line " + std::to_string(i + 1) + " is malformed");
    }
    if (slots.size() <= id) slots.resize(id + 1);
    if (slots[id]) throw ParseError("frequency file repeats triplet id " + std::to_string(id));
    slots[id] = count;
  }
  std::vector<std::uint64_t> counts;
  for (std::size_t id = 0; id < slots.size(); ++id) {
    if (!slots[id]) throw ParseError("frequency file lacks triplet id " + std::to_string(id));
    counts.push_back(*slots[id]);
  }
  return counts;
}

std::vector<double> low_frequency_adjust(std::span<const double> triplet_probs,
                                         const ComponentViews& views,
                                         const TripletTaxonomy& taxonomy,
                                         const ClassFrequencies& rare,
                                         const AdjustmentCoefficients& coefficients) {
  if (triplet_probs.size() != taxonomy.num_triplets()) {
    throw std::invalid_argument("low_frequency_adjust: triplet vector length differs from taxonomy");
  }
  std::vector<double> out(triplet_probs.begin(), triplet_probs.end());
  for (std::size_t t : rare.rare_set) {
    const auto& c = taxonomy.components_of(t);
    if (c.instrument >= views.instrument.size() || c.verb >= views.verb.size() ||
        c.target >= views.target.size()) {
      throw std::invalid_argument("low_frequency_adjust: component of triplet " +
                                  std::to_string(t) + " missing from views");
    }
    out[t] = views.instrument[c.instrument] *
             (coefficients.verb * views.verb[c.verb] + coefficients.target * views.target[c.target]);
  }
  return out;
}

Run adjust_run(const Run& run, const TripletTaxonomy& taxonomy, const ClassFrequencies& rare,
               const AdjustmentCoefficients& coefficients, std::size_t threads) {
  const Disentangler disentangler(taxonomy);
  Run out;
  out.team_id = run.team_id;
  out.videos.resize(run.videos.size());
  parallel_for(run.videos.size(), threads, [&](std::size_t v) {
    const VideoScores& video = run.videos[v];
    ScoreMatrix adjusted(video.probs.rows(), video.probs.cols());
    for (std::size_t f = 0; f < video.probs.rows(); ++f) {
      const auto row = video.probs.row(f);
      const auto result =
          low_frequency_adjust(row, disentangler.probs(row), taxonomy, rare, coefficients);
      std::copy(result.begin(), result.end(), adjusted.row(f).begin());
    }
    out.videos[v] = {video.video_id, std::move(adjusted)};
  });
  return out;
}

}  // namespace tripletbench
