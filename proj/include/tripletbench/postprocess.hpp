#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tripletbench/dataset_io.hpp"
#include "tripletbench/disentangle.hpp"
#include "tripletbench/taxonomy.hpp"

namespace tripletbench {

inline constexpr std::size_t kDefaultRareClassCount = 63;

struct ClassFrequencies {
  std::vector<std::uint64_t> counts;  // positive frames per triplet class
  std::vector<std::size_t> rare_set;  // ascending count, ties by ascending id

  bool is_rare(std::size_t triplet_id) const;
};

// The `rare_count` lowest-count classes. Throws when rare_count > counts.size().
ClassFrequencies rare_classes(std::vector<std::uint64_t> counts,
                              std::size_t rare_count = kDefaultRareClassCount);

// Column sums of every label row of the corpus.
ClassFrequencies class_frequencies(const GroundTruth& gt,
                                   std::size_t rare_count = kDefaultRareClassCount);

// Frequency file: CSV with header `triplet_id,count`.
std::string format_frequencies_csv(const ClassFrequencies& freq);
std::vector<std::uint64_t> parse_frequencies_csv(std::string_view text);

struct AdjustmentCoefficients {
  double verb = 0.03;
  double target = 0.97;
};

// For every rare triplet t = (i, v, tau):
//   y'[t] = P_I[i] * (verb * P_V[v] + target * P_T[tau])
// with the component probabilities taken from `views`. Other entries are
// copied unchanged.
std::vector<double> low_frequency_adjust(std::span<const double> triplet_probs,
                                         const ComponentViews& views,
                                         const TripletTaxonomy& taxonomy,
                                         const ClassFrequencies& rare,
                                         const AdjustmentCoefficients& coefficients = {});

// Applies the adjustment frame by frame, deriving the views from each frame.
Run adjust_run(const Run& run, const TripletTaxonomy& taxonomy, const ClassFrequencies& rare,
               const AdjustmentCoefficients& coefficients = {}, std::size_t threads = 1);

}  // namespace tripletbench
