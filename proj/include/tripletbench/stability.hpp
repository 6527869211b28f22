#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tripletbench/dataset_io.hpp"
#include "tripletbench/matrix.hpp"
#include "tripletbench/taxonomy.hpp"

namespace tripletbench {

class NoValidWindow : public std::runtime_error {
 public:
  NoValidWindow() : std::runtime_error("NO_VALID_WINDOW: no video is long enough for a clip") {}
};

struct ClipSample {
  std::string video_id;
  std::size_t start_frame = 0;
  std::size_t length = 0;

  friend bool operator==(const ClipSample&, const ClipSample&) = default;
};

// Draws n windows uniformly (with replacement) over every valid
// (video, start) position. Videos shorter than `length` contribute none.
std::vector<ClipSample> sample_batches(const GroundTruth& gt, std::size_t n = 30,
                                       std::size_t length = 100, std::uint64_t seed = 42);

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;           // sum of ranks of positive differences
  std::size_t n_effective = 0;   // non-zero differences
  bool exact = true;
};

// Largest effective sample size handled by exact enumeration of the null
// distribution; larger samples use the normal approximation.
inline constexpr std::size_t kWilcoxonExactLimit = 15;

enum class WilcoxonMethod { kAuto, kExact, kNormal };

// Two-sided Wilcoxon signed-rank test. Zero differences are dropped, tied
// absolute differences get averaged ranks. kAuto uses the exact null
// distribution for n <= kWilcoxonExactLimit, otherwise the normal
// approximation with continuity and tie correction. kExact is limited to
// n <= 62. No non-zero difference gives p = 1.
WilcoxonResult wilcoxon_signed_rank_test(std::span<const double> diffs,
                                         WilcoxonMethod method = WilcoxonMethod::kAuto);

inline double wilcoxon_signed_rank(std::span<const double> diffs) {
  return wilcoxon_signed_rank_test(diffs).p_value;
}

struct StabilityOptions {
  std::size_t n_batches = 30;
  std::size_t clip_length = 100;
  std::uint64_t seed = 42;
  bool apply_mask = true;
};

struct StabilityMatrix {
  std::vector<std::string> teams;
  Matrix<double> p;  // teams x teams
  std::size_t n_batches = 0;
  std::size_t clip_length = 0;
  std::uint64_t seed = 0;
  std::vector<ClipSample> clips;
  // Per team, per clip: mean AP_IVT over the clip (NaN when undefined).
  std::vector<std::vector<double>> clip_scores;
  // Clips whose score is defined (shared by all teams).
  std::size_t clips_used = 0;
};

// Scores every team on the same clip set and fills p(a, b) with the test over
// the per-clip differences a - b. The diagonal is 1.
StabilityMatrix stability_matrix(std::span<const Run> team_runs, const GroundTruth& gt,
                                 const TripletTaxonomy& taxonomy,
                                 const StabilityOptions& options = {}, std::size_t threads = 1);

void to_json(nlohmann::json& j, const StabilityMatrix& m);
std::string stability_csv(const StabilityMatrix& m);

}  // namespace tripletbench
