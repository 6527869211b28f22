#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tripletbench/matrix.hpp"

namespace tripletbench {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VideoScores {
  std::string video_id;
  ScoreMatrix probs;  // frames x classes

  friend bool operator==(const VideoScores&, const VideoScores&) = default;
};

// One team's predictions over a set of videos.
struct Run {
  std::string team_id;
  std::vector<VideoScores> videos;

  const VideoScores* find(std::string_view video_id) const;
  std::size_t num_classes() const {
    return videos.empty() ? 0 : videos.front().probs.cols();
  }

  friend bool operator==(const Run&, const Run&) = default;
};

struct VideoLabels {
  std::string video_id;
  LabelMatrix labels;  // frames x classes, entries 0/1

  friend bool operator==(const VideoLabels&, const VideoLabels&) = default;
};

struct GroundTruth {
  std::vector<VideoLabels> videos;

  const VideoLabels* find(std::string_view video_id) const;
  std::size_t num_classes() const {
    return videos.empty() ? 0 : videos.front().labels.cols();
  }
  std::map<std::string, std::size_t> frame_counts() const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

// Parses one video's score CSV: one frame per line, comma separated, no
// header. num_classes == 0 takes the column count from the first row; every
// row must then agree. Values are not range checked here.
ScoreMatrix parse_scores_csv(std::string_view text, std::size_t num_classes = 0,
                             std::string_view context = "scores");

// Same layout with 0/1 cells.
LabelMatrix parse_labels_csv(std::string_view text, std::size_t num_classes = 0,
                             std::string_view context = "labels");

std::string format_scores_csv(const ScoreMatrix& probs);
std::string format_labels_csv(const LabelMatrix& labels);

// Video ids (file stems) of the *.csv files in a run or ground-truth
// directory, sorted.
std::vector<std::string> list_videos(const std::filesystem::path& dir);

ScoreMatrix read_video_scores(const std::filesystem::path& dir, std::string_view video_id,
                              std::size_t num_classes = 0);
LabelMatrix read_video_labels(const std::filesystem::path& dir, std::string_view video_id,
                              std::size_t num_classes = 0);

// Run directory layout: <team_id>/<video_id>.csv. The team id is the
// directory name.
Run parse_run(const std::filesystem::path& dir, std::size_t num_classes = 0,
              std::size_t threads = 1);
void write_run(const Run& run, const std::filesystem::path& dir);

GroundTruth parse_ground_truth(const std::filesystem::path& dir, std::size_t num_classes = 0,
                               std::size_t threads = 1);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& dir);

enum class Severity { kError, kWarning };

struct Finding {
  Severity severity = Severity::kError;
  std::string video_id;
  std::optional<std::size_t> frame;
  std::optional<std::size_t> class_index;
  std::string code;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  bool pass = true;
  std::vector<Finding> findings;

  void add(Finding finding);
  // Sorts findings by (video, frame, class, code) and recomputes `pass`.
  void finalize();
};

void to_json(nlohmann::json& j, const Finding& f);
void to_json(nlohmann::json& j, const ValidationReport& r);
void from_json(const nlohmann::json& j, Finding& f);
void from_json(const nlohmann::json& j, ValidationReport& r);

namespace finding_code {
inline constexpr std::string_view kMissingVideo = "MISSING_VIDEO";
inline constexpr std::string_view kExtraVideo = "EXTRA_VIDEO";
inline constexpr std::string_view kFrameCount = "FRAME_COUNT";
inline constexpr std::string_view kClassCount = "CLASS_COUNT";
inline constexpr std::string_view kRange = "RANGE";
inline constexpr std::string_view kNonFinite = "NON_FINITE";
inline constexpr std::string_view kConstantFrames = "CONSTANT_FRAMES";
inline constexpr std::string_view kParse = "PARSE";
inline constexpr std::string_view kCausality = "CAUSALITY";
inline constexpr std::string_view kTruncated = "TRUNCATED";
}  // namespace finding_code

// Per (video, code), at most this many cell-level findings are listed before
// a single TRUNCATED note.
inline constexpr std::size_t kMaxFindingsPerCode = 50;

ValidationReport validate_submission(const Run& run,
                                     const std::map<std::string, std::size_t>& expected_frames,
                                     std::size_t num_classes);

inline constexpr double kDefaultCausalityTolerance = 1e-6;

// Checks that re-running a model on frame prefixes reproduces its outputs on
// the shared frames. Every prefix video must exist in `full` and be no longer
// than it.
ValidationReport causality_audit(const Run& full, const Run& prefix,
                                 double tolerance = kDefaultCausalityTolerance);

}  // namespace tripletbench
