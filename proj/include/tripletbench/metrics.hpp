#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tripletbench/dataset_io.hpp"
#include "tripletbench/disentangle.hpp"
#include "tripletbench/matrix.hpp"
#include "tripletbench/taxonomy.hpp"

namespace tripletbench {

// Per-class AP; nullopt where the class has no positive label.
using ApVector = std::vector<std::optional<double>>;

// Non-interpolated average precision: mean of precision@k over the ranks k of
// the positives, ranking by descending score with ties broken by ascending
// sample index. nullopt when there are no positives. Throws on length
// mismatch, empty input, or a NaN score.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> labels);

// Column-wise AP over the frames of one video.
ApVector video_class_ap(const ScoreMatrix& scores, const LabelMatrix& labels);

struct AggregatedAp {
  ApVector per_class;
  double mean = 0.0;
  std::size_t num_classes_averaged = 0;
};

// Per class: mean over the videos where the class is defined. Overall: mean of
// the defined per-class values whose mask entry is true. An empty mask keeps
// every class. Throws when no video is given or no masked-in class is defined.
AggregatedAp aggregate_ap(const std::vector<ApVector>& per_video,
                          const std::vector<bool>& class_mask = {});

inline const std::vector<int> kDefaultTopK = {5, 10, 15, 20};

// Running sums for top-K accuracy so videos can be processed one at a time.
struct TopKCounts {
  std::vector<int> ks;
  std::vector<double> hit_ratio_sum;  // per K
  std::size_t frames = 0;             // frames with at least one positive

  void merge(const TopKCounts& other);
};

TopKCounts topk_counts(const ScoreMatrix& scores, const LabelMatrix& labels,
                       const std::vector<int>& ks);

struct TopKAccuracy {
  std::map<int, double> by_k;
  double mean = 0.0;  // average over the Ks
  std::size_t frames = 0;

  friend bool operator==(const TopKAccuracy&, const TopKAccuracy&) = default;
};

TopKAccuracy finalize_topk(const TopKCounts& counts);

// Per frame with a non-empty ground truth: |GT ∩ top-K| / |GT|, with ties in
// the score ranking broken by ascending class id; averaged over all such
// frames of all videos.
TopKAccuracy topk_accuracy(const Run& run, const GroundTruth& gt,
                           const std::vector<int>& ks = kDefaultTopK);

enum class StdConvention { kSample, kPopulation };

struct LeaderboardStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;

  friend bool operator==(const LeaderboardStats&, const LeaderboardStats&) = default;
};

// Mean and standard deviation (n - 1 denominator by default). A single value
// has std 0.
LeaderboardStats leaderboard_stats(std::span<const double> values,
                                   StdConvention convention = StdConvention::kSample);

struct TaskResult {
  std::vector<std::string> class_labels;
  ApVector per_class_ap;
  double mean_ap = 0.0;
  std::size_t num_ranked_classes = 0;
  // Per video (same order as EvalReport::video_ids), per class.
  std::vector<ApVector> per_video;

  friend bool operator==(const TaskResult&, const TaskResult&) = default;
};

struct EvalReport {
  std::string team_id;
  bool masked = true;
  std::vector<std::string> video_ids;
  std::array<TaskResult, 6> tasks;  // indexed by task_index()
  TopKAccuracy topk;

  const TaskResult& task(Task t) const { return tasks[task_index(t)]; }

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

struct EvalOptions {
  bool apply_mask = true;
  std::vector<int> ks = kDefaultTopK;  // empty skips top-K
  bool keep_per_video = true;
};

// Intermediate result for one video.
struct VideoEvaluation {
  std::string video_id;
  std::array<ApVector, 6> per_task;
  TopKCounts topk;
};

class Evaluator {
 public:
  Evaluator(const TripletTaxonomy& taxonomy, EvalOptions options = {});

  VideoEvaluation evaluate_video(std::string video_id, const ScoreMatrix& scores,
                                 const LabelMatrix& labels) const;

  // Aggregates per-video results in the given order.
  EvalReport finalize(std::string team_id, const std::vector<VideoEvaluation>& videos) const;

  // Masked (or unmasked) mean AP of one task for a single frames x C block.
  std::optional<double> block_mean_ap(const ScoreMatrix& scores, const LabelMatrix& labels,
                                      Task task) const;

  const Disentangler& disentangler() const { return disentangler_; }
  const EvalOptions& options() const { return options_; }
  std::vector<bool> class_mask(Task task) const;

 private:
  Disentangler disentangler_;
  EvalOptions options_;
};

// Videos are taken in ground-truth order; every ground-truth video must be in
// the run with the same shape.
EvalReport evaluate_suite(const Run& run, const GroundTruth& gt, const TripletTaxonomy& taxonomy,
                          const EvalOptions& options = {}, std::size_t threads = 1);

}  // namespace tripletbench
