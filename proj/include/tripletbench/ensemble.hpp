#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tripletbench/dataset_io.hpp"
#include "tripletbench/matrix.hpp"
#include "tripletbench/metrics.hpp"
#include "tripletbench/taxonomy.hpp"

namespace tripletbench {

enum class EnsembleVariant {
  kAverage,
  kWeightedAverage,
  kSoftVote,
  kDeep,
  kDeepWeighted,
  kDeepPerClassWeighted,
};

std::string_view variant_name(EnsembleVariant variant);
std::optional<EnsembleVariant> parse_variant(std::string_view name);
bool is_trainable(EnsembleVariant variant);

// Element-wise arithmetic mean of N aligned runs.
Run combine_average(std::span<const Run> runs);

// Element-wise sum of w[m] * runs[m]. Weights must be non-negative and sum to
// one (within 1e-9). Uniform weights give exactly combine_average.
Run combine_weighted_average(std::span<const Run> runs, std::span<const double> weights);

// Per cell: max over models when a strict majority scores >= threshold,
// otherwise min.
Run combine_soft_vote(std::span<const Run> runs, double threshold = 0.5);

// w[m] = AP_IVT(m) / sum_j AP_IVT(j), each run scored against the calibration
// ground truth. Only calibration videos are used.
std::vector<double> compute_performance_weights(std::span<const Run> runs,
                                                const GroundTruth& calibration,
                                                const TripletTaxonomy& taxonomy,
                                                bool apply_mask = true,
                                                std::size_t threads = 1);

inline constexpr double kDefaultSelectionThresholdPercent = 30.0;

// Indices of models whose AP (a fraction) exceeds threshold_percent / 100.
std::vector<std::size_t> select_models(std::span<const double> ap,
                                       double threshold_percent = kDefaultSelectionThresholdPercent);

struct EnsembleHyper {
  double learning_rate = 1e-3;
  int epochs = 50;
  std::size_t batch_size = 256;
  std::size_t hidden = 0;  // 0 means 2 * C
  std::uint64_t seed = 42;
  double soft_vote_threshold = 0.5;

  friend bool operator==(const EnsembleHyper&, const EnsembleHyper&) = default;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Parameters of any combiner. `parameters` is a flat vector whose layout
// depends on the variant:
//   weighted_average:          w[N]                  (used as given)
//   deep_weighted:             raw[N]                (softmax at apply)
//   deep_per_class_weighted:   raw[N*C], row-major N x C (softmax over N per class)
//   deep:                      W1[(N*C) x H], b1[H], W2[H x C], b2[C]
//   average, soft_vote:        empty
class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(EnsembleVariant variant, std::size_t num_models, std::size_t num_classes,
                EnsembleHyper hyper = {});

  EnsembleVariant variant() const { return variant_; }
  std::size_t num_models() const { return num_models_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t hidden() const { return hidden_; }
  const EnsembleHyper& hyper() const { return hyper_; }

  std::span<double> parameters() { return parameters_; }
  std::span<const double> parameters() const { return parameters_; }
  std::size_t parameter_count() const { return parameters_.size(); }

  // Seeded initialization: zero raw weights for the weighted variants,
  // uniform fan-in scaled weights for the deep network.
  void initialize();

  // Effective convex weights: N values (deep_weighted, weighted_average) or
  // N x C row-major (per-class).
  std::vector<double> effective_weights() const;

  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // full-data loss after each epoch

  friend bool operator==(const EnsembleModel&, const EnsembleModel&) = default;

 private:
  friend void from_json(const nlohmann::json& j, EnsembleModel& m);

  EnsembleVariant variant_ = EnsembleVariant::kAverage;
  std::size_t num_models_ = 0;
  std::size_t num_classes_ = 0;
  std::size_t hidden_ = 0;
  EnsembleHyper hyper_;
  std::vector<double> parameters_;
};

void to_json(nlohmann::json& j, const EnsembleModel& m);
void from_json(const nlohmann::json& j, EnsembleModel& m);

// Frames gathered from N model runs, with matching targets.
struct TrainingBatch {
  std::vector<ScoreMatrix> inputs;  // one frames x C matrix per model
  LabelMatrix targets;              // frames x C

  std::size_t frames() const { return targets.rows(); }
};

// Combined output for each frame of the batch (frames x C).
ScoreMatrix ensemble_forward(const EnsembleModel& model, const TrainingBatch& batch);

// Mean binary cross-entropy over all cells of the batch. When `gradient` is
// non-null it receives dLoss/dParameters (resized to parameter_count()).
double ensemble_loss(const EnsembleModel& model, const TrainingBatch& batch,
                     std::vector<double>* gradient = nullptr);

// Mini-batch Adam on mean BCE. Deterministic for a given seed. The returned
// model holds the parameters with the lowest full-data loss seen, so
// final_loss <= initial_loss. Throws TrainingDiverged on a non-finite loss.
EnsembleModel train_deep_ensemble(std::span<const Run> runs, const GroundTruth& gt,
                                  EnsembleVariant variant, const EnsembleHyper& hyper = {});

// Applies any variant to aligned runs. Throws when N or C differ from the
// trained dimensions.
Run apply_ensemble(const EnsembleModel& model, std::span<const Run> runs);

}  // namespace tripletbench
