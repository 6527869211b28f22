#include "tripletbench/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ensemble_internal.hpp"
#include "tripletbench/rng.hpp"

namespace tripletbench {

std::string_view variant_name(EnsembleVariant variant) {
  switch (variant) {
    case EnsembleVariant::kAverage: return "average";
    case EnsembleVariant::kWeightedAverage: return "weighted_average";
    case EnsembleVariant::kSoftVote: return "soft_vote";
    case EnsembleVariant::kDeep: return "deep";
    case EnsembleVariant::kDeepWeighted: return "deep_weighted";
    case EnsembleVariant::kDeepPerClassWeighted: return "deep_per_class_weighted";
  }
  return "?";
}

std::optional<EnsembleVariant> parse_variant(std::string_view name) {
  for (auto v : {EnsembleVariant::kAverage, EnsembleVariant::kWeightedAverage,
                 EnsembleVariant::kSoftVote, EnsembleVariant::kDeep,
                 EnsembleVariant::kDeepWeighted, EnsembleVariant::kDeepPerClassWeighted}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

bool is_trainable(EnsembleVariant variant) {
  return variant == EnsembleVariant::kDeep || variant == EnsembleVariant::kDeepWeighted ||
         variant == EnsembleVariant::kDeepPerClassWeighted;
}

namespace detail {

AlignedRuns align_runs(std::span<const Run> runs) {
  if (runs.empty()) throw std::invalid_argument("ensemble: no runs given");
  AlignedRuns aligned;
  aligned.num_classes = runs.front().num_classes();
  for (const auto& reference : runs.front().videos) {
    std::vector<const ScoreMatrix*> per_model;
    for (const auto& run : runs) {
      const VideoScores* v = run.find(reference.video_id);
      if (v == nullptr) {
        throw std::invalid_argument("ensemble: run " + run.team_id + " lacks video " +
                                    reference.video_id);
      }
      if (!v->probs.same_shape(reference.probs)) {
        throw std::invalid_argument("ensemble: shape mismatch for video " + reference.video_id +
                                    " in run " + run.team_id);
      }
      per_model.push_back(&v->probs);
    }
    aligned.video_ids.push_back(reference.video_id);
    aligned.matrices.push_back(std::move(per_model));
  }
  for (const auto& run : runs) {
    if (run.videos.size() != runs.front().videos.size()) {
      throw std::invalid_argument("ensemble: run " + run.team_id + " has " +
                                  std::to_string(run.videos.size()) + " videos, expected " +
                                  std::to_string(runs.front().videos.size()));
    }
  }
  return aligned;
}

}  // namespace detail

namespace {

using detail::align_runs;
using detail::AlignedRuns;

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

// Builds a run by evaluating cell(values_across_models) for every cell.
template <typename CellFn>
Run combine_cells(std::span<const Run> runs, std::string team_id, CellFn cell) {
  const AlignedRuns aligned = align_runs(runs);
  Run out;
  out.team_id = std::move(team_id);
  std::vector<double> values(runs.size());
  for (std::size_t v = 0; v < aligned.video_ids.size(); ++v) {
    const auto& models = aligned.matrices[v];
    ScoreMatrix combined(models.front()->rows(), models.front()->cols());
    auto dst = combined.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      for (std::size_t m = 0; m < models.size(); ++m) values[m] = models[m]->values()[i];
      dst[i] = cell(std::span<const double>(values), i % combined.cols());
    }
    out.videos.push_back({aligned.video_ids[v], std::move(combined)});
  }
  return out;
}

void check_weights(std::span<const double> weights, std::size_t n) {
  if (weights.size() != n) {
    throw std::invalid_argument("ensemble: " + std::to_string(weights.size()) +
                                " weights for " + std::to_string(n) + " runs");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("ensemble: negative or NaN weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("ensemble: weights sum to " + std::to_string(sum));
  }
}

}  // namespace

// The fixed combiners are anchored at the first model's value so that N
// identical inputs reproduce that input exactly.
Run combine_average(std::span<const Run> runs) {
  const double n = static_cast<double>(runs.size());
  return combine_cells(runs, "average", [n](std::span<const double> y, std::size_t) {
    double acc = 0.0;
    for (double v : y) acc += v - y[0];
    return clamp_unit(y[0] + acc / n);
  });
}

Run combine_weighted_average(std::span<const Run> runs, std::span<const double> weights) {
  check_weights(weights, runs.size());
  if (std::adjacent_find(weights.begin(), weights.end(), std::not_equal_to<>()) ==
      weights.end()) {
    Run out = combine_average(runs);
    out.team_id = "weighted_average";
    return out;
  }
  const std::vector<double> w(weights.begin(), weights.end());
  return combine_cells(runs, "weighted_average", [&w](std::span<const double> y, std::size_t) {
    double acc = 0.0;
    for (std::size_t m = 0; m < y.size(); ++m) acc += w[m] * (y[m] - y[0]);
    return clamp_unit(y[0] + acc);
  });
}

Run combine_soft_vote(std::span<const Run> runs, double threshold) {
  return combine_cells(runs, "soft_vote", [threshold](std::span<const double> y, std::size_t) {
    std::size_t present = 0;
    for (double v : y) present += v >= threshold ? 1 : 0;
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return 2 * present > y.size() ? *hi : *lo;
  });
}

std::vector<double> compute_performance_weights(std::span<const Run> runs,
                                                const GroundTruth& calibration,
                                                const TripletTaxonomy& taxonomy, bool apply_mask,
                                                std::size_t threads) {
  if (runs.empty()) throw std::invalid_argument("performance weights: no runs given");
  EvalOptions options;
  options.apply_mask = apply_mask;
  options.keep_per_video = false;
  options.ks.clear();
  std::vector<double> ap;
  for (const auto& run : runs) {
    ap.push_back(evaluate_suite(run, calibration, taxonomy, options, threads)
                     .task(Task::kIVT)
                     .mean_ap);
  }
  const double total = std::accumulate(ap.begin(), ap.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("performance weights: all calibration APs are zero");
  for (double& a : ap) a /= total;
  return ap;
}

std::vector<std::size_t> select_models(std::span<const double> ap, double threshold_percent) {
  std::vector<std::size_t> keep;
  for (std::size_t m = 0; m < ap.size(); ++m) {
    if (ap[m] * 100.0 > threshold_percent) keep.push_back(m);
  }
  return keep;
}

EnsembleModel::EnsembleModel(EnsembleVariant variant, std::size_t num_models,
                             std::size_t num_classes, EnsembleHyper hyper)
    : variant_(variant), num_models_(num_models), num_classes_(num_classes), hyper_(hyper) {
  if (num_models == 0 || num_classes == 0) {
    throw std::invalid_argument("ensemble model needs at least one model and one class");
  }
  switch (variant) {
    case EnsembleVariant::kAverage:
    case EnsembleVariant::kSoftVote:
      break;
    case EnsembleVariant::kWeightedAverage:
      parameters_.assign(num_models, 1.0 / static_cast<double>(num_models));
      break;
    case EnsembleVariant::kDeepWeighted:
      parameters_.assign(num_models, 0.0);
      break;
    case EnsembleVariant::kDeepPerClassWeighted:
      parameters_.assign(num_models * num_classes, 0.0);
      break;
    case EnsembleVariant::kDeep: {
      hidden_ = hyper.hidden == 0 ? 2 * num_classes : hyper.hidden;
      const std::size_t in = num_models * num_classes;
      parameters_.assign(in * hidden_ + hidden_ + hidden_ * num_classes + num_classes, 0.0);
      break;
    }
  }
  hyper_.hidden = hidden_;
}

void EnsembleModel::initialize() {
  std::fill(parameters_.begin(), parameters_.end(), 0.0);
  if (variant_ == EnsembleVariant::kWeightedAverage) {
    std::fill(parameters_.begin(), parameters_.end(), 1.0 / static_cast<double>(num_models_));
  }
  if (variant_ != EnsembleVariant::kDeep) return;
  Rng rng(hyper_.seed);
  const std::size_t in = num_models_ * num_classes_;
  const detail::DeepLayout layout(in, hidden_, num_classes_);
  const double a1 = std::sqrt(6.0 / static_cast<double>(in));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_ + num_classes_));
  for (std::size_t i = 0; i < layout.w1_size; ++i) {
    parameters_[layout.w1_offset + i] = rng.uniform(-a1, a1);
  }
  for (std::size_t i = 0; i < layout.w2_size; ++i) {
    parameters_[layout.w2_offset + i] = rng.uniform(-a2, a2);
  }
}

std::vector<double> EnsembleModel::effective_weights() const {
  switch (variant_) {
    case EnsembleVariant::kWeightedAverage:
      return parameters_;
    case EnsembleVariant::kDeepWeighted:
      return detail::softmax_columns(parameters_, num_models_, 1);
    case EnsembleVariant::kDeepPerClassWeighted:
      return detail::softmax_columns(parameters_, num_models_, num_classes_);
    default:
      throw std::invalid_argument("variant " + std::string(variant_name(variant_)) +
                                  " has no combination weights");
  }
}

void to_json(nlohmann::json& j, const EnsembleModel& m) {
  nlohmann::json params = nlohmann::json::object();
  const auto p = m.parameters();
  switch (m.variant()) {
    case EnsembleVariant::kAverage:
    case EnsembleVariant::kSoftVote:
      break;
    case EnsembleVariant::kWeightedAverage:
      params["weights"] = std::vector<double>(p.begin(), p.end());
      break;
    case EnsembleVariant::kDeepWeighted:
    case EnsembleVariant::kDeepPerClassWeighted:
      params["raw_weights"] = std::vector<double>(p.begin(), p.end());
      break;
    case EnsembleVariant::kDeep: {
      const detail::DeepLayout layout(m.num_models() * m.num_classes(), m.hidden(),
                                      m.num_classes());
      auto slice = [&](std::size_t offset, std::size_t size) {
        return std::vector<double>(p.begin() + offset, p.begin() + offset + size);
      };
      params["w1"] = slice(layout.w1_offset, layout.w1_size);
      params["b1"] = slice(layout.b1_offset, layout.b1_size);
      params["w2"] = slice(layout.w2_offset, layout.w2_size);
      params["b2"] = slice(layout.b2_offset, layout.b2_size);
      break;
    }
  }
  const auto& h = m.hyper();
  j = nlohmann::json{
      {"variant", variant_name(m.variant())},
      {"dims", {{"num_models", m.num_models()}, {"num_classes", m.num_classes()},
                {"hidden", m.hidden()}}},
      {"params", params},
      {"hyper", {{"learning_rate", h.learning_rate}, {"epochs", h.epochs},
                 {"batch_size", h.batch_size}, {"hidden", h.hidden},
                 {"soft_vote_threshold", h.soft_vote_threshold}}},
      {"seed", h.seed},
      {"initial_loss", m.initial_loss},
      {"final_loss", m.final_loss},
      {"loss_history", m.loss_history}};
}

void from_json(const nlohmann::json& j, EnsembleModel& m) {
  const auto variant = parse_variant(j.at("variant").get<std::string>());
  if (!variant) throw std::invalid_argument("unknown ensemble variant in model file");
  EnsembleHyper hyper;
  const auto& h = j.at("hyper");
  hyper.learning_rate = h.at("learning_rate").get<double>();
  hyper.epochs = h.at("epochs").get<int>();
  hyper.batch_size = h.at("batch_size").get<std::size_t>();
  hyper.hidden = h.at("hidden").get<std::size_t>();
  hyper.soft_vote_threshold = h.at("soft_vote_threshold").get<double>();
  hyper.seed = j.at("seed").get<std::uint64_t>();
  const auto& dims = j.at("dims");
  m = EnsembleModel(*variant, dims.at("num_models").get<std::size_t>(),
                    dims.at("num_classes").get<std::size_t>(), hyper);
  const auto& params = j.at("params");
  std::vector<double> flat;
  switch (*variant) {
    case EnsembleVariant::kAverage:
    case EnsembleVariant::kSoftVote:
      break;
    case EnsembleVariant::kWeightedAverage:
      flat = params.at("weights").get<std::vector<double>>();
      break;
    case EnsembleVariant::kDeepWeighted:
    case EnsembleVariant::kDeepPerClassWeighted:
      flat = params.at("raw_weights").get<std::vector<double>>();
      break;
    case EnsembleVariant::kDeep:
      for (const char* key : {"w1", "b1", "w2", "b2"}) {
        const auto part = params.at(key).get<std::vector<double>>();
        flat.insert(flat.end(), part.begin(), part.end());
      }
      break;
  }
  if (flat.size() != m.parameters_.size()) {
    throw std::invalid_argument("model file holds " + std::to_string(flat.size()) +
                                " parameters, dims imply " +
                                std::to_string(m.parameters_.size()));
  }
  m.parameters_ = std::move(flat);
  m.initial_loss = j.at("initial_loss").get<double>();
  m.final_loss = j.at("final_loss").get<double>();
  m.loss_history = j.at("loss_history").get<std::vector<double>>();
}

Run apply_ensemble(const EnsembleModel& model, std::span<const Run> runs) {
  if (runs.size() != model.num_models()) {
    throw std::invalid_argument("model trained for " + std::to_string(model.num_models()) +
                                " runs, got " + std::to_string(runs.size()));
  }
  switch (model.variant()) {
    case EnsembleVariant::kAverage:
      return combine_average(runs);
    case EnsembleVariant::kSoftVote:
      return combine_soft_vote(runs, model.hyper().soft_vote_threshold);
    case EnsembleVariant::kWeightedAverage:
      return combine_weighted_average(runs, model.parameters());
    default:
      break;
  }
  const AlignedRuns aligned = align_runs(runs);
  if (aligned.num_classes != model.num_classes()) {
    throw std::invalid_argument("model trained for " + std::to_string(model.num_classes()) +
                                " classes, runs have " + std::to_string(aligned.num_classes));
  }
  Run out;
  out.team_id = std::string(variant_name(model.variant()));
  for (std::size_t v = 0; v < aligned.video_ids.size(); ++v) {
    TrainingBatch batch;
    for (const ScoreMatrix* m : aligned.matrices[v]) batch.inputs.push_back(*m);
    batch.targets = LabelMatrix(aligned.matrices[v].front()->rows(), model.num_classes(), 0);
    out.videos.push_back({aligned.video_ids[v], ensemble_forward(model, batch)});
  }
  return out;
}

}  // namespace tripletbench
