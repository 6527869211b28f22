#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ensemble_internal.hpp"
#include "tripletbench/ensemble.hpp"
#include "tripletbench/rng.hpp"

namespace tripletbench {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

// Probabilities are clamped before the log so that exact 0/1 combinations
// keep a finite loss.
constexpr double kProbEpsilon = 1e-7;

void check_batch(const EnsembleModel& model, const TrainingBatch& batch) {
  if (batch.inputs.size() != model.num_models()) {
    throw std::invalid_argument("batch holds " + std::to_string(batch.inputs.size()) +
                                " models, ensemble expects " + std::to_string(model.num_models()));
  }
  for (const auto& m : batch.inputs) {
    if (m.rows() != batch.frames() || m.cols() != model.num_classes()) {
      throw std::invalid_argument("batch input shape does not match the ensemble dimensions");
    }
  }
  if (batch.targets.cols() != model.num_classes()) {
    throw std::invalid_argument("batch target shape does not match the ensemble dimensions");
  }
}

// Stacks the N model rows of each frame side by side: frames x (N*C).
RowMatrix stacked_inputs(const TrainingBatch& batch) {
  const std::size_t n = batch.inputs.size();
  const std::size_t c = n ? batch.inputs.front().cols() : 0;
  RowMatrix x(batch.frames(), n * c);
  for (std::size_t m = 0; m < n; ++m) {
    x.middleCols(m * c, c) = ConstMap(batch.inputs[m].values().data(), batch.frames(), c);
  }
  return x;
}

struct DeepPass {
  RowMatrix x, pre_hidden, hidden, logits;
};

DeepPass deep_forward(const EnsembleModel& model, const TrainingBatch& batch) {
  const std::size_t in = model.num_models() * model.num_classes();
  const detail::DeepLayout layout(in, model.hidden(), model.num_classes());
  const auto p = model.parameters();
  ConstMap w1(p.data() + layout.w1_offset, in, model.hidden());
  Eigen::Map<const Eigen::RowVectorXd> b1(p.data() + layout.b1_offset, model.hidden());
  ConstMap w2(p.data() + layout.w2_offset, model.hidden(), model.num_classes());
  Eigen::Map<const Eigen::RowVectorXd> b2(p.data() + layout.b2_offset, model.num_classes());

  DeepPass pass;
  pass.x = stacked_inputs(batch);
  pass.pre_hidden = (pass.x * w1).rowwise() + b1;
  pass.hidden = pass.pre_hidden.cwiseMax(0.0);
  pass.logits = (pass.hidden * w2).rowwise() + b2;
  return pass;
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Convex combination: weights has N entries (shared) or N*C (per class).
ScoreMatrix weighted_forward(const std::vector<double>& weights, std::size_t per_class_stride,
                             const TrainingBatch& batch) {
  const std::size_t c = batch.targets.cols();
  ScoreMatrix out(batch.frames(), c, 0.0);
  for (std::size_t m = 0; m < batch.inputs.size(); ++m) {
    const auto y = batch.inputs[m].values();
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const double w = per_class_stride ? weights[m * per_class_stride + i % c] : weights[m];
      dst[i] += w * y[i];
    }
  }
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double weighted_loss(const EnsembleModel& model, const TrainingBatch& batch,
                     std::vector<double>* gradient) {
  const bool per_class = model.variant() == EnsembleVariant::kDeepPerClassWeighted;
  const std::size_t n = model.num_models();
  const std::size_t c = model.num_classes();
  const std::vector<double> w = model.effective_weights();
  const ScoreMatrix p = weighted_forward(w, per_class ? c : 0, batch);
  const auto pv = p.values();
  const auto tv = batch.targets.values();
  const double cells = static_cast<double>(pv.size());

  double loss = 0.0;
  std::vector<double> dloss_dp(pv.size(), 0.0);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double q = std::clamp(pv[i], kProbEpsilon, 1.0 - kProbEpsilon);
    const double t = tv[i];
    loss -= t * std::log(q) + (1.0 - t) * std::log(1.0 - q);
    if (pv[i] > kProbEpsilon && pv[i] < 1.0 - kProbEpsilon) {
      dloss_dp[i] = (q - t) / (q * (1.0 - q)) / cells;
    }
  }
  loss /= cells;
  if (gradient == nullptr) return loss;

  // dL/dw, then through the softmax: dL/draw = w * (dL/dw - sum_j w_j dL/dw_j).
  const std::size_t cols = per_class ? c : 1;
  std::vector<double> dw(n * cols, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const auto y = batch.inputs[m].values();
    for (std::size_t i = 0; i < y.size(); ++i) {
      dw[m * cols + (per_class ? i % c : 0)] += dloss_dp[i] * y[i];
    }
  }
  gradient->assign(n * cols, 0.0);
  for (std::size_t k = 0; k < cols; ++k) {
    double dot = 0.0;
    for (std::size_t m = 0; m < n; ++m) dot += w[m * cols + k] * dw[m * cols + k];
    for (std::size_t m = 0; m < n; ++m) {
      (*gradient)[m * cols + k] = w[m * cols + k] * (dw[m * cols + k] - dot);
    }
  }
  return loss;
}

double deep_loss(const EnsembleModel& model, const TrainingBatch& batch,
                 std::vector<double>* gradient) {
  const DeepPass pass = deep_forward(model, batch);
  RowMatrix targets(batch.frames(), model.num_classes());
  for (std::size_t f = 0; f < batch.frames(); ++f) {
    for (std::size_t k = 0; k < model.num_classes(); ++k) targets(f, k) = batch.targets(f, k);
  }
  const double cells = static_cast<double>(targets.size());

  // BCE on logits: softplus(z) - t * z.
  double loss = 0.0;
  RowMatrix dlogits(pass.logits.rows(), pass.logits.cols());
  for (Eigen::Index f = 0; f < pass.logits.rows(); ++f) {
    for (Eigen::Index k = 0; k < pass.logits.cols(); ++k) {
      const double z = pass.logits(f, k);
      const double t = targets(f, k);
      loss += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - t * z;
      dlogits(f, k) = (sigmoid(z) - t) / cells;
    }
  }
  loss /= cells;
  if (gradient == nullptr) return loss;

  const std::size_t in = model.num_models() * model.num_classes();
  const detail::DeepLayout layout(in, model.hidden(), model.num_classes());
  const auto p = model.parameters();
  ConstMap w2(p.data() + layout.w2_offset, model.hidden(), model.num_classes());

  gradient->assign(model.parameter_count(), 0.0);
  double* g = gradient->data();
  Map(g + layout.w2_offset, model.hidden(), model.num_classes()) =
      pass.hidden.transpose() * dlogits;
  Eigen::Map<Eigen::RowVectorXd>(g + layout.b2_offset, model.num_classes()) =
      dlogits.colwise().sum();
  RowMatrix dhidden = dlogits * w2.transpose();
  dhidden = dhidden.cwiseProduct((pass.pre_hidden.array() > 0.0).cast<double>().matrix());
  Map(g + layout.w1_offset, in, model.hidden()) = pass.x.transpose() * dhidden;
  Eigen::Map<Eigen::RowVectorXd>(g + layout.b1_offset, model.hidden()) = dhidden.colwise().sum();
  return loss;
}

// One training sample: a frame of one video.
struct FrameRef {
  std::size_t video;
  std::size_t frame;
};

TrainingBatch gather(const detail::AlignedRuns& aligned, const std::vector<const LabelMatrix*>& gt,
                     std::span<const FrameRef> frames, std::size_t num_classes) {
  TrainingBatch batch;
  const std::size_t n = aligned.matrices.empty() ? 0 : aligned.matrices.front().size();
  batch.inputs.assign(n, ScoreMatrix(frames.size(), num_classes));
  batch.targets = LabelMatrix(frames.size(), num_classes);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameRef ref = frames[i];
    for (std::size_t m = 0; m < n; ++m) {
      const auto src = aligned.matrices[ref.video][m]->row(ref.frame);
      std::copy(src.begin(), src.end(), batch.inputs[m].row(i).begin());
    }
    const auto labels = gt[ref.video]->row(ref.frame);
    std::copy(labels.begin(), labels.end(), batch.targets.row(i).begin());
  }
  return batch;
}

}  // namespace

ScoreMatrix ensemble_forward(const EnsembleModel& model, const TrainingBatch& batch) {
  check_batch(model, batch);
  switch (model.variant()) {
    case EnsembleVariant::kDeepWeighted:
      return weighted_forward(model.effective_weights(), 0, batch);
    case EnsembleVariant::kDeepPerClassWeighted:
      return weighted_forward(model.effective_weights(), model.num_classes(), batch);
    case EnsembleVariant::kDeep: {
      const DeepPass pass = deep_forward(model, batch);
      ScoreMatrix out(batch.frames(), model.num_classes());
      for (std::size_t f = 0; f < batch.frames(); ++f) {
        for (std::size_t k = 0; k < model.num_classes(); ++k) {
          out(f, k) = sigmoid(pass.logits(f, k));
        }
      }
      return out;
    }
    default:
      throw std::invalid_argument("ensemble_forward: variant " +
                                  std::string(variant_name(model.variant())) +
                                  " is not trainable");
  }
}

double ensemble_loss(const EnsembleModel& model, const TrainingBatch& batch,
                     std::vector<double>* gradient) {
  check_batch(model, batch);
  if (batch.frames() == 0) throw std::invalid_argument("ensemble_loss: empty batch");
  switch (model.variant()) {
    case EnsembleVariant::kDeepWeighted:
    case EnsembleVariant::kDeepPerClassWeighted:
      return weighted_loss(model, batch, gradient);
    case EnsembleVariant::kDeep:
      return deep_loss(model, batch, gradient);
    default:
      throw std::invalid_argument("ensemble_loss: variant " +
                                  std::string(variant_name(model.variant())) +
                                  " is not trainable");
  }
}

EnsembleModel train_deep_ensemble(std::span<const Run> runs, const GroundTruth& gt,
                                  EnsembleVariant variant, const EnsembleHyper& hyper) {
  if (!is_trainable(variant)) {
    throw std::invalid_argument("variant " + std::string(variant_name(variant)) +
                                " is not trainable");
  }
  if (hyper.batch_size == 0 || hyper.epochs < 0 || !(hyper.learning_rate > 0.0)) {
    throw std::invalid_argument("invalid training hyperparameters");
  }
  const detail::AlignedRuns aligned = detail::align_runs(runs);
  const std::size_t num_classes = aligned.num_classes;

  std::vector<const LabelMatrix*> labels;
  std::vector<FrameRef> frames;
  for (std::size_t v = 0; v < aligned.video_ids.size(); ++v) {
    const VideoLabels* truth = gt.find(aligned.video_ids[v]);
    if (truth == nullptr) {
      throw std::invalid_argument("training ground truth lacks video " + aligned.video_ids[v]);
    }
    if (!truth->labels.same_shape(*aligned.matrices[v].front())) {
      throw std::invalid_argument("training ground truth shape differs for video " +
                                  aligned.video_ids[v]);
    }
    labels.push_back(&truth->labels);
    for (std::size_t f = 0; f < truth->labels.rows(); ++f) frames.push_back({v, f});
  }
  if (frames.empty()) throw std::invalid_argument("no training frames");

  EnsembleModel model(variant, runs.size(), num_classes, hyper);
  model.initialize();

  auto full_loss = [&](const EnsembleModel& m) {
    double total = 0.0;
    for (std::size_t start = 0; start < frames.size(); start += hyper.batch_size) {
      const std::size_t count = std::min(hyper.batch_size, frames.size() - start);
      const TrainingBatch batch =
          gather(aligned, labels, std::span(frames).subspan(start, count), num_classes);
      total += ensemble_loss(m, batch) * static_cast<double>(count);
    }
    return total / static_cast<double>(frames.size());
  };

  model.initial_loss = full_loss(model);
  if (!std::isfinite(model.initial_loss)) {
    throw TrainingDiverged(0, "non-finite initial loss");
  }
  std::vector<double> best(model.parameters().begin(), model.parameters().end());
  double best_loss = model.initial_loss;

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEpsilon = 1e-8;
  std::vector<double> first_moment(model.parameter_count(), 0.0);
  std::vector<double> second_moment(model.parameter_count(), 0.0);
  std::vector<double> gradient;
  std::uint64_t step = 0;
  Rng rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<FrameRef> order = frames;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t count = std::min(hyper.batch_size, order.size() - start);
      const TrainingBatch batch =
          gather(aligned, labels, std::span(order).subspan(start, count), num_classes);
      const double loss = ensemble_loss(model, batch, &gradient);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged(epoch, "non-finite loss in epoch " + std::to_string(epoch));
      }
      ++step;
      const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto params = model.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        first_moment[i] = kBeta1 * first_moment[i] + (1.0 - kBeta1) * gradient[i];
        second_moment[i] = kBeta2 * second_moment[i] + (1.0 - kBeta2) * gradient[i] * gradient[i];
        const double m_hat = first_moment[i] / correction1;
        const double v_hat = second_moment[i] / correction2;
        params[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
      }
    }
    const double epoch_loss = full_loss(model);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDiverged(epoch, "non-finite loss after epoch " + std::to_string(epoch));
    }
    model.loss_history.push_back(epoch_loss);
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      best.assign(model.parameters().begin(), model.parameters().end());
    }
  }
  std::copy(best.begin(), best.end(), model.parameters().begin());
  model.final_loss = best_loss;
  return model;
}

}  // namespace tripletbench
