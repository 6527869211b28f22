#include "tripletbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tripletbench/parallel.hpp"

namespace tripletbench {

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("average_precision: " + std::to_string(scores.size()) +
                                " scores vs " + std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw std::invalid_argument("average_precision: empty input");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw std::invalid_argument("average_precision: NaN score");
    if (labels[i]) ++positives;
  }
  if (positives == 0) return std::nullopt;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size() && hits < positives; ++rank) {
    if (labels[order[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

ApVector video_class_ap(const ScoreMatrix& scores, const LabelMatrix& labels) {
  if (!scores.same_shape(labels)) {
    throw std::invalid_argument("video_class_ap: score matrix " + std::to_string(scores.rows()) +
                                "x" + std::to_string(scores.cols()) + " vs label matrix " +
                                std::to_string(labels.rows()) + "x" +
                                std::to_string(labels.cols()));
  }
  ApVector out(scores.cols());
  if (scores.rows() == 0) return out;
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    const auto s = scores.column(c);
    const auto l = labels.column(c);
    out[c] = average_precision(s, l);
  }
  return out;
}

AggregatedAp aggregate_ap(const std::vector<ApVector>& per_video,
                          const std::vector<bool>& class_mask) {
  if (per_video.empty()) throw std::invalid_argument("aggregate_ap: no videos");
  const std::size_t k = per_video.front().size();
  for (const auto& v : per_video) {
    if (v.size() != k) throw std::invalid_argument("aggregate_ap: class counts differ");
  }
  if (!class_mask.empty() && class_mask.size() != k) {
    throw std::invalid_argument("aggregate_ap: mask length differs from class count");
  }

  AggregatedAp out;
  out.per_class.resize(k);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : per_video) {
      if (v[c]) {
        sum += *v[c];
        ++n;
      }
    }
    if (n == 0) continue;
    out.per_class[c] = sum / static_cast<double>(n);
    if (class_mask.empty() || class_mask[c]) {
      total += *out.per_class[c];
      ++out.num_classes_averaged;
    }
  }
  if (out.num_classes_averaged == 0) {
    throw std::invalid_argument("aggregate_ap: no class has a defined AP");
  }
  out.mean = total / static_cast<double>(out.num_classes_averaged);
  return out;
}

void TopKCounts::merge(const TopKCounts& other) {
  if (ks.empty() && hit_ratio_sum.empty()) {
    *this = other;
    return;
  }
  if (other.ks != ks) throw std::invalid_argument("TopKCounts::merge: K lists differ");
  for (std::size_t i = 0; i < ks.size(); ++i) hit_ratio_sum[i] += other.hit_ratio_sum[i];
  frames += other.frames;
}

TopKCounts topk_counts(const ScoreMatrix& scores, const LabelMatrix& labels,
                       const std::vector<int>& ks) {
  if (!scores.same_shape(labels)) throw std::invalid_argument("topk: shape mismatch");
  if (ks.empty()) throw std::invalid_argument("topk: no K given");
  for (int k : ks) {
    if (k <= 0 || static_cast<std::size_t>(k) > scores.cols()) {
      throw std::invalid_argument("topk: K=" + std::to_string(k) + " not in [1, " +
                                  std::to_string(scores.cols()) + "]");
    }
  }
  TopKCounts counts{ks, std::vector<double>(ks.size(), 0.0), 0};
  const int max_k = *std::max_element(ks.begin(), ks.end());
  std::vector<std::size_t> order(scores.cols());
  for (std::size_t f = 0; f < scores.rows(); ++f) {
    const auto row = scores.row(f);
    const auto truth = labels.row(f);
    const std::size_t positives = std::count(truth.begin(), truth.end(), std::uint8_t{1});
    if (positives == 0) continue;
    ++counts.frames;
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + max_k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return row[a] > row[b] || (row[a] == row[b] && a < b);
                      });
    for (std::size_t i = 0; i < ks.size(); ++i) {
      std::size_t hits = 0;
      for (int r = 0; r < ks[i]; ++r) hits += truth[order[r]];
      counts.hit_ratio_sum[i] += static_cast<double>(hits) / static_cast<double>(positives);
    }
  }
  return counts;
}

TopKAccuracy finalize_topk(const TopKCounts& counts) {
  TopKAccuracy out;
  out.frames = counts.frames;
  if (counts.frames == 0) throw std::invalid_argument("topk: no frame has a positive label");
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.ks.size(); ++i) {
    const double acc = counts.hit_ratio_sum[i] / static_cast<double>(counts.frames);
    out.by_k[counts.ks[i]] = acc;
    sum += acc;
  }
  out.mean = sum / static_cast<double>(counts.ks.size());
  return out;
}

namespace {

const VideoScores& matching_video(const Run& run, const VideoLabels& truth) {
  const VideoScores* scores = run.find(truth.video_id);
  if (scores == nullptr) {
    throw std::invalid_argument("run " + run.team_id + " lacks video " + truth.video_id);
  }
  if (!scores->probs.same_shape(truth.labels)) {
    throw std::invalid_argument("video " + truth.video_id + ": prediction shape " +
                                std::to_string(scores->probs.rows()) + "x" +
                                std::to_string(scores->probs.cols()) + " vs ground truth " +
                                std::to_string(truth.labels.rows()) + "x" +
                                std::to_string(truth.labels.cols()));
  }
  return *scores;
}

}  // namespace

TopKAccuracy topk_accuracy(const Run& run, const GroundTruth& gt, const std::vector<int>& ks) {
  TopKCounts total;
  for (const auto& truth : gt.videos) {
    total.merge(topk_counts(matching_video(run, truth).probs, truth.labels, ks));
  }
  return finalize_topk(total);
}

LeaderboardStats leaderboard_stats(std::span<const double> values, StdConvention convention) {
  if (values.empty()) throw std::invalid_argument("leaderboard_stats: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double std = 0.0;
  if (values.size() > 1) {
    std = std::sqrt(ss / (convention == StdConvention::kSample ? n - 1.0 : n));
  }
  return {mean, std, values.size()};
}

Evaluator::Evaluator(const TripletTaxonomy& taxonomy, EvalOptions options)
    : disentangler_(taxonomy), options_(std::move(options)) {}

std::vector<bool> Evaluator::class_mask(Task task) const {
  const TaskSpace& space = disentangler_.space(task);
  return options_.apply_mask ? space.ranking_mask : space.covered;
}

VideoEvaluation Evaluator::evaluate_video(std::string video_id, const ScoreMatrix& scores,
                                          const LabelMatrix& labels) const {
  if (!scores.same_shape(labels)) {
    throw std::invalid_argument("video " + video_id + ": score/label shapes differ");
  }
  VideoEvaluation out;
  out.video_id = std::move(video_id);
  for (Task task : kAllTasks) {
    out.per_task[task_index(task)] = video_class_ap(disentangler_.project(scores, task),
                                                    disentangler_.project(labels, task));
  }
  if (!options_.ks.empty()) out.topk = topk_counts(scores, labels, options_.ks);
  return out;
}

EvalReport Evaluator::finalize(std::string team_id,
                               const std::vector<VideoEvaluation>& videos) const {
  EvalReport report;
  report.team_id = std::move(team_id);
  report.masked = options_.apply_mask;
  TopKCounts topk;
  for (const auto& v : videos) {
    report.video_ids.push_back(v.video_id);
    topk.merge(v.topk);
  }
  for (Task task : kAllTasks) {
    std::vector<ApVector> per_video;
    per_video.reserve(videos.size());
    for (const auto& v : videos) per_video.push_back(v.per_task[task_index(task)]);
    const AggregatedAp agg = aggregate_ap(per_video, class_mask(task));
    TaskResult& result = report.tasks[task_index(task)];
    result.class_labels = disentangler_.space(task).labels;
    result.per_class_ap = agg.per_class;
    result.mean_ap = agg.mean;
    result.num_ranked_classes = agg.num_classes_averaged;
    if (options_.keep_per_video) result.per_video = std::move(per_video);
  }
  if (!options_.ks.empty()) report.topk = finalize_topk(topk);
  return report;
}

std::optional<double> Evaluator::block_mean_ap(const ScoreMatrix& scores,
                                               const LabelMatrix& labels, Task task) const {
  const ApVector ap =
      video_class_ap(disentangler_.project(scores, task), disentangler_.project(labels, task));
  const auto mask = class_mask(task);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < ap.size(); ++c) {
    if (ap[c] && mask[c]) {
      sum += *ap[c];
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

EvalReport evaluate_suite(const Run& run, const GroundTruth& gt, const TripletTaxonomy& taxonomy,
                          const EvalOptions& options, std::size_t threads) {
  if (gt.videos.empty()) throw std::invalid_argument("evaluate_suite: empty ground truth");
  const Evaluator evaluator(taxonomy, options);
  std::vector<VideoEvaluation> videos(gt.videos.size());
  parallel_for(gt.videos.size(), threads, [&](std::size_t i) {
    const VideoLabels& truth = gt.videos[i];
    videos[i] = evaluator.evaluate_video(truth.video_id, matching_video(run, truth).probs,
                                         truth.labels);
  });
  return evaluator.finalize(run.team_id, videos);
}

namespace {

nlohmann::json ap_vector_json(const ApVector& v) {
  auto j = nlohmann::json::array();
  for (const auto& x : v) j.push_back(x ? nlohmann::json(*x) : nlohmann::json());
  return j;
}

ApVector ap_vector_from_json(const nlohmann::json& j) {
  ApVector out;
  for (const auto& x : j) {
    out.push_back(x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()));
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const EvalReport& r) {
  nlohmann::json tasks = nlohmann::json::object();
  for (Task t : kAllTasks) {
    const TaskResult& result = r.task(t);
    nlohmann::json per_video = nlohmann::json::array();
    for (const auto& v : result.per_video) per_video.push_back(ap_vector_json(v));
    tasks[std::string(task_name(t))] = {{"class_labels", result.class_labels},
                                        {"per_class_ap", ap_vector_json(result.per_class_ap)},
                                        {"mean_ap", result.mean_ap},
                                        {"num_ranked_classes", result.num_ranked_classes},
                                        {"per_video", per_video}};
  }
  nlohmann::json by_k = nlohmann::json::object();
  for (const auto& [k, acc] : r.topk.by_k) by_k[std::to_string(k)] = acc;
  j = nlohmann::json{{"team_id", r.team_id},
                     {"masked", r.masked},
                     {"video_ids", r.video_ids},
                     {"tasks", tasks},
                     {"topk", {{"by_k", by_k}, {"mean", r.topk.mean}, {"frames", r.topk.frames}}}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  r.team_id = j.at("team_id").get<std::string>();
  r.masked = j.at("masked").get<bool>();
  r.video_ids = j.at("video_ids").get<std::vector<std::string>>();
  const auto& tasks = j.at("tasks");
  for (Task t : kAllTasks) {
    const auto it = tasks.find(std::string(task_name(t)));
    if (it == tasks.end()) {
      throw std::invalid_argument("report for " + r.team_id + " lacks task " +
                                  std::string(task_name(t)));
    }
    TaskResult& result = r.tasks[task_index(t)];
    result.class_labels = it->at("class_labels").get<std::vector<std::string>>();
    result.per_class_ap = ap_vector_from_json(it->at("per_class_ap"));
    result.mean_ap = it->at("mean_ap").get<double>();
    result.num_ranked_classes = it->at("num_ranked_classes").get<std::size_t>();
    result.per_video.clear();
    for (const auto& v : it->at("per_video")) result.per_video.push_back(ap_vector_from_json(v));
  }
  const auto& topk = j.at("topk");
  r.topk.by_k.clear();
  for (const auto& [k, acc] : topk.at("by_k").items()) r.topk.by_k[std::stoi(k)] = acc.get<double>();
  r.topk.mean = topk.at("mean").get<double>();
  r.topk.frames = topk.at("frames").get<std::size_t>();
}

}  // namespace tripletbench
