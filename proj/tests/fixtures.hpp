#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tripletbench/dataset_io.hpp"
#include "tripletbench/taxonomy.hpp"

namespace fixtures {

using namespace tripletbench;

inline std::filesystem::path data_dir() { return TRIPLETBENCH_TEST_DATA; }

inline TripletTaxonomy cholect50() { return load_taxonomy(data_dir() / "cholect50_taxonomy.csv"); }

// {0:(0,0,0), 1:(0,1,2), 2:(1,0,2)} with counts (2,2,3).
inline TripletTaxonomy three_class() {
  std::vector<TaxonomyRow> rows(3);
  rows[0].triplet_id = 0;
  rows[0].components = {0, 0, 0};
  rows[1].triplet_id = 1;
  rows[1].components = {0, 1, 2};
  rows[2].triplet_id = 2;
  rows[2].components = {1, 0, 2};
  return TripletTaxonomy(rows, ComponentCounts{2, 2, 3});
}

// Six triplets over 2 instruments, 3 verbs and 3 targets; verb 2 and target 2
// are the null components, triplets 4 and 5 the null classes.
inline const char* kSmallTaxonomyCsv =
    "triplet_id,instrument_id,verb_id,target_id,instrument,verb,target\n"
    "0,0,0,0,grasper,grasp,gallbladder\n"
    "1,0,1,1,grasper,retract,liver\n"
    "2,1,0,0,hook,grasp,gallbladder\n"
    "3,1,1,0,hook,retract,gallbladder\n"
    "4,0,2,2,grasper,null_verb,null_target\n"
    "5,1,2,2,hook,null_verb,null_target\n";

inline TripletTaxonomy small() { return parse_taxonomy_csv(kSmallTaxonomyCsv); }

// Any taxonomy with `classes` triplets: class t = (t % ni, (t / ni) % nv, t / (ni*nv)).
inline TripletTaxonomy grid(std::size_t classes, std::size_t ni, std::size_t nv) {
  std::vector<TaxonomyRow> rows;
  for (std::size_t t = 0; t < classes; ++t) {
    TaxonomyRow r;
    r.triplet_id = t;
    r.components = {t % ni, (t / ni) % nv, t / (ni * nv)};
    rows.push_back(r);
  }
  return TripletTaxonomy(rows);
}

inline GroundTruth random_gt(std::size_t videos, std::size_t frames, std::size_t classes,
                             double positive_rate, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution pos(positive_rate);
  GroundTruth gt;
  for (std::size_t v = 0; v < videos; ++v) {
    LabelMatrix labels(frames, classes, 0);
    for (auto& x : labels.values()) x = pos(gen) ? 1 : 0;
    gt.videos.push_back({"video" + std::to_string(v + 1), std::move(labels)});
  }
  return gt;
}

inline Run gt_as_run(const GroundTruth& gt, std::string team = "oracle") {
  Run run;
  run.team_id = std::move(team);
  for (const auto& v : gt.videos) {
    ScoreMatrix probs(v.labels.rows(), v.labels.cols(), 0.0);
    for (std::size_t i = 0; i < probs.values().size(); ++i) probs.values()[i] = v.labels.values()[i];
    run.videos.push_back({v.video_id, std::move(probs)});
  }
  return run;
}

// Uniform noise with the same shapes as `gt`; values rounded to 6 decimals.
inline Run noise_run(const GroundTruth& gt, std::uint64_t seed, std::string team = "noise") {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Run run;
  run.team_id = std::move(team);
  for (const auto& v : gt.videos) {
    ScoreMatrix probs(v.labels.rows(), v.labels.cols(), 0.0);
    for (auto& x : probs.values()) x = std::round(u(gen) * 1e6) / 1e6;
    run.videos.push_back({v.video_id, std::move(probs)});
  }
  return run;
}

// Scores that favour the positives: label * signal + noise * (1 - signal).
// Above 0.5 the ranking is perfect.
inline Run informative_run(const GroundTruth& gt, std::uint64_t seed, std::string team,
                           double signal = 0.6) {
  Run run = noise_run(gt, seed, std::move(team));
  for (std::size_t v = 0; v < gt.videos.size(); ++v) {
    auto out = run.videos[v].probs.values();
    const auto labels = gt.videos[v].labels.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::round((signal * labels[i] + (1.0 - signal) * out[i]) * 1e6) / 1e6;
    }
  }
  return run;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tripletbench_" + name + "_" +
                                                       std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
