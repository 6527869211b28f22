#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tripletbench/stability.hpp"

using namespace tripletbench;

TEST(SampleBatches, WindowsStayInsideVideos) {
  GroundTruth gt;
  gt.videos.push_back({"long", LabelMatrix(500, 2)});
  const auto clips = sample_batches(gt, 200, 100, 3);
  ASSERT_EQ(clips.size(), 200u);
  for (const auto& c : clips) {
    EXPECT_LE(c.start_frame, 400u);
    EXPECT_EQ(c.length, 100u);
  }
  EXPECT_EQ(sample_batches(gt, 30, 100, 3).size(), 30u);
}

TEST(SampleBatches, DeterministicAndSkipsShortVideos) {
  GroundTruth gt;
  gt.videos.push_back({"short", LabelMatrix(50, 2)});
  gt.videos.push_back({"a", LabelMatrix(120, 2)});
  gt.videos.push_back({"b", LabelMatrix(300, 2)});
  const auto first = sample_batches(gt, 30, 100, 42);
  EXPECT_EQ(first, sample_batches(gt, 30, 100, 42));
  EXPECT_NE(first, sample_batches(gt, 30, 100, 43));
  std::size_t in_a = 0;
  for (const auto& c : first) {
    EXPECT_NE(c.video_id, "short");
    const std::size_t frames = c.video_id == "a" ? 120 : 300;
    EXPECT_LE(c.start_frame + c.length, frames);
    in_a += c.video_id == "a";
  }
  // 21 of 222 positions belong to video a.
  EXPECT_LT(in_a, 15u);
}

TEST(SampleBatches, NoValidWindow) {
  GroundTruth gt;
  gt.videos.push_back({"v", LabelMatrix(50, 2)});
  try {
    sample_batches(gt, 30, 100, 1);
    FAIL();
  } catch (const NoValidWindow& e) {
    EXPECT_EQ(std::string(e.what()).rfind("NO_VALID_WINDOW", 0), 0u);
  }
}

TEST(Wilcoxon, Examples) {
  EXPECT_EQ(wilcoxon_signed_rank(std::vector<double>{0, 0, 0}), 1.0);
  EXPECT_NEAR(wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4, 5}), 0.0625, 1e-15);
  EXPECT_NEAR(wilcoxon_signed_rank(std::vector<double>{3, -1, 2}), 0.5, 1e-15);
  const auto r = wilcoxon_signed_rank_test(std::vector<double>{1, 0, 2, -3});
  EXPECT_EQ(r.n_effective, 3u);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.w_plus, 3.0);
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{std::nan("")}), std::invalid_argument);
}

TEST(Wilcoxon, ExactBranchMatchesEnumerationWithTies) {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> v(-4, 4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> d(1 + trial % 15);
    for (auto& x : d) x = v(gen) * 0.5;
    EXPECT_NEAR(wilcoxon_signed_rank(d), oracle::wilcoxon(d), 1e-12);
  }
}

TEST(Wilcoxon, NormalBranch) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> n(0.3, 1.0);
  std::vector<double> d(40);
  for (auto& x : d) x = n(gen);
  const auto r = wilcoxon_signed_rank_test(d);
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
  auto flipped = d;
  for (auto& x : flipped) x = -x;
  EXPECT_NEAR(wilcoxon_signed_rank(flipped), r.p_value, 1e-15);
}

namespace {

struct StabilityFixture {
  TripletTaxonomy tax = fixtures::cholect50();
  GroundTruth gt = fixtures::random_gt(3, 250, 100, 0.06, 77);
};

}  // namespace

TEST(StabilityMatrix, PerfectVersusConstant) {
  StabilityFixture f;
  tripletbench::Run flat = fixtures::gt_as_run(f.gt, "flat");
  for (auto& v : flat.videos) {
    for (auto& x : v.probs.values()) x = 0.5;
  }
  const std::vector<tripletbench::Run> runs{fixtures::gt_as_run(f.gt, "perfect"), flat};
  const auto m = stability_matrix(runs, f.gt, f.tax, {}, 4);
  EXPECT_EQ(m.p(0, 0), 1.0);
  EXPECT_EQ(m.p(1, 1), 1.0);
  EXPECT_LT(m.p(0, 1), 0.05);
  EXPECT_EQ(m.p(0, 1), m.p(1, 0));
  EXPECT_EQ(m.clips_used, 30u);
  for (double s : m.clip_scores[0]) EXPECT_EQ(s, 1.0);
}

TEST(StabilityMatrix, IdenticalRunsAndSymmetry) {
  StabilityFixture f;
  const tripletbench::Run a = fixtures::informative_run(f.gt, 1, "a");
  tripletbench::Run a_copy = a;
  a_copy.team_id = "a_copy";
  const std::vector<tripletbench::Run> runs{a, a_copy, fixtures::noise_run(f.gt, 2, "c")};
  StabilityOptions options;
  options.seed = 7;
  const auto m = stability_matrix(runs, f.gt, f.tax, options, 3);
  EXPECT_EQ(m.p(0, 1), 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(m.p(i, j), m.p(j, i));
      EXPECT_GT(m.p(i, j), 0.0);
      EXPECT_LE(m.p(i, j), 1.0);
    }
  }
  const auto again = stability_matrix(runs, f.gt, f.tax, options, 1);
  EXPECT_EQ(m.p, again.p);
  EXPECT_EQ(stability_csv(m), stability_csv(again));
  EXPECT_EQ(nlohmann::json(m).dump(), nlohmann::json(again).dump());
}

TEST(StabilityMatrix, NeedsTwoTeams) {
  StabilityFixture f;
  const std::vector<tripletbench::Run> one{fixtures::noise_run(f.gt, 1)};
  EXPECT_THROW(stability_matrix(one, f.gt, f.tax), std::invalid_argument);
  GroundTruth tiny = fixtures::random_gt(1, 20, 100, 0.1, 1);
  const std::vector<tripletbench::Run> two{fixtures::noise_run(tiny, 1, "a"), fixtures::noise_run(tiny, 2, "b")};
  EXPECT_THROW(stability_matrix(two, tiny, f.tax), NoValidWindow);
}
