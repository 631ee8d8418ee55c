#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "dreid/evaluation.hpp"
#include "dreid/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using dreid::ErrorCode;
using Eigen::MatrixXd;

TEST(Cmc, StrictlyNearestTrueEntryGivesPerfectRankOne) {
  MatrixXd d(3, 3);
  d << 0.1, 2.0, 3.0,
       5.0, 0.2, 4.0,
       1.0, 1.5, 0.9;
  const std::vector<int> g{7, 8, 9};
  const std::vector<int> p{7, 8, 9};
  const auto c = dreid::cmc_evaluate(d, g, p);
  EXPECT_EQ(c.accuracies, (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(Cmc, HandEnumeratedCurve) {
  // Probe 0 (class 1) sees class 0 closer; probe 1 (class 2) sees its own first.
  MatrixXd d(2, 3);
  d << 1.0, 2.0, 3.0,
       2.5, 3.0, 0.5;
  const std::vector<int> g{0, 1, 2};
  const std::vector<int> p{1, 2};
  const auto c = dreid::cmc_evaluate(d, g, p);
  EXPECT_EQ(c.accuracies, (std::vector<double>{0.5, 1.0, 1.0}));
}

TEST(Cmc, MultiShotUsesClassMinimum) {
  // Five gallery entries per class; the class distance is the minimum entry.
  MatrixXd d(2, 10);
  d << 9, 4, 7, 8, 6, /**/ 5, 5, 4.5, 10, 12,
       3, 9, 9, 9, 9, /**/ 3.5, 3.2, 8, 8, 8;
  const std::vector<int> g{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const std::vector<int> p{0, 1};
  EXPECT_EQ(dreid::true_class_rank(d, g, 0, 0), 1u);  // 4 < 4.5
  EXPECT_EQ(dreid::true_class_rank(d, g, 1, 1), 2u);  // 3 < 3.2
  const auto c = dreid::cmc_evaluate(d, g, p);
  EXPECT_EQ(c.accuracies, (std::vector<double>{0.5, 1.0}));
}

TEST(Cmc, TiesGoToEarlierGalleryEntry) {
  MatrixXd d(2, 2);
  d << 1.0, 1.0,
       1.0, 1.0;
  const std::vector<int> g{4, 3};
  EXPECT_EQ(dreid::true_class_rank(d, g, 4, 0), 1u);
  EXPECT_EQ(dreid::true_class_rank(d, g, 3, 1), 2u);
}

TEST(Cmc, MatchesBruteForceOracle) {
  auto rng = dreid::make_engine(1);
  for (int t = 0; t < 50; ++t) {
    const auto rows = static_cast<Eigen::Index>(1 + dreid::uniform_index(rng, 10));
    const auto cols = static_cast<Eigen::Index>(1 + dreid::uniform_index(rng, 10));
    const int classes = 1 + static_cast<int>(dreid::uniform_index(rng, 5));
    MatrixXd d(rows, cols);
    // Coarse values so that ties actually happen.
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = static_cast<double>(dreid::uniform_index(rng, 6));
    std::vector<int> g(static_cast<std::size_t>(cols));
    std::vector<int> p(static_cast<std::size_t>(rows));
    for (auto& v : g) v = static_cast<int>(dreid::uniform_index(rng, static_cast<std::size_t>(classes)));
    for (auto& v : p) v = static_cast<int>(dreid::uniform_index(rng, static_cast<std::size_t>(classes + 1)));
    const std::size_t k_max = std::set<int>(g.begin(), g.end()).size();
    const auto curve = dreid::cmc_evaluate(d, g, p);
    EXPECT_EQ(curve.accuracies, oracle::brute_force_cmc(d, g, p, k_max)) << "matrix " << t;
    for (Eigen::Index i = 0; i < rows; ++i) {
      EXPECT_EQ(dreid::true_class_rank(d, g, p[static_cast<std::size_t>(i)], i),
                oracle::brute_force_rank(d, g, p[static_cast<std::size_t>(i)], i));
    }
    EXPECT_TRUE(curve.is_monotone());
  }
}

TEST(Cmc, NegatedDistancesReverseTheRanking) {
  auto rng = dreid::make_engine(2);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(dreid::uniform_index(rng, 8));
    MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = dreid::uniform01(rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i;
    const MatrixXd neg = -d;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      const std::size_t r = dreid::true_class_rank(d, labels, l, i);
      EXPECT_EQ(dreid::true_class_rank(neg, labels, l, i), static_cast<std::size_t>(n) + 1 - r);
      EXPECT_EQ(dreid::true_class_rank(neg, labels, l, i), oracle::brute_force_rank(neg, labels, l, i));
    }
  }
}

TEST(Cmc, MissingProbeClassIsAPermanentMiss) {
  MatrixXd d(2, 2);
  d << 0.0, 1.0,
       0.0, 1.0;
  const std::vector<int> g{0, 1};
  const std::vector<int> p{0, 5};
  const auto c = dreid::cmc_evaluate(d, g, p);
  EXPECT_EQ(c.missing_probes, 1u);
  EXPECT_EQ(c.accuracies, (std::vector<double>{0.5, 0.5}));
}

TEST(Cmc, ShapeMismatch) {
  const MatrixXd d = MatrixXd::Zero(2, 3);
  const std::vector<int> g{0, 1};
  const std::vector<int> p{0, 1};
  EXPECT_DREID_ERROR(dreid::cmc_evaluate(d, g, p), ErrorCode::kDimensionMismatch);
}

TEST(Cmc, AverageCarriesSaturatedValues) {
  dreid::CmcCurve a{{0.5, 1.0}, 0};
  dreid::CmcCurve b{{0.25, 0.5, 0.75}, 0};
  const std::vector<dreid::CmcCurve> curves{a, b};
  const auto m = dreid::average_curves(curves);
  ASSERT_EQ(m.accuracies.size(), 3u);
  EXPECT_DOUBLE_EQ(m.accuracies[0], 0.375);
  EXPECT_DOUBLE_EQ(m.accuracies[1], 0.75);
  EXPECT_DOUBLE_EQ(m.accuracies[2], 0.875);
  EXPECT_TRUE(m.is_monotone());
}

std::vector<dreid::ProtocolSample> two_group_dataset(int persons, int frames) {
  std::vector<dreid::ProtocolSample> s;
  for (int p = 0; p < persons; ++p)
    for (int g = 0; g < 2; ++g)
      for (int f = 0; f < frames; ++f) s.push_back({100 + p, g});
  return s;
}

TEST(Protocol, SplitRespectsIdentityAndGroups) {
  const auto samples = two_group_dataset(10, 6);
  dreid::ProtocolConfig cfg;
  cfg.gallery_group = 0;
  cfg.probe_group = 1;
  cfg.protocol = dreid::Protocol::kMultiShot;
  for (int t = 0; t < 5; ++t) {
    const auto split = dreid::make_trial_split(samples, cfg, t);
    std::set<int> train_people, test_people;
    for (auto i : split.train) train_people.insert(samples[i].person);
    for (auto i : split.gallery) {
      test_people.insert(samples[i].person);
      EXPECT_EQ(samples[i].group, 0);
    }
    for (auto i : split.probe) {
      EXPECT_EQ(samples[i].group, 1);
      EXPECT_TRUE(test_people.contains(samples[i].person));
    }
    EXPECT_EQ(train_people.size(), 5u);
    EXPECT_EQ(test_people.size(), 5u);
    for (int p : train_people) EXPECT_FALSE(test_people.contains(p));
    EXPECT_EQ(split.gallery.size(), 25u);
    EXPECT_EQ(split.probe.size(), 30u);
  }
}

TEST(Protocol, SameGroupProbesExcludeGalleryFrames) {
  const auto samples = two_group_dataset(6, 4);
  dreid::ProtocolConfig cfg;
  const auto split = dreid::make_trial_split(samples, cfg, 0);
  std::set<std::size_t> gallery(split.gallery.begin(), split.gallery.end());
  EXPECT_EQ(gallery.size(), 3u);
  for (auto i : split.probe) EXPECT_FALSE(gallery.contains(i));
  EXPECT_EQ(split.probe.size(), 3u * 3u);
}

TEST(Protocol, TooFewFramesSamplesWithReplacementAndWarns) {
  const auto samples = two_group_dataset(4, 2);
  dreid::ProtocolConfig cfg;
  cfg.protocol = dreid::Protocol::kMultiShot;
  std::vector<std::string> warnings;
  const auto split = dreid::make_trial_split(samples, cfg, 0, &warnings);
  EXPECT_EQ(split.gallery.size(), 10u);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(Protocol, DeterministicPerSeed) {
  const auto samples = two_group_dataset(8, 5);
  std::vector<double> x;
  auto rng = dreid::make_engine(3);
  for (std::size_t i = 0; i < samples.size(); ++i) x.push_back(samples[i].person + 0.6 * dreid::uniform01(rng));
  const dreid::Matcher matcher = [&x](auto, auto gallery, auto probe) {
    MatrixXd d(static_cast<Eigen::Index>(probe.size()), static_cast<Eigen::Index>(gallery.size()));
    for (std::size_t i = 0; i < probe.size(); ++i)
      for (std::size_t j = 0; j < gallery.size(); ++j)
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::abs(x[probe[i]] - x[gallery[j]]);
    return d;
  };
  dreid::ProtocolConfig cfg;
  cfg.trials = 3;
  cfg.seed = 42;
  const auto a = dreid::run_protocol(samples, cfg, matcher);
  const auto b = dreid::run_protocol(samples, cfg, matcher);
  ASSERT_EQ(a.trials.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(a.trials[t].accuracies, b.trials[t].accuracies);
  EXPECT_EQ(a.mean.accuracies, b.mean.accuracies);
  EXPECT_TRUE(a.mean.is_monotone());

  cfg.seed = 43;
  const auto c = dreid::run_protocol(samples, cfg, matcher);
  bool differs = false;
  for (int t = 0; t < 3; ++t) {
    differs |= dreid::make_trial_split(samples, cfg, t).gallery !=
               dreid::make_trial_split(samples, {.trials = 3, .seed = 42}, t).gallery;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(c.trials.size(), 3u);
}

TEST(Protocol, IdenticalFramesPerPersonGivePerfectRankOne) {
  const auto samples = two_group_dataset(6, 3);
  const dreid::Matcher matcher = [&samples](auto, auto gallery, auto probe) {
    MatrixXd d(static_cast<Eigen::Index>(probe.size()), static_cast<Eigen::Index>(gallery.size()));
    for (std::size_t i = 0; i < probe.size(); ++i)
      for (std::size_t j = 0; j < gallery.size(); ++j)
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::abs(samples[probe[i]].person - samples[gallery[j]].person);
    return d;
  };
  dreid::ProtocolConfig cfg;
  cfg.trials = 4;
  const auto r = dreid::run_protocol(samples, cfg, matcher);
  EXPECT_DOUBLE_EQ(r.mean.rank(1), 1.0);
}

TEST(Protocol, MatcherShapeChecked) {
  const auto samples = two_group_dataset(4, 2);
  const dreid::Matcher bad = [](auto, auto, auto) { return MatrixXd::Zero(1, 1).eval(); };
  EXPECT_DREID_ERROR(dreid::run_protocol(samples, {}, bad), ErrorCode::kDimensionMismatch);
}

}  // namespace
