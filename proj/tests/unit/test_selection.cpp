#include "oracles.hpp"

#include <radiotomo/error.hpp>
#include <radiotomo/selection.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace radiotomo;

namespace {

SparseVector sparse(const std::vector<double>& dense) {
  SparseVector w;
  w.dim = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0.0) {
      w.index.push_back(static_cast<std::uint32_t>(i));
      w.value.push_back(dense[i]);
    }
  return w;
}

// Source offering a fixed pool every slot; values are w' f without noise.
class FixedSource final : public MeasurementSource {
 public:
  FixedSource(std::vector<Candidate> pool, std::vector<double> truth)
      : pool_(std::move(pool)), truth_(std::move(truth)) {}
  std::vector<Candidate> pool(std::size_t) override { return pool_; }
  std::vector<double> acquire(std::size_t, std::span<const std::size_t> chosen) override {
    std::vector<double> out;
    for (std::size_t p : chosen) out.push_back(pool_[p].weight.dot(truth_));
    return out;
  }

 private:
  std::vector<Candidate> pool_;
  std::vector<double> truth_;
};

struct DeskCase {
  Grid grid{12, 12};
  SensorSet sensors = perimeter_sensors(grid.area(), 40, 3);
  HyperParams truth{20.0, {0.0, 5.5}, {10.0, 2.0}};
  PottsParams potts{1.5, 2};
  LabelField z = sample_potts(grid, potts, 200, 4);
  LossField f = sample_slf(z, truth, 5);
  HyperPriors priors;

  DeskCase() {
    priors.a_nu = 1300.0 * 144.0 / 3600.0;
    priors.b_nu = 2.0;
    priors.m = {0.0, 5.3};
    priors.sigma2 = {1e-4, 1e-4};
    priors.a = {0.8, 0.8};
    priors.b = {1.0, 0.5};
  }

  MeasurementSet initial(std::size_t t, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    return synthesize_measurements(f, random_links(t, sensors.size(), rng), grid, sensors, 0.39,
                                   truth, seed + 1);
  }
};

}  // namespace

TEST(Score, ZeroWeightScoresZero) {
  std::mt19937_64 rng(1);
  const auto s = oracle::random_state(6, 3, rng);
  EXPECT_EQ(score_pair(SparseVector{6, {}, {}}, s), 0.0);
  EXPECT_EQ(score_pair(sparse({0, 0, 0, 0, 0, 0}), s), 0.0);
}

TEST(Score, HandEvaluation) {
  VariationalState s;
  s.sites = 1;
  s.classes = 2;
  s.label_prob = {0.5, 0.5};
  s.field_var = {1.0, 2.0};
  s.field_mean = {0.0, 0.0};
  s.noise_shape = 1.0;
  s.noise_scale = 1.0;
  EXPECT_NEAR(score_pair(sparse({1.0}), s), 0.5 * std::log(2.0) + 0.5 * std::log(3.0), 1e-15);
  EXPECT_NEAR(score_pair(sparse({1.0}), s), 0.89588, 1e-5);
}

TEST(Score, MonotoneInWeightMagnitude) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_state(8, 3, rng);
    std::vector<double> w(8);
    for (double& v : w) v = u(rng);
    const double c = 1.0 + 3.0 * std::fabs(u(rng));
    std::vector<double> scaled = w;
    for (double& v : scaled) v *= c;
    EXPECT_GE(score_pair(sparse(scaled), s), score_pair(sparse(w), s));
  }
}

TEST(Score, EqualsTwiceExpectedExactReduction) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 2 + trial % 3;
    const auto s = oracle::random_state(4, K, rng);
    std::vector<double> w(4);
    for (double& v : w) v = u(rng);
    const double phi = s.noise_precision();
    double expected = 0.0;
    for (std::size_t code = 0; code < oracle::ipow(K, 4); ++code) {
      const auto z = oracle::decode(code, 4, K);
      double weight = 1.0;
      Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
      for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t k = static_cast<std::size_t>(z[i]);
        weight *= s.label_prob[i * K + k];
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +=
            phi * w[i] * w[i] * s.field_var[i * K + k];
      }
      expected += weight * 0.5 * std::log(m.determinant());
    }
    EXPECT_NEAR(score_pair(sparse(w), s), 2.0 * expected, 1e-10) << "trial " << trial;
  }
}

TEST(EntropyReduction, ZeroWeightBothRoutes) {
  std::mt19937_64 rng(4);
  const auto s = oracle::random_state(5, 2, rng);
  const auto r = entropy_reduction_exact(std::vector<double>(5, 0.0), std::vector<int>{0, 1, 0, 1, 1}, s, 3.0);
  EXPECT_EQ(r.determinant, 0.0);
  EXPECT_EQ(r.diagonal, 0.0);
}

TEST(EntropyReduction, RoutesAgreeOnRandomInstances) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const auto s = oracle::random_state(n, 3, rng);
    std::vector<double> w(n);
    std::vector<int> z(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = u(rng);
      z[i] = static_cast<int>(rng() % 3);
    }
    const auto r = entropy_reduction_exact(w, z, s, 5.0 * (1.0 + u(rng)));
    EXPECT_NEAR(r.determinant, r.diagonal, 1e-10);

    Eigen::MatrixXd a = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd sigma = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(a.rows(), a.rows());
    const Eigen::VectorXd wv = Eigen::VectorXd::Random(a.rows());
    const auto r1 = entropy_reduction_rank_one(wv, sigma, 2.0);
    EXPECT_NEAR(r1.determinant, r1.lemma, 1e-10);
  }
}

TEST(TopK, HandScores) {
  const Grid g(1, 1);
  std::vector<Candidate> pool{{{0, 1}, {}}, {{0, 2}, {}}, {{1, 2}, {}}};
  const std::vector<double> scores{2.0, 0.5, 1.0};
  EXPECT_EQ(top_k(scores, pool, 2), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(top_k(scores, pool, 3), (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_THROW(top_k(scores, pool, 4), InvalidArgument);
  EXPECT_THROW(top_k(scores, pool, 0), InvalidArgument);
}

TEST(TopK, TiesOrderedByLinkThenIndex) {
  std::vector<Candidate> pool{{{3, 1}, {}}, {{0, 2}, {}}, {{3, 1}, {}}, {{0, 1}, {}}};
  const std::vector<double> scores{1.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(top_k(scores, pool, 4), (std::vector<std::size_t>{3, 1, 0, 2}));
}

TEST(SelectBatch, HighVarianceRegionWins) {
  const Grid g(6, 6, 1.0, {0.0, 0.0});
  std::mt19937_64 rng(6);
  auto s = oracle::random_state(g.size(), 2, rng);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k)
      s.field_var[s.at(i, k)] = g.row_of(i) == 4 ? 5.0 : 1e-6;
  const SensorSet sensors({{-0.5, 1.0}, {5.5, 1.0}, {-0.5, 4.0}, {5.5, 4.0}, {2.0, -0.5}, {2.0, 5.5}});
  std::vector<Candidate> pool;
  for (std::size_t a = 0; a < sensors.size(); ++a)
    for (std::size_t b = 0; b < sensors.size(); ++b)
      if (a != b) pool.push_back({{a, b}, weight_vector({a, b}, g, sensors, 0.39)});
  const auto picked = select_batch(pool, s, 1);

  // Brute-force score of every candidate from the dense weight vector.
  double best = -1.0;
  std::size_t best_index = 0;
  for (std::size_t p = 0; p < pool.size(); ++p) {
    const auto w = pool[p].weight.dense();
    double score = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t k = 0; k < 2; ++k)
        score += s.label_prob[s.at(i, k)] *
                 std::log(1.0 + s.noise_precision() * s.field_var[s.at(i, k)] * w[i] * w[i]);
    if (score > best + 1e-12) {
      best = score;
      best_index = p;
    }
  }
  EXPECT_EQ(picked.front(), best_index);
  const Link l = pool[picked.front()].link;
  EXPECT_EQ(sensors[l.tx].y, 4.0);
  EXPECT_EQ(sensors[l.rx].y, 4.0);
}

TEST(Adaptive, InformativePairChosenOverEmptyOne) {
  DeskCase dc;
  const SparseVector empty{dc.grid.size(), {}, {}};
  const SparseVector informative = weight_vector({0, 1}, dc.grid, dc.sensors, 0.39);
  ASSERT_FALSE(informative.empty());
  FixedSource source({{{2, 3}, empty}, {{0, 1}, informative}}, dc.f);
  AdaptiveSchedule sched;
  sched.slots = 1;
  sched.pool_size = 2;
  sched.batch = 1;
  const auto traj = run_adaptive(dc.grid, dc.initial(100, 9), dc.priors, dc.potts, source, sched, {});
  ASSERT_EQ(traj.slots.size(), 2u);
  EXPECT_EQ(traj.slots[0].selected, (std::vector<Link>{{0, 1}}));
}

TEST(Adaptive, WholePoolBatchMakesPoliciesIdentical) {
  DeskCase dc;
  AdaptiveSchedule sched;
  sched.slots = 2;
  sched.pool_size = 30;
  sched.batch = 30;
  std::vector<Trajectory> runs;
  for (auto mode : {SelectionMode::kAdaptive, SelectionMode::kRandom}) {
    sched.mode = mode;
    SyntheticSource source(dc.grid, dc.sensors, 0.39, dc.f, 20.0, 30, 10);
    runs.push_back(run_adaptive(dc.grid, dc.initial(100, 9), dc.priors, dc.potts, source, sched, {},
                                UpdateScheme::kCoordinateAscent, &dc.z));
  }
  EXPECT_EQ(runs[0].data.shadowing(), runs[1].data.shadowing());
  EXPECT_EQ(runs[0].data.links(), runs[1].data.links());
  EXPECT_EQ(runs[0].slots.back().estimates.f_mmse, runs[1].slots.back().estimates.f_mmse);
}

TEST(Adaptive, PoliciesShareInitialSlotAndSchedule) {
  DeskCase dc;
  AdaptiveSchedule sched;
  sched.slots = 3;
  sched.pool_size = 40;
  sched.batch = 10;
  sched.seed = 3;
  std::vector<Trajectory> runs;
  for (auto mode : {SelectionMode::kAdaptive, SelectionMode::kRandom}) {
    sched.mode = mode;
    SyntheticSource source(dc.grid, dc.sensors, 0.39, dc.f, 20.0, 40, 10);
    runs.push_back(run_adaptive(dc.grid, dc.initial(100, 9), dc.priors, dc.potts, source, sched, {},
                                UpdateScheme::kCoordinateAscent, &dc.z));
  }
  ASSERT_EQ(runs[0].slots.size(), 4u);
  ASSERT_EQ(runs[1].slots.size(), 4u);
  EXPECT_EQ(runs[0].slots[0].estimates.f_mmse, runs[1].slots[0].estimates.f_mmse);
  for (std::size_t j = 0; j < 4; ++j)
    EXPECT_EQ(runs[0].slots[j].measurements, runs[1].slots[j].measurements);
  EXPECT_EQ(runs[0].data.size(), 130u);
  EXPECT_NE(runs[0].data.links(), runs[1].data.links());
}

TEST(Adaptive, SharedPoolEntriesSeeIdenticalNoise) {
  DeskCase dc;
  SyntheticSource a(dc.grid, dc.sensors, 0.39, dc.f, 20.0, 10, 77);
  SyntheticSource b(dc.grid, dc.sensors, 0.39, dc.f, 20.0, 10, 77);
  const auto pa = a.pool(1);
  const auto pb = b.pool(1);
  ASSERT_EQ(pa.size(), pb.size());
  const std::vector<std::size_t> first{2, 5};
  const std::vector<std::size_t> second{5, 7};
  const auto va = a.acquire(1, first);
  const auto vb = b.acquire(1, second);
  EXPECT_EQ(va[1], vb[0]);
  EXPECT_EQ(a.synthesis_calls(), 2u);
}

TEST(Adaptive, ZeroSlotsRunsInitialReconstructionOnly) {
  DeskCase dc;
  SyntheticSource source(dc.grid, dc.sensors, 0.39, dc.f, 20.0, 30, 10);
  AdaptiveSchedule sched;
  sched.slots = 0;
  const auto traj = run_adaptive(dc.grid, dc.initial(100, 9), dc.priors, dc.potts, source, sched, {});
  ASSERT_EQ(traj.slots.size(), 1u);
  EXPECT_EQ(traj.data.size(), 100u);
  EXPECT_EQ(source.synthesis_calls(), 0u);
  EXPECT_TRUE(std::isnan(traj.slots[0].labeling_error));
}

TEST(Adaptive, LoggedSourceExhaustsWithoutSynthesis) {
  DeskCase dc;
  std::mt19937_64 rng(12);
  const auto links = random_links(25, dc.sensors.size(), rng);
  std::vector<LoggedMeasurement> log;
  for (std::size_t j = 0; j < links.size(); ++j) log.push_back({links[j], 0.1 * static_cast<double>(j)});
  LoggedSource source(dc.grid, dc.sensors, 0.39, log, 10, 4);
  AdaptiveSchedule sched;
  sched.slots = 5;
  sched.pool_size = 10;
  sched.batch = 10;
  const auto traj = run_adaptive(dc.grid, dc.initial(100, 9), dc.priors, dc.potts, source, sched, {});
  EXPECT_EQ(traj.status, AdaptiveStatus::kPoolExhausted);
  EXPECT_EQ(traj.data.size(), 125u);
  EXPECT_EQ(source.remaining(), 0u);
  EXPECT_EQ(traj.slots.back().measurements, 125u);
  // Every logged entry was consumed exactly once.
  std::vector<double> acquired(traj.data.shadowing().begin() + 100, traj.data.shadowing().end());
  std::sort(acquired.begin(), acquired.end());
  for (std::size_t j = 0; j < acquired.size(); ++j) EXPECT_EQ(acquired[j], 0.1 * static_cast<double>(j));
}

TEST(Adaptive, LoggedPoolKeepsUnchosenEntries) {
  DeskCase dc;
  std::vector<LoggedMeasurement> log;
  for (std::size_t j = 0; j < 6; ++j) log.push_back({{j, j + 1}, static_cast<double>(j)});
  LoggedSource source(dc.grid, dc.sensors, 0.39, log, 4, 1);
  EXPECT_EQ(source.pool(1).size(), 4u);
  const std::vector<std::size_t> one{0};
  source.acquire(1, one);
  EXPECT_EQ(source.remaining(), 5u);
  EXPECT_EQ(source.pool(2).size(), 4u);
  EXPECT_THROW(source.acquire(2, std::vector<std::size_t>{4}), InvalidArgument);
}
