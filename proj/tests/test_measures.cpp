#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "snls/errors.hpp"
#include "snls/measures.hpp"

using namespace snls;

namespace {

// Equal-size sorted-sample formula: (1/n) sum |a_(i) - b_(i)|.
double sorted_w1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// Unequal sizes: replicate each sample to a common multiple, then the sorted formula.
double replicated_w1(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::lcm(a.size(), b.size());
  std::vector<double> ra, rb;
  for (double v : a) ra.insert(ra.end(), n / a.size(), v);
  for (double v : b) rb.insert(rb.end(), n / b.size(), v);
  return sorted_w1(ra, rb);
}

std::vector<double> normals(std::mt19937_64& rng, std::size_t n, double shift, double scale) {
  std::normal_distribution<double> g(shift, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

Grid line() { return Grid(1, 2.0 * std::numbers::pi, 64); }

// Linear-case ensemble shared by the record-level tests; the sigma = 0 scheme
// is exact, so a coarse dt suffices.
const EnsembleRecord& linear_record() {
  static const EnsembleRecord rec = [] {
    SimConfig cfg{line()};
    cfg.sigma = 0.0;
    cfg.dt = 0.05;
    RecordOptions o;
    o.seed = 808;
    o.k_report = -1;
    return run_ensemble(cfg, NoiseOperator::band(cfg.grid, 0.1, 8, 2.0), InitialLaw::zero(), 400,
                        Schedule::uniform(20.0, 0.1), o);
  }();
  return rec;
}

}  // namespace

TEST(EmpiricalMeasure, NormalizesAndSorts) {
  const EmpiricalMeasure m({3.0, 1.0, 2.0}, {2.0, 1.0, 1.0});
  EXPECT_EQ(m.values()[0], 1.0);
  EXPECT_EQ(m.values()[2], 3.0);
  EXPECT_NEAR(std::accumulate(m.weights().begin(), m.weights().end(), 0.0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.mean(), (3.0 * 2.0 + 1.0 + 2.0) / 4.0);
  EXPECT_DOUBLE_EQ(m.cdf(1.5), 0.25);
  EXPECT_DOUBLE_EQ(m.cdf(3.0), 1.0);
  EXPECT_EQ(m.cdf(0.0), 0.0);
}

TEST(EmpiricalMeasure, RejectsInvalidInput) {
  EXPECT_THROW(EmpiricalMeasure::uniform({}), ConfigError);
  EXPECT_THROW(EmpiricalMeasure({1.0}, {0.0}), ConfigError);
  EXPECT_THROW(EmpiricalMeasure({1.0, 2.0}, {1.0}), ConfigError);
}

TEST(Wasserstein, HandExamples) {
  const auto a = EmpiricalMeasure::uniform({0.3, -1.0, 2.0});
  EXPECT_EQ(wasserstein1(a, a), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1(EmpiricalMeasure::uniform({0.0}), EmpiricalMeasure::uniform({1.0})), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein1(EmpiricalMeasure::uniform({0.0, 1.0}), EmpiricalMeasure::uniform({0.5, 1.5})), 0.5);
}

TEST(Wasserstein, MatchesSortedSampleOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = normals(rng, 50, 0.0, 1.0);
    const auto b = normals(rng, 50, 0.4, 2.0);
    EXPECT_NEAR(wasserstein1(EmpiricalMeasure::uniform(a), EmpiricalMeasure::uniform(b)), sorted_w1(a, b), 1e-12);
    const auto c = normals(rng, 12, 1.0, 0.5);
    EXPECT_NEAR(wasserstein1(EmpiricalMeasure::uniform(a), EmpiricalMeasure::uniform(c)), replicated_w1(a, c),
                1e-12);
  }
}

TEST(Wasserstein, MetricProperties) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = EmpiricalMeasure::uniform(normals(rng, 30, 0.0, 1.0));
    const auto b = EmpiricalMeasure::uniform(normals(rng, 17, 0.5, 1.0));
    const auto c = EmpiricalMeasure::uniform(normals(rng, 23, -0.5, 3.0));
    const double ab = wasserstein1(a, b), ba = wasserstein1(b, a);
    EXPECT_NEAR(ab, ba, 1e-14);
    EXPECT_LE(wasserstein1(a, c), ab + wasserstein1(b, c) + 1e-12);
    EXPECT_GT(ab, 0.0);
  }
  // Identity of indiscernibles: same multiset in a different order and split weighting.
  const EmpiricalMeasure x({1.0, 2.0, 2.0}, {1.0, 1.0, 1.0});
  const EmpiricalMeasure y({2.0, 1.0}, {2.0, 1.0});
  EXPECT_EQ(wasserstein1(x, y), 0.0);
}

TEST(KbAverage, ConstantSingleTrajectoryIsPointMass) {
  EnsembleRecord rec(line(), {0.0, 0.5, 1.0}, {"mass"}, 1);
  for (auto& v : rec.series(0, 0)) v = 2.5;
  const auto mu = kb_average(rec, "mass", 1.0);
  EXPECT_EQ(mu.mean(), 2.5);
  EXPECT_EQ(wasserstein1(mu, EmpiricalMeasure::uniform({2.5})), 0.0);
}

TEST(KbAverage, DeterministicDecayMean) {
  SimConfig cfg{line()};
  cfg.sigma = 0.0;
  cfg.dt = 0.01;
  SpectralField u0(cfg.grid);
  u0.set({1, 0}, 1.0);
  const double interval = 0.05;
  const auto rec = run_ensemble(cfg, NoiseOperator::zero(cfg.grid), InitialLaw::fixed(u0), 2,
                                Schedule::uniform(10.0, interval), RecordOptions{});
  const double lambda = cfg.lambda;
  for (double n : {2.0, 5.0, 10.0}) {
    const double exact = (1.0 - std::exp(-2.0 * lambda * n)) / (2.0 * lambda * n);
    // Equal-weight Riemann sum over n / interval + 1 nodes: O(interval / n) error, |f'| <= 2 lambda M(0).
    const double riemann = 2.0 * lambda * interval / n + interval / n;
    EXPECT_NEAR(kb_average(rec, "mass", n).mean(), exact, riemann);
  }
}

TEST(KbAverage, WindowErrors) {
  EnsembleRecord rec(line(), {0.0, 0.5, 1.5}, {"mass"}, 1);
  EXPECT_THROW(kb_average(rec, "mass", 1.5), DataError);
  EXPECT_THROW(kb_average(rec, "mass", 0.1), DataError);
}

TEST(KbAverage, PoolingConsistency) {
  const auto& rec = linear_record();
  const auto full = kb_average(rec, "mass", 0.0, 10.0);
  const auto first = kb_average(rec, "mass", 0.0, 4.0);   // 41 sample times
  const auto second = kb_average(rec, "mass", 4.1, 10.0);  // 60 sample times
  const auto merged = EmpiricalMeasure::merge(first, 41.0, second, 60.0);
  // Same atoms and weights; only summation order differs.
  const double roundoff = 1e-10 * full.mean();
  EXPECT_NEAR(wasserstein1(full, merged), 0.0, roundoff);
  EXPECT_NEAR(full.mean(), merged.mean(), roundoff);
}

TEST(KbAverage, LinearMeanApproachesStationaryMass) {
  const auto& rec = linear_record();
  const auto phi = NoiseOperator::band(rec.grid(), 0.1, 8, 2.0);
  const double hs = hs_norm_sq(phi, HsWeight::identity);
  const double lambda = 0.5;
  const double n = 20.0;
  // E mean of mu_n = hs/(2 lambda) (1 - (1 - e^{-2 lambda n}) / (2 lambda n)).
  const double expected = hs / (2.0 * lambda) * (1.0 - (1.0 - std::exp(-2.0 * lambda * n)) / (2.0 * lambda * n));
  std::vector<double> per_traj;
  const auto valid = rec.valid_trajectories();
  for (auto j : valid) {
    const auto m = rec.series("mass", j);
    per_traj.push_back(std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size()));
  }
  const auto e = summarize(per_traj);
  const double riemann = hs * 0.1 / n;
  EXPECT_NEAR(kb_average(rec, "mass", n).mean(), e.mean, 1e-14);
  EXPECT_LE(std::abs(e.mean - expected), 3.0 * e.std_error + riemann);
}

TEST(StationarityGap, Examples) {
  const auto& rec = linear_record();
  // Zero start: the t = 0 marginal is the point mass at 0, so W1 is the mean mass at t = 20.
  EXPECT_NEAR(stationarity_gap(rec, "mass", 0.0, 20.0), marginal(rec, "mass", 20.0).mean(), 1e-15);
  EXPECT_GT(stationarity_gap(rec, "mass", 0.0, 20.0), 0.0);
  const double gap = stationarity_gap(rec, "mass", 15.0, 20.0);
  EXPECT_LT(gap, 2.0 * gap_resolution(rec, "mass", 20.0));

  EnsembleRecord still(line(), {0.0, 1.0}, {"mass"}, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    for (auto& v : still.series(0, j)) v = 0.7;
  }
  EXPECT_EQ(stationarity_gap(still, "mass", 0.0, 1.0), 0.0);
}

TEST(KbConvergence, LinearDistancesShrink) {
  const auto kb = kb_convergence(linear_record(), "mass", {5.0, 10.0, 20.0});
  ASSERT_EQ(kb.distances.size(), 2u);
  EXPECT_TRUE(kb.nonincreasing);
  EXPECT_GT(kb.distances[0], 0.0);
  const auto single = kb_convergence(linear_record(), "mass", {10.0});
  EXPECT_TRUE(single.distances.empty());
  EXPECT_TRUE(single.nonincreasing);
}

TEST(MeasureCsv, WritesValueWeightRows) {
  const auto path = std::filesystem::temp_directory_path() / "snls_measure.csv";
  write_measure_csv(EmpiricalMeasure::uniform({1.0, 3.0}), path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "value,weight");
  EXPECT_EQ(row, "1,0.5");
  std::filesystem::remove(path);
}
