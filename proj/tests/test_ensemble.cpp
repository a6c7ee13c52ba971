#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "snls/errors.hpp"
#include "snls/functionals.hpp"
#include "snls/ensemble.hpp"

using namespace snls;

namespace {

Grid line(int n = 64) { return Grid(1, 2.0 * std::numbers::pi, n); }

SimConfig linear_config(double dt = 0.01) {
  SimConfig cfg{line()};
  cfg.lambda = 0.5;
  cfg.sigma = 0.0;
  cfg.dt = dt;
  return cfg;
}

RecordOptions options(unsigned workers = 1) {
  RecordOptions o;
  o.seed = 12345;
  o.workers = workers;
  o.tail_cutoffs = {2, 8};
  return o;
}

void expect_identical(const EnsembleRecord& a, const EnsembleRecord& b) {
  ASSERT_EQ(a.observable_names(), b.observable_names());
  ASSERT_EQ(a.trajectories(), b.trajectories());
  ASSERT_EQ(a.sample_times().size(), b.sample_times().size());
  for (std::size_t o = 0; o < a.observable_names().size(); ++o) {
    for (std::size_t j = 0; j < a.trajectories(); ++j) {
      const auto x = a.series(o, j);
      const auto y = b.series(o, j);
      for (std::size_t t = 0; t < x.size(); ++t) {
        ASSERT_TRUE(x[t] == y[t] || (std::isnan(x[t]) && std::isnan(y[t])));
      }
    }
  }
}

}  // namespace

TEST(Summarize, HandArithmetic) {
  const std::vector<double> c(5, 3.25);
  const auto e = summarize(c);
  EXPECT_EQ(e.mean, 3.25);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n, 5u);
  const std::vector<double> two{0.0, 2.0};
  const auto f = summarize(two);
  EXPECT_DOUBLE_EQ(f.mean, 1.0);
  EXPECT_DOUBLE_EQ(f.std_error, 1.0);
}

TEST(Schedule, UniformIncludesEndpoints) {
  const auto s = Schedule::uniform(1.0, 0.25);
  ASSERT_EQ(s.times.size(), 5u);
  EXPECT_EQ(s.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(s.times.back(), 1.0);
}

TEST(RunEnsemble, ZeroNoiseZeroStartStaysZero) {
  const auto cfg = linear_config();
  const auto rec = run_ensemble(cfg, NoiseOperator::zero(cfg.grid), InitialLaw::zero(), 3,
                                Schedule::uniform(2.0, 0.5), options());
  for (std::size_t o = 0; o < rec.observable_names().size(); ++o) {
    // int |u|^{2 sigma} with sigma = 0 integrates 1: the box volume.
    const double expected = rec.observable_names()[o] == observables::nl_weight ? cfg.grid.volume() : 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      for (double v : rec.series(o, j)) EXPECT_EQ(v, expected) << rec.observable_names()[o];
    }
  }
}

TEST(RunEnsemble, DeterministicLinearDecay) {
  const auto cfg = linear_config(0.001);
  SpectralField u0(cfg.grid);
  u0.set({0, 0}, 0.5);
  u0.set({3, 0}, Complex(0.1, -0.2));
  const auto rec = run_ensemble(cfg, NoiseOperator::zero(cfg.grid), InitialLaw::fixed(u0), 2,
                                Schedule::uniform(3.0, 0.25), options());
  const double m0 = functionals::mass(u0);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto m = rec.series(observables::mass, j);
    for (std::size_t t = 0; t < m.size(); ++t) {
      const double expected = std::exp(-2.0 * cfg.lambda * rec.sample_times()[t]) * m0;
      EXPECT_LE(std::abs(m[t] - expected), 1e-13 * m0);
    }
  }
}

TEST(RunEnsemble, TransientMeanMassLinearCase) {
  const auto cfg = linear_config(0.01);
  const auto phi = NoiseOperator::band(cfg.grid, 0.1, 8, 2.0);
  const auto rec = run_ensemble(cfg, phi, InitialLaw::zero(), 400, Schedule::uniform(20.0, 1.0), options(0));
  const auto e = estimate_observable(rec, observables::mass, 20.0);
  const double hs = hs_norm_sq(phi, HsWeight::identity);
  const double expected = hs * (1.0 - std::exp(-2.0 * cfg.lambda * 20.0)) / (2.0 * cfg.lambda);
  EXPECT_LE(std::abs(e.mean - expected), 3.0 * e.std_error);
  EXPECT_EQ(e.n, 400u);
}

TEST(RunEnsemble, WorkerCountInvariance) {
  SimConfig cfg{line()};
  cfg.sigma = 1.0;
  const auto phi = NoiseOperator::band(cfg.grid, 0.3, 8, 2.0);
  RecordOptions o = options(1);
  o.snapshot_times = {0.5, 1.0};
  const auto a = run_ensemble(cfg, phi, InitialLaw::zero(), 7, Schedule::uniform(1.0, 0.1), o);
  o.workers = 3;
  const auto b = run_ensemble(cfg, phi, InitialLaw::zero(), 7, Schedule::uniform(1.0, 0.1), o);
  expect_identical(a, b);
  for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(a.snapshot(j, 1), b.snapshot(j, 1));
}

TEST(RunEnsemble, ScheduleInvariance) {
  SimConfig cfg{line()};
  cfg.sigma = 1.0;
  const auto phi = NoiseOperator::band(cfg.grid, 0.3, 8, 2.0);
  const auto coarse = run_ensemble(cfg, phi, InitialLaw::zero(), 3, Schedule::uniform(1.0, 0.5), options());
  const auto fine = run_ensemble(cfg, phi, InitialLaw::zero(), 3, Schedule::uniform(1.0, 0.05), options());
  for (double t : {0.0, 0.5, 1.0}) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (const auto& name : coarse.observable_names()) {
        EXPECT_EQ(coarse.series(name, j)[coarse.time_index(t)], fine.series(name, j)[fine.time_index(t)]);
      }
    }
  }
}

TEST(RunEnsemble, FlaggedTrajectoryAccounting) {
  SimConfig cfg{line()};
  cfg.sigma = 1.0;
  cfg.blowup_guard = 0.55;  // below the tail of the H^1 norm distribution at t = 2
  const auto phi = NoiseOperator::band(cfg.grid, 0.3, 8, 2.0);
  const auto rec = run_ensemble(cfg, phi, InitialLaw::zero(), 20, Schedule::uniform(2.0, 0.1), options());
  const std::size_t flagged = rec.flagged_count();
  EXPECT_GT(flagged, 0u);
  EXPECT_LT(flagged, 20u);
  EXPECT_EQ(rec.valid_trajectories().size() + flagged, rec.trajectories());
  for (std::size_t j = 0; j < rec.trajectories(); ++j) {
    const auto& st = rec.status(j);
    const auto m = rec.series(observables::mass, j);
    if (st.blown_up) {
      EXPECT_GT(st.blowup_norm, 0.55);
      EXPECT_TRUE(std::isnan(m.back()));
    } else {
      for (double v : m) EXPECT_TRUE(std::isfinite(v));
    }
  }
  EXPECT_EQ(estimate_observable(rec, observables::mass, 2.0).n, rec.trajectories() - flagged);
}

TEST(RunEnsemble, GaussianInitialLawVariance) {
  const auto cfg = linear_config(0.01);
  const auto scale = NoiseOperator::band(cfg.grid, 0.2, 4, 0.0);
  const auto rec = run_ensemble(cfg, NoiseOperator::zero(cfg.grid), InitialLaw::gaussian(scale), 4000,
                                Schedule::uniform(0.01, 0.01), options(0));
  for (int k = -4; k <= 4; ++k) {
    const auto e = estimate_observable(rec, observables::mode({k, 0}, 1), 0.0);
    EXPECT_LE(std::abs(e.mean - 0.04), 4.0 * e.std_error) << k;
  }
  EXPECT_EQ(estimate_observable(rec, observables::mode({6, 0}, 1), 0.0).mean, 0.0);
}

TEST(RunEnsemble, RejectsBadInput) {
  const auto cfg = linear_config(0.01);
  const auto phi = NoiseOperator::zero(cfg.grid);
  EXPECT_THROW(run_ensemble(cfg, phi, InitialLaw::zero(), 0, Schedule::uniform(1.0, 0.1), options()), ConfigError);
  EXPECT_THROW(run_ensemble(cfg, phi, InitialLaw::zero(), 1, Schedule{{0.0, 0.015}}, options()), ConfigError);
}

TEST(EnsembleRecord, LookupErrors) {
  const auto cfg = linear_config();
  const auto rec = run_ensemble(cfg, NoiseOperator::zero(cfg.grid), InitialLaw::zero(), 1,
                                Schedule::uniform(1.0, 0.5), options());
  EXPECT_THROW(rec.observable_id("nope"), DataError);
  EXPECT_THROW(rec.time_index(0.25), DataError);
  EXPECT_THROW(estimate_observable(rec, observables::mass, 0.3), DataError);
  EXPECT_TRUE(rec.has_observable(observables::tail(8)));
  EXPECT_TRUE(rec.has_observable("mode_-8"));
}

TEST(RecordCsv, RoundTripIsExact) {
  SimConfig cfg{line()};
  cfg.sigma = 1.0;
  const auto phi = NoiseOperator::band(cfg.grid, 0.3, 8, 2.0);
  RecordOptions o = options();
  o.snapshot_times = {0.5};
  const auto rec = run_ensemble(cfg, phi, InitialLaw::zero(), 3, Schedule::uniform(1.0, 0.25), o);
  const auto dir = std::filesystem::temp_directory_path() / "snls_record_roundtrip";
  std::filesystem::remove_all(dir);
  const auto files = write_record_csv(rec, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "mass.csv"));
  const auto back = read_record_csv(dir);
  expect_identical(rec, back);
  EXPECT_EQ(back.snapshot(2, 0), rec.snapshot(2, 0));
  EXPECT_EQ(back.meta.seed, rec.meta.seed);
  EXPECT_EQ(back.meta.tail_cutoffs, rec.meta.tail_cutoffs);
  std::filesystem::remove_all(dir);
}
