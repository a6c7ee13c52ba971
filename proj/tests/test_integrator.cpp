#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "snls/errors.hpp"
#include "snls/functionals.hpp"
#include "snls/integrator.hpp"

using namespace snls;
namespace fn = snls::functionals;

namespace {

constexpr double kPi = std::numbers::pi;

Grid line(int n = 64) { return Grid(1, 2.0 * kPi, n); }

SpectralField band_field(const Grid& g, std::mt19937_64& rng, int band, double amp) {
  std::normal_distribution<double> n01;
  SpectralField f(g);
  for (int k = -band; k <= band; ++k) f.set({k, 0}, amp / (1.0 + k * k) * Complex(n01(rng), n01(rng)));
  return f;
}

SpectralField smooth_data(const Grid& g) {
  SpectralField u(g);
  u.set({0, 0}, 0.8);
  u.set({1, 0}, Complex(0.4, 0.1));
  u.set({-2, 0}, Complex(0.0, 0.3));
  return u;
}

double l2_distance(const SpectralField& a, const SpectralField& b) { return std::sqrt(fn::mass(a - b)); }

SpectralField run_deterministic(SpectralField u, SimConfig cfg, double horizon) {
  Stepper stepper(cfg, NoiseOperator::zero(cfg.grid));
  const SpectralField zero(cfg.grid);
  const auto steps = static_cast<int>(std::lround(horizon / cfg.dt));
  for (int i = 0; i < steps; ++i) stepper.advance_with_kick(u, zero);
  return u;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig cfg{line()};
  EXPECT_NO_THROW(cfg.validate());
  cfg.lambda = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.lambda = 0.5;
  cfg.sigma = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sigma = 1.0;
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(LinearSubstep, ScalarExponentialExample) {
  SimConfig cfg{line()};
  cfg.lambda = 0.5;
  NoiseStream s(1, 0);
  const auto out = linear_stochastic_substep(basis_mode(cfg.grid, {1, 0}), cfg, NoiseOperator::zero(cfg.grid), s, 0.2);
  const Complex expected = std::exp(Complex(-0.5, 1.0) * 0.2);
  EXPECT_LT(std::abs(out.at({1, 0}) - expected), 1e-15);
  EXPECT_NEAR(std::abs(out.at({1, 0})), std::exp(-0.1), 1e-15);
}

TEST(LinearSubstep, ExactMassDecay) {
  std::mt19937_64 rng(3);
  for (double sigma : {0.0, 1.0, 2.5}) {
    SimConfig cfg{line()};
    cfg.sigma = sigma;
    cfg.lambda = 0.7;
    NoiseStream s(1, 0);
    const auto u = band_field(cfg.grid, rng, 20, 1.0);
    for (double dt : {1e-3, 0.1, 1.3}) {
      const auto out = linear_stochastic_substep(u, cfg, NoiseOperator::zero(cfg.grid), s, dt);
      const double expected = std::exp(-2.0 * cfg.lambda * dt) * fn::mass(u);
      EXPECT_LE(std::abs(fn::mass(out) - expected), 1e-14 * expected);
    }
  }
}

TEST(LinearSubstep, StationaryModeVariance) {
  // The OU substep is exact for any dt, so a few coarse steps reach the stationary law.
  SimConfig cfg{line()};
  cfg.lambda = 0.5;
  const auto phi = NoiseOperator::band(cfg.grid, 0.1, 8, 2.0);
  const int n = 20000;
  std::vector<std::vector<double>> samples(phi.active_modes().size());
  for (int traj = 0; traj < n; ++traj) {
    NoiseStream s(77, static_cast<std::uint64_t>(traj));
    SpectralField u(cfg.grid);
    for (int i = 0; i < 10; ++i) u = linear_stochastic_substep(u, cfg, phi, s, 2.0);
    for (std::size_t q = 0; q < samples.size(); ++q) samples[q].push_back(std::norm(u[phi.active_modes()[q]]));
  }
  for (std::size_t q = 0; q < samples.size(); ++q) {
    const auto& x = samples[q];
    double m = 0.0, ss = 0.0;
    for (double v : x) m += v;
    m /= n;
    for (double v : x) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / (n - 1) / n);
    // Stationary |c_k|^2 after t = 20: |phi_k|^2 (1 - e^{-20}) / (2 lambda).
    const double target = std::norm(phi.amplitudes()[phi.active_modes()[q]]) * (1.0 - std::exp(-20.0));
    EXPECT_LE(std::abs(m - target), 4.0 * se) << "mode " << q;
  }
}

TEST(NonlinearSubstep, ConstantFieldRotation) {
  const Grid g = line();
  const Complex c(0.6, -0.3);
  const double dt = 0.25;
  const auto f = to_spectral(g, PhysicalField(g.size(), c));
  const auto out = to_physical(nonlinear_substep(f, 1.0, dt));
  const Complex expected = c * std::polar(1.0, -std::norm(c) * dt);
  for (const auto& v : out) EXPECT_LT(std::abs(v - expected), 1e-13);
}

TEST(NonlinearSubstep, PreservesMassAndPotential) {
  std::mt19937_64 rng(13);
  const Grid g = line(128);
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto u = band_field(g, rng, 6, 0.8);
      const auto out = nonlinear_substep(u, sigma, 0.05);
      EXPECT_LE(std::abs(fn::mass(out) - fn::mass(u)), 1e-10 * fn::mass(u));
      const double p = 2.0 * sigma + 2.0;
      EXPECT_LE(std::abs(fn::power_integral(out, p) - fn::power_integral(u, p)), 1e-10 * fn::power_integral(u, p));
    }
  }
}

TEST(NonlinearSubstep, SigmaZeroIsGlobalPhase) {
  std::mt19937_64 rng(17);
  const Grid g = line();
  const auto u = band_field(g, rng, 10, 1.0);
  const double dt = 0.3;
  const auto out = nonlinear_substep(u, 0.0, dt);
  const Complex phase = std::polar(1.0, -dt);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_LT(std::abs(out[i] - phase * u[i]), 1e-15);
  EXPECT_NEAR(fn::energy(out, 0.0), fn::energy(u, 0.0), 1e-13);
}

TEST(NonlinearSubstep, DealiasTruncates) {
  std::mt19937_64 rng(19);
  const Grid g = line(32);
  const auto out = nonlinear_substep(band_field(g, rng, 8, 1.0), 1.0, 0.1, true);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (g.linf()[i] > 32 / 3) EXPECT_EQ(out[i], Complex(0.0));
  }
}

TEST(Step, LinearCaseIsExactFlowForBothSchemes) {
  std::mt19937_64 rng(23);
  for (Scheme scheme : {Scheme::lie, Scheme::strang}) {
    SimConfig cfg{line()};
    cfg.sigma = 0.0;
    cfg.scheme = scheme;
    cfg.dt = 0.05;
    const auto u = band_field(cfg.grid, rng, 12, 1.0);
    NoiseStream s(1, 0);
    const auto out = step(u, cfg, NoiseOperator::zero(cfg.grid), s);
    const auto k2 = cfg.grid.kappa_sq();
    for (std::size_t i = 0; i < u.size(); ++i) {
      const Complex exact = std::exp(Complex(-cfg.lambda, k2[i] - 1.0) * cfg.dt) * u[i];
      EXPECT_LT(std::abs(out[i] - exact), 1e-15);
    }
  }
}

TEST(Step, SeedDeterminism) {
  SimConfig cfg{line()};
  const auto phi = NoiseOperator::band(cfg.grid, 0.1, 8, 2.0);
  auto run = [&] {
    Stepper stepper(cfg, phi);
    NoiseStream s(31, 2);
    SpectralField u(cfg.grid);
    for (int i = 0; i < 500; ++i) stepper.advance(u, s);
    return u;
  };
  EXPECT_EQ(run(), run());
}

TEST(Step, StrangDeterministicOrder) {
  const Grid g = line();
  SimConfig cfg{g};
  cfg.lambda = 0.5;
  cfg.sigma = 1.0;
  const double horizon = 1.0;
  const auto u0 = smooth_data(g);
  const std::vector<double> dts{0.1, 0.05, 0.025};
  cfg.dt = dts.back() / 16.0;
  const auto ref = run_deterministic(u0, cfg, horizon);
  std::vector<double> err;
  for (double dt : dts) {
    cfg.dt = dt;
    err.push_back(l2_distance(run_deterministic(u0, cfg, horizon), ref));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    EXPECT_GE(std::log2(err[i] / err[i + 1]), 1.9) << "dt " << dts[i];
  }
}

TEST(Step, LieDeterministicOrderIsOne) {
  const Grid g = line();
  SimConfig cfg{g};
  cfg.scheme = Scheme::lie;
  const auto u0 = smooth_data(g);
  cfg.dt = 0.0025 / 16.0;
  const auto ref = run_deterministic(u0, cfg, 1.0);
  cfg.dt = 0.01;
  const double e1 = l2_distance(run_deterministic(u0, cfg, 1.0), ref);
  cfg.dt = 0.005;
  const double e2 = l2_distance(run_deterministic(u0, cfg, 1.0), ref);
  EXPECT_NEAR(std::log2(e1 / e2), 1.0, 0.2);
}

TEST(Step, StrangPathwiseOrder) {
  // Fine OU kicks are composed exactly into coarse kicks:
  // K_{2 delta} = e^{(-lambda + i kappa^2) delta} K_1 + K_2.
  const Grid g = line();
  const auto phi = NoiseOperator::band(g, 0.5, 8, 2.0);
  const double horizon = 1.0;
  const double fine_dt = 0.1 / 64.0;
  const int levels = 4;  // dt = fine * 16, 8, 4, 2 against the fine reference
  double total_ratio = 0.0;
  int ratios = 0;
  for (std::uint64_t path = 0; path < 4; ++path) {
    NoiseStream s(101, path);
    const auto n_fine = static_cast<int>(std::lround(horizon / fine_dt));
    std::vector<SpectralField> kicks;
    for (int i = 0; i < n_fine; ++i) kicks.push_back(sample_ou_kick(s, phi, 0.5, fine_dt));

    auto solve = [&](int stride) {
      SimConfig cfg{g};
      cfg.dt = fine_dt * stride;
      std::vector<SpectralField> level = kicks;
      for (int m = 1; m < stride; m *= 2) {
        std::vector<SpectralField> coarser;
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
          SpectralField k = level[i];
          apply_linear_flow(k, cfg.lambda, fine_dt * m);
          k += level[i + 1];
          coarser.push_back(k);
        }
        level = std::move(coarser);
      }
      Stepper stepper(cfg, phi);
      SpectralField u = smooth_data(g);
      for (const auto& k : level) stepper.advance_with_kick(u, k);
      return u;
    };

    const auto ref = solve(1);
    std::vector<double> err;
    for (int l = levels; l >= 1; --l) err.push_back(l2_distance(solve(1 << l), ref));
    for (std::size_t i = 0; i + 1 < err.size(); ++i) {
      total_ratio += std::log2(err[i] / err[i + 1]);
      ++ratios;
    }
  }
  EXPECT_GE(total_ratio / ratios, 0.9);
}

TEST(Step, BlowUpGuardTrips) {
  SimConfig cfg{line()};
  cfg.blowup_guard = 1.0;
  Stepper stepper(cfg, NoiseOperator::zero(cfg.grid));
  SpectralField u = smooth_data(cfg.grid);
  NoiseStream s(1, 0);
  try {
    stepper.advance(u, s);
    FAIL() << "guard did not trip";
  } catch (const BlowUpError& e) {
    EXPECT_GT(e.h1_norm(), 1.0);
  }
}
