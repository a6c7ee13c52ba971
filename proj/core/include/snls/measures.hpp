#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "snls/ensemble.hpp"

namespace snls {

/// Weighted empirical law of a scalar observable. Samples are kept sorted by
/// value; weights are strictly positive and normalized to sum to 1.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<double> values, std::vector<double> weights);
  static EmpiricalMeasure uniform(std::vector<double> values);
  /// Mixture wa * a + wb * b (wa, wb > 0, renormalized).
  static EmpiricalMeasure merge(const EmpiricalMeasure& a, double wa, const EmpiricalMeasure& b, double wb);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> weights() const noexcept { return weights_; }

  double mean() const noexcept;
  double moment(int p) const noexcept;
  /// P(X <= x).
  double cdf(double x) const noexcept;

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
};

/// Exact W1 distance of two scalar laws, int |F_a(x) - F_b(x)| dx.
double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Krylov-Bogolyubov average (1/n) int_0^n P_t(u0, .) dt of one observable:
/// pools every valid trajectory at every sample time in [0, horizon] with
/// equal weight. Throws DataError with fewer than 2 sample times in the
/// window or a non-uniform schedule there.
EmpiricalMeasure kb_average(const EnsembleRecord& rec, std::string_view name, double horizon);
/// Same pooling over the sample times in [t_begin, t_end].
EmpiricalMeasure kb_average(const EnsembleRecord& rec, std::string_view name, double t_begin, double t_end);

/// Cross-trajectory marginal of an observable at one sample time.
EmpiricalMeasure marginal(const EnsembleRecord& rec, std::string_view name, double t);

/// W1 between the marginals at t1 and t2.
double stationarity_gap(const EnsembleRecord& rec, std::string_view name, double t1, double t2);

/// Sampling resolution of a marginal: bootstrap mean of W1(marginal, resample),
/// resampling trajectories. Deterministic for a fixed seed.
double gap_resolution(const EnsembleRecord& rec, std::string_view name, double t, int reps = 200,
                      std::uint64_t seed = 7);

struct KbConvergence {
  std::vector<double> horizons;
  /// distances[i] = W1(mu_{h_i}, mu_{h_{i+1}}).
  std::vector<double> distances;
  /// Bootstrap SE of distances[i+1] - distances[i].
  std::vector<double> difference_se;
  bool nonincreasing = true;
};

/// W1 between kb_average at consecutive horizons, with a trajectory-bootstrap
/// tolerance: nonincreasing iff d_{i+1} <= d_i + 3 SE for every i.
KbConvergence kb_convergence(const EnsembleRecord& rec, std::string_view name, std::vector<double> horizons,
                             int reps = 100, std::uint64_t seed = 11);

/// `value,weight` rows.
void write_measure_csv(const EmpiricalMeasure& m, const std::filesystem::path& path);

}  // namespace snls
