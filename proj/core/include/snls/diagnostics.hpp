#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snls/ensemble.hpp"
#include "snls/integrator.hpp"
#include "snls/noise.hpp"

namespace snls {

struct Window {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct BalanceTerm {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
};

/// Expectation-level check of an Ito balance law
///   d/dt E[X] + 2 lambda E[X] = sum of drift terms.
/// Derivatives are centered differences at the midpoints of consecutive
/// samples, averaged over the window; SEs come from per-trajectory window
/// means, so martingale fluctuations show up as Monte Carlo error.
struct BalanceReport {
  Window window;
  double lhs = 0.0;
  double lhs_se = 0.0;
  std::vector<BalanceTerm> terms;
  double rhs = 0.0;  // sum of terms[i].value
  double residual = 0.0;
  double residual_se = 0.0;
  double dt_used = 0.0;
  double sample_spacing = 0.0;
  /// max over midpoints of |ensemble-mean residual|
  double max_abs_pointwise = 0.0;
  /// Estimated O(spacing^2) bias of the difference quotients and midpoint
  /// averages, from derivatives of the mean series. Only meaningful when the
  /// series carry no Monte Carlo noise.
  double discretization_bound = 0.0;
  std::string note;

  /// max(3 SE, floor); for deterministic data (SE = 0) max(floor, 2 * discretization_bound).
  double tolerance(double floor) const noexcept;
  bool passes(double floor) const noexcept;
};

/// X = M: rhs = |Phi|^2_{HS(L2,L2)}.
BalanceReport mass_balance_residual(const EnsembleRecord& rec, const SimConfig& cfg, const NoiseOperator& phi,
                                    Window window);

/// X = H: rhs = lambda sigma/(sigma+1) E int|u|^{2 sigma+2} + |grad Phi|^2/2
///              - E |(|u|^sigma Phi)|^2_HS / 2 - sigma E sum_i (|u|^{2 sigma-2}, Re(conj(u) Phi e_i)^2),
/// with the two Ito corrections in their closed forms for diagonal circular
/// noise (see ito_corrections_closed_form).
BalanceReport energy_balance_residual(const EnsembleRecord& rec, const SimConfig& cfg, const NoiseOperator& phi,
                                      Window window);

/// CSV rows `term,value,std_error`: lhs, each rhs term, rhs, residual.
void write_balance_csv(const BalanceReport& report, const std::filesystem::path& path);

/// Ito correction functionals of a single state.
struct ItoCorrections {
  double weighted_hs = 0.0;       // |(|u|^sigma Phi)|^2_{HS(L2,L2)}
  double real_part_sum = 0.0;     // sum_i (|u|^{2 sigma - 2}, (Re(conj(u) Phi e_i))^2)
  double noise_projection = 0.0;  // sum_i Re(u, Phi e_i)^2
};

/// Closed forms for Phi e_k = phi_k e_k driven by circular noise, whose real
/// directions are phi_k e_k / sqrt 2 and i phi_k e_k / sqrt 2:
///   weighted_hs = |Phi|^2 L^{-d} int |u|^{2 sigma},
///   real_part_sum = |Phi|^2 L^{-d} int |u|^{2 sigma} / 2,
///   noise_projection = sum_k |phi_k|^2 |c_k|^2 / 2.
ItoCorrections ito_corrections_closed_form(const SpectralField& u, const NoiseOperator& phi, double sigma);

/// The same quantities summed direction by direction on the grid. For
/// sigma < 1, |u|^{2 sigma - 2} is evaluated with |u| clamped below at 1e-8.
ItoCorrections ito_corrections_direct(const SpectralField& u, const NoiseOperator& phi, double sigma);

inline constexpr double kSingularClamp = 1e-8;

struct TransientPoint {
  double t = 0.0;
  double predicted = 0.0;
  double estimated = 0.0;
  /// SE of estimated - predicted (paired with the sampled M(0)).
  double std_error = 0.0;

  bool within(double z) const noexcept;
};

/// E[M(t)] = e^{-2 lambda t} E[M(0)] + |Phi|^2 (1 - e^{-2 lambda t}) / (2 lambda)
/// at every sample time, against the ensemble mean.
std::vector<TransientPoint> transient_mass_curve(const EnsembleRecord& rec, const SimConfig& cfg,
                                                 const NoiseOperator& phi);

struct MomentCheck {
  int k = 1;
  double lhs = 0.0;  // 2 lambda E[M^{k+1}]
  double lhs_se = 0.0;
  double noise_term = 0.0;       // |Phi|^2 E[M^k]
  double projection_term = 0.0;  // 2k E[M^{k-1} sum_i Re(u, Phi e_i)^2]
  double rhs = 0.0;
  double difference = 0.0;  // lhs - rhs
  double difference_se = 0.0;
  double moment_k = 0.0;  // E[M^k]
  double moment_k_se = 0.0;
  double bound = 0.0;  // (|Phi|^2 + k/2) E[M^k]
  bool equality_ok = false;
  bool bound_ok = false;
  bool pass() const noexcept { return equality_ok && bound_ok; }
};

/// Stationary recursion 2 lambda E[M^{k+1}] = |Phi|^2 E[M^k] + 2k E[M^{k-1} Q],
/// Q = sum_i Re(u, Phi e_i)^2, from time-and-ensemble averages over `window`.
/// Passes when |lhs - rhs| <= 3 SE and lhs <= bound (1 + 3 relSE(E[M^k])).
MomentCheck stationary_moment_check(const EnsembleRecord& rec, const NoiseOperator& phi, double lambda, int k,
                                    Window window);

struct IncrementPoint {
  double delta = 0.0;
  double mean = 0.0;  // E |u_{T+delta} - u_T|^2_{L2}
  double std_error = 0.0;
};

/// Increment curve from snapshot pairs (T, T + delta), averaged over the base
/// times per trajectory. Throws DataError if a snapshot is missing.
std::vector<IncrementPoint> aldous_increment(const EnsembleRecord& rec, std::span<const double> base_times,
                                             std::span<const double> deltas);

/// Stationary linear-flow value sum_k 2 (1 - e^{-lambda delta} cos((kappa_k^2 - potential) delta)) |phi_k|^2 / (2 lambda)
/// for du = (-lambda u - i Delta u - i potential u) dt + Phi dW. At sigma = 0 the nonlinearity is potential = 1.
double aldous_linear_prediction(const NoiseOperator& phi, double lambda, double delta, double potential = 0.0);

/// phi(delta/2) < phi(delta) + 3 SE for consecutive deltas (sorted descending),
/// and phi(delta_min) <= tolerance_at_min.
bool increments_shrink(std::span<const IncrementPoint> curve);

struct TailProfile {
  std::vector<int> cutoffs;
  std::vector<double> sup_mean;  // sup_t E[tail_mass(cutoff, 1)]
  bool nonincreasing = true;
};

TailProfile tightness_tail_profile(const EnsembleRecord& rec, std::span<const int> cutoffs);

/// |v|_{L^{2s+2}}^{2s+2} / (|v|_{H1}^{d s} |v|_{L2}^{s(2-d)+2}); empty for v = 0.
std::optional<double> gn_ratio(const SpectralField& f, double sigma);

}  // namespace snls
