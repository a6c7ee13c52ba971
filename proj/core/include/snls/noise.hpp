#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "snls/spectral_field.hpp"

namespace snls {

enum class HsWeight { identity, gradient, h1 };

/// One explicit amplitude phi_k for wavenumber k.
struct ModeAmplitude {
  Mode k{0, 0};
  Complex value;
};

/// Additive noise operator Phi, diagonal in the Fourier basis:
/// Phi e_k = phi_k e_k. Band-limited and with zero Nyquist amplitudes, so
/// every Hilbert-Schmidt sum is a finite exact sum.
class NoiseOperator {
 public:
  NoiseOperator(Grid grid, std::vector<Complex> amplitudes);

  static NoiseOperator zero(const Grid& grid);
  /// phi_k = amplitude * (1 + |k|^2)^{-decay_power / 2} for |k|_inf <= k_max,
  /// zero beyond. |k|^2 is the integer lattice norm k1^2 + k2^2.
  static NoiseOperator band(const Grid& grid, double amplitude, int k_max, double decay_power);
  static NoiseOperator from_modes(const Grid& grid, std::span<const ModeAmplitude> modes);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const Complex> amplitudes() const noexcept { return phi_; }
  /// Flat indices with phi_k != 0, ascending.
  std::span<const std::size_t> active_modes() const noexcept { return active_; }
  /// Largest |k|_inf carrying a nonzero amplitude (-1 for Phi = 0).
  int band_limit() const noexcept { return band_limit_; }

 private:
  Grid grid_;
  std::vector<Complex> phi_;
  std::vector<std::size_t> active_;
  int band_limit_ = -1;
};

/// identity: sum |phi_k|^2 = |Phi|^2_{HS(L2,L2)}; gradient: sum kappa^2 |phi_k|^2
/// = |grad Phi|^2_{HS(L2,L2)}; h1: sum (1 + kappa^2)|phi_k|^2 = |Phi|^2_{HS(L2,H1)}.
double hs_norm_sq(const NoiseOperator& phi, HsWeight weight);

/// Independent draw families keyed off the same master seed.
enum class StreamDomain : std::uint32_t { increments = 0, initial_state = 1 };

/// Reproducible Gaussian source for one trajectory.
///
/// Every draw is Philox4x32-10 evaluated at counter (slot, step_lo, step_hi,
/// trajectory_index) under a key derived from (master_seed, domain), so the
/// sampled sequence depends only on (master_seed, trajectory_index) and not on
/// which worker runs the trajectory. Distinct trajectories differ in a
/// counter word and hence never share draws.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_index);

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t trajectory_index() const noexcept { return trajectory_; }
  std::uint64_t counter() const noexcept { return counter_; }
  void seek(std::uint64_t counter) noexcept { counter_ = counter; }
  void advance() noexcept { ++counter_; }

  /// Two independent standard normals for `slot` at the current counter
  /// (Box-Muller on two 53-bit uniforms). Does not advance.
  std::pair<double, double> normal_pair(std::uint32_t slot,
                                        StreamDomain domain = StreamDomain::increments) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t trajectory_;
  std::uint64_t counter_ = 0;
};

/// Delta W over a step dt: c_k = phi_k (xi1 + i xi2) / sqrt(2) * sqrt(dt).
/// Advances the stream by one draw.
SpectralField sample_increment(NoiseStream& stream, const NoiseOperator& phi, double dt);

/// Exact stochastic convolution of the damped dispersive flow over dt:
/// circular Gaussian per mode with variance |phi_k|^2 (1 - e^{-2 lambda dt}) / (2 lambda).
/// Advances the stream by one draw.
SpectralField sample_ou_kick(NoiseStream& stream, const NoiseOperator& phi, double lambda, double dt);

/// Same as sample_ou_kick, accumulated into `target` (no allocation).
void add_ou_kick(NoiseStream& stream, const NoiseOperator& phi, double lambda, double dt,
                 SpectralField& target);

/// Variance factor (1 - e^{-2 lambda dt}) / (2 lambda) of the kick.
double ou_kick_variance_factor(double lambda, double dt) noexcept;

}  // namespace snls
