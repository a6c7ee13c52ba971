#pragma once

#include <vector>

#include "snls/noise.hpp"
#include "snls/spectral_field.hpp"

namespace snls {

enum class Scheme { lie, strang };

/// Parameters of the damped focusing NLS with additive noise,
///   du = (-lambda u - i Lap u - i |u|^{2 sigma} u) dt + Phi dW,
/// and of its time discretization.
struct SimConfig {
  Grid grid;
  double lambda = 0.5;
  double sigma = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::strang;
  bool dealias = false;
  double blowup_guard = 1e6;  // on |u|_{H^1}

  /// Throws ConfigError: lambda > 0, sigma >= 0 (d <= 2), dt > 0, guard > 0.
  void validate() const;
};

/// Exact damped dispersive flow: c_k <- exp((-lambda + i kappa_k^2) dt) c_k.
void apply_linear_flow(SpectralField& u, double lambda, double dt);

/// Linear flow over dt plus an exact OU kick drawn from `stream`.
SpectralField linear_stochastic_substep(const SpectralField& u, const SimConfig& cfg,
                                        const NoiseOperator& phi, NoiseStream& stream, double dt);

/// Pointwise phase rotation u(x) <- u(x) exp(-i |u(x)|^{2 sigma} dt), the exact
/// flow of u_t = -i |u|^{2 sigma} u. Preserves |u(x)| at every grid point.
/// The Nyquist row is pinned afterwards; with `dealias` modes with
/// |k|_inf > N/3 are removed as well.
SpectralField nonlinear_substep(const SpectralField& u, double sigma, double dt, bool dealias = false);

/// One full step of length cfg.dt (Lie: N o LS, Strang: N_{dt/2} o LS_dt o N_{dt/2}).
/// Throws BlowUpError if |u|_{H^1} exceeds the guard or turns non-finite.
SpectralField step(const SpectralField& u, const SimConfig& cfg, const NoiseOperator& phi,
                   NoiseStream& stream);

/// Allocation-free stepping with propagators precomputed for cfg.dt.
class Stepper {
 public:
  Stepper(SimConfig cfg, NoiseOperator phi);

  const SimConfig& config() const noexcept { return cfg_; }
  const NoiseOperator& noise() const noexcept { return phi_; }

  void advance(SpectralField& u, NoiseStream& stream);
  /// Same step with a caller-supplied stochastic convolution in place of the
  /// sampled OU kick (pathwise comparisons across step sizes).
  void advance_with_kick(SpectralField& u, const SpectralField& kick);

  void linear(SpectralField& u);
  void nonlinear(SpectralField& u, double dt);
  void check_guard(const SpectralField& u) const;

 private:
  template <class Kick>
  void advance_impl(SpectralField& u, Kick&& add_kick);

  SimConfig cfg_;
  NoiseOperator phi_;
  std::vector<Complex> propagator_;
  std::vector<Complex> workspace_;
  double kick_scale_;
};

}  // namespace snls
