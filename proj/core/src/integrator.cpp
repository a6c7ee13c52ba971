#include "snls/integrator.hpp"

#include <cmath>

#include "snls/errors.hpp"
#include "snls/functionals.hpp"

namespace snls {

void SimConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  // sigma < 2/(d-2) only binds for d >= 3, which the grid rejects.
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(blowup_guard > 0.0)) throw ConfigError("blowup_guard must be positive");
}

void apply_linear_flow(SpectralField& u, double lambda, double dt) {
  const auto k2 = u.grid().kappa_sq();
  const double decay = std::exp(-lambda * dt);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::polar(decay, k2[i] * dt);
}

SpectralField linear_stochastic_substep(const SpectralField& u, const SimConfig& cfg,
                                        const NoiseOperator& phi, NoiseStream& stream, double dt) {
  SpectralField out = u;
  apply_linear_flow(out, cfg.lambda, dt);
  add_ou_kick(stream, phi, cfg.lambda, dt, out);
  return out;
}

namespace {

void truncate_two_thirds(SpectralField& u) {
  const auto linf = u.grid().linf();
  const int keep = u.grid().points() / 3;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (linf[i] > keep) u[i] = 0.0;
  }
}

void rotate_in_place(SpectralField& u, double sigma, double dt, bool dealias, std::vector<Complex>& buf) {
  if (sigma == 0.0) {
    // |u|^0 = 1: a global phase, applied spectrally so zero modes stay exactly zero.
    u *= std::polar(1.0, -dt);
  } else {
    buf.resize(u.size());
    to_physical(u, buf);
    for (Complex& v : buf) {
      v *= std::polar(1.0, -functionals::pow_abs_sq(std::norm(v), sigma) * dt);
    }
    to_spectral(buf, u);
  }
  u.pin_nyquist();
  if (dealias) truncate_two_thirds(u);
}

}  // namespace

SpectralField nonlinear_substep(const SpectralField& u, double sigma, double dt, bool dealias) {
  SpectralField out = u;
  std::vector<Complex> buf;
  rotate_in_place(out, sigma, dt, dealias, buf);
  return out;
}

SpectralField step(const SpectralField& u, const SimConfig& cfg, const NoiseOperator& phi,
                   NoiseStream& stream) {
  Stepper stepper(cfg, phi);
  SpectralField out = u;
  stepper.advance(out, stream);
  return out;
}

Stepper::Stepper(SimConfig cfg, NoiseOperator phi) : cfg_(std::move(cfg)), phi_(std::move(phi)) {
  cfg_.validate();
  if (!(phi_.grid() == cfg_.grid)) throw ConfigError("noise operator and config use different grids");
  const auto k2 = cfg_.grid.kappa_sq();
  propagator_.resize(k2.size());
  const double decay = std::exp(-cfg_.lambda * cfg_.dt);
  for (std::size_t i = 0; i < k2.size(); ++i) propagator_[i] = std::polar(decay, k2[i] * cfg_.dt);
  kick_scale_ = std::sqrt(0.5 * ou_kick_variance_factor(cfg_.lambda, cfg_.dt));
  workspace_.resize(cfg_.grid.size());
}

void Stepper::check_guard(const SpectralField& u) const {
  const double h1 = std::sqrt(functionals::sobolev_norm_sq(u, 1.0));
  if (!std::isfinite(h1) || h1 > cfg_.blowup_guard) throw BlowUpError(h1);
}

void Stepper::linear(SpectralField& u) {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= propagator_[i];
}

void Stepper::nonlinear(SpectralField& u, double dt) {
  rotate_in_place(u, cfg_.sigma, dt, cfg_.dealias, workspace_);
}

template <class Kick>
void Stepper::advance_impl(SpectralField& u, Kick&& add_kick) {
  check_guard(u);
  // The whole OU kick rides on the linear substep, between the halves.
  if (cfg_.scheme == Scheme::strang) {
    nonlinear(u, 0.5 * cfg_.dt);
    linear(u);
    add_kick(u);
    nonlinear(u, 0.5 * cfg_.dt);
  } else {
    linear(u);
    add_kick(u);
    nonlinear(u, cfg_.dt);
  }
  check_guard(u);
}

void Stepper::advance(SpectralField& u, NoiseStream& stream) {
  advance_impl(u, [&](SpectralField& v) {
    const auto a = phi_.amplitudes();
    for (std::size_t i : phi_.active_modes()) {
      const auto [x1, x2] = stream.normal_pair(static_cast<std::uint32_t>(i));
      v[i] += a[i] * Complex(x1, x2) * kick_scale_;
    }
    stream.advance();
  });
}

void Stepper::advance_with_kick(SpectralField& u, const SpectralField& kick) {
  advance_impl(u, [&](SpectralField& v) { v += kick; });
}

}  // namespace snls
