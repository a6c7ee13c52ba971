#include "snls/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "snls/errors.hpp"
#include "snls/philox.hpp"

namespace snls {

NoiseOperator::NoiseOperator(Grid grid, std::vector<Complex> amplitudes)
    : grid_(std::move(grid)), phi_(std::move(amplitudes)) {
  if (phi_.size() != grid_.size()) {
    throw ConfigError("noise amplitude count does not match grid size");
  }
  const auto linf = grid_.linf();
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    if (!std::isfinite(phi_[i].real()) || !std::isfinite(phi_[i].imag())) {
      throw ConfigError("noise amplitudes must be finite");
    }
    if (phi_[i] == Complex{}) continue;
    if (grid_.is_nyquist(i)) throw ConfigError("noise amplitude on a Nyquist mode must be zero");
    active_.push_back(i);
    band_limit_ = std::max(band_limit_, linf[i]);
  }
}

NoiseOperator NoiseOperator::zero(const Grid& grid) {
  return NoiseOperator(grid, std::vector<Complex>(grid.size()));
}

NoiseOperator NoiseOperator::band(const Grid& grid, double amplitude, int k_max, double decay_power) {
  if (k_max < 0 || k_max >= grid.points() / 2) {
    throw ConfigError("band K_max must lie in [0, N/2), got " + std::to_string(k_max));
  }
  if (!std::isfinite(amplitude) || !std::isfinite(decay_power)) {
    throw ConfigError("band parameters must be finite");
  }
  std::vector<Complex> phi(grid.size());
  const auto linf = grid.linf();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (linf[i] > k_max) continue;
    const Mode k = grid.mode(i);
    const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
    phi[i] = amplitude * std::pow(1.0 + k2, -0.5 * decay_power);
  }
  return NoiseOperator(grid, std::move(phi));
}

NoiseOperator NoiseOperator::from_modes(const Grid& grid, std::span<const ModeAmplitude> modes) {
  std::vector<Complex> phi(grid.size());
  for (const auto& m : modes) phi[grid.flat_index(m.k)] = m.value;
  return NoiseOperator(grid, std::move(phi));
}

double hs_norm_sq(const NoiseOperator& phi, HsWeight weight) {
  if (weight == HsWeight::h1) return hs_norm_sq(phi, HsWeight::identity) + hs_norm_sq(phi, HsWeight::gradient);
  const auto k2 = phi.grid().kappa_sq();
  const auto a = phi.amplitudes();
  double sum = 0.0;
  for (std::size_t i : phi.active_modes()) {
    const double p = std::norm(a[i]);
    switch (weight) {
      case HsWeight::identity: sum += p; break;
      case HsWeight::gradient: sum += k2[i] * p; break;
      case HsWeight::h1: break;
    }
  }
  return sum;
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_index)
    : seed_(master_seed), trajectory_(trajectory_index) {
  if (trajectory_index > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("trajectory index exceeds 32 bits");
  }
}

std::pair<double, double> NoiseStream::normal_pair(std::uint32_t slot, StreamDomain domain) const noexcept {
  const std::uint64_t k =
      splitmix64(seed_ ^ splitmix64(0xA5A5A5A5ULL + static_cast<std::uint64_t>(domain)));
  const Philox4x32::Key key{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  const Philox4x32::Counter ctr{slot, static_cast<std::uint32_t>(counter_),
                                static_cast<std::uint32_t>(counter_ >> 32),
                                static_cast<std::uint32_t>(trajectory_)};
  const auto w = Philox4x32::generate(ctr, key);

  constexpr double kTwoPow53 = 9007199254740992.0;
  auto uniform = [](std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) / kTwoPow53;  // open interval (0, 1)
  };
  const double u1 = uniform(w[0], w[1]);
  const double u2 = uniform(w[2], w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(angle), r * std::sin(angle)};
}

namespace {

void add_scaled_draw(NoiseStream& stream, const NoiseOperator& phi, double scale, SpectralField& target) {
  const auto a = phi.amplitudes();
  for (std::size_t i : phi.active_modes()) {
    const auto [x1, x2] = stream.normal_pair(static_cast<std::uint32_t>(i));
    target[i] += a[i] * Complex(x1, x2) * scale;
  }
  stream.advance();
}

}  // namespace

double ou_kick_variance_factor(double lambda, double dt) noexcept {
  return -std::expm1(-2.0 * lambda * dt) / (2.0 * lambda);
}

SpectralField sample_increment(NoiseStream& stream, const NoiseOperator& phi, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  SpectralField out(phi.grid());
  add_scaled_draw(stream, phi, std::sqrt(0.5 * dt), out);
  return out;
}

void add_ou_kick(NoiseStream& stream, const NoiseOperator& phi, double lambda, double dt,
                 SpectralField& target) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  add_scaled_draw(stream, phi, std::sqrt(0.5 * ou_kick_variance_factor(lambda, dt)), target);
}

SpectralField sample_ou_kick(NoiseStream& stream, const NoiseOperator& phi, double lambda, double dt) {
  SpectralField out(phi.grid());
  add_ou_kick(stream, phi, lambda, dt, out);
  return out;
}

}  // namespace snls
