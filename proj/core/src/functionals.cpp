#include "snls/functionals.hpp"

#include <cmath>

#include "snls/errors.hpp"

namespace snls::functionals {

double pow_abs_sq(double abs_sq, double e) noexcept {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return abs_sq;
  if (e == 2.0) return abs_sq * abs_sq;
  if (e == 3.0) return abs_sq * abs_sq * abs_sq;
  if (e == 0.5) return std::sqrt(abs_sq);
  return std::pow(abs_sq, e);
}

double mass(const SpectralField& f) {
  double sum = 0.0;
  for (const Complex& c : f.coeffs()) sum += std::norm(c);
  return sum;
}

double kinetic(const SpectralField& f) {
  const auto k2 = f.grid().kappa_sq();
  const auto c = f.coeffs();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) sum += k2[i] * std::norm(c[i]);
  return 0.5 * sum;
}

double sobolev_norm_sq(const SpectralField& f, double r) {
  if (r == 0.0) return mass(f);
  const auto k2 = f.grid().kappa_sq();
  const auto c = f.coeffs();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = r == 1.0 ? 1.0 + k2[i] : std::pow(1.0 + k2[i], r);
    sum += w * std::norm(c[i]);
  }
  return sum;
}

double power_integral(const Grid& grid, std::span<const Complex> physical, double p) {
  if (physical.size() != grid.size()) throw ConfigError("physical array does not match grid");
  const double e = 0.5 * p;
  double sum = 0.0;
  for (const Complex& u : physical) sum += pow_abs_sq(std::norm(u), e);
  return grid.cell_volume() * sum;
}

double power_integral(const SpectralField& f, double p) {
  const PhysicalField u = to_physical(f);
  return power_integral(f.grid(), u, p);
}

double f1(const Grid& grid, std::span<const Complex> physical, double sigma) {
  return power_integral(grid, physical, 2.0 * sigma + 2.0) / (2.0 * sigma + 2.0);
}

double f1(const SpectralField& f, double sigma) {
  const PhysicalField u = to_physical(f);
  return f1(f.grid(), u, sigma);
}

double energy(const SpectralField& f, std::span<const Complex> physical, double sigma) {
  return kinetic(f) - f1(f.grid(), physical, sigma);
}

double energy(const SpectralField& f, double sigma) {
  const PhysicalField u = to_physical(f);
  return energy(f, u, sigma);
}

double tail_mass(const SpectralField& f, int cutoff, double r) {
  const auto linf = f.grid().linf();
  const auto k2 = f.grid().kappa_sq();
  const auto c = f.coeffs();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (linf[i] <= cutoff) continue;
    const double w = r == 1.0 ? 1.0 + k2[i] : std::pow(1.0 + k2[i], r);
    sum += w * std::norm(c[i]);
  }
  return sum;
}

}  // namespace snls::functionals
