#include "snls/spectral_field.hpp"

#include <cmath>
#include <string>

#include "snls/errors.hpp"

namespace snls {

SpectralField::SpectralField(Grid grid) : grid_(std::move(grid)), coeffs_(grid_.size()) {}

SpectralField::SpectralField(Grid grid, std::vector<Complex> coeffs)
    : grid_(std::move(grid)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.size()) {
    throw ConfigError("coefficient count " + std::to_string(coeffs_.size()) +
                      " does not match grid size " + std::to_string(grid_.size()));
  }
}

void SpectralField::pin_nyquist() noexcept {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (grid_.is_nyquist(i)) coeffs_[i] = 0.0;
  }
}

bool SpectralField::nyquist_is_zero() const noexcept {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (grid_.is_nyquist(i) && coeffs_[i] != Complex{}) return false;
  }
  return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!(grid_ == other.grid_)) throw ConfigError("field grids differ");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex factor) noexcept {
  for (auto& c : coeffs_) c *= factor;
  return *this;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("field grids differ");
  SpectralField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

SpectralField basis_mode(const Grid& grid, Mode k) {
  SpectralField f(grid);
  f.set(k, 1.0);
  return f;
}

void to_physical(const SpectralField& f, std::span<Complex> out) {
  const Grid& g = f.grid();
  if (out.size() != g.size()) throw ConfigError("physical buffer has the wrong size");
  g.backward(f.coeffs(), out);
  const double scale = 1.0 / std::sqrt(g.volume());
  for (auto& v : out) v *= scale;
}

PhysicalField to_physical(const SpectralField& f) {
  PhysicalField out(f.size());
  to_physical(f, out);
  return out;
}

void to_spectral(std::span<const Complex> values, SpectralField& out) {
  const Grid& g = out.grid();
  if (values.size() != g.size()) {
    throw ConfigError("physical array has " + std::to_string(values.size()) +
                      " samples, grid expects " + std::to_string(g.size()));
  }
  g.forward(values, out.coeffs());
  // c_k = h^d L^{-d/2} sum_j u_j exp(-i kappa x_j)
  const double scale = g.cell_volume() / std::sqrt(g.volume());
  out *= scale;
}

SpectralField to_spectral(const Grid& grid, std::span<const Complex> values) {
  SpectralField out(grid);
  to_spectral(values, out);
  return out;
}

std::array<double, 2> grid_point(const Grid& grid, std::size_t flat) {
  const double h = grid.spacing();
  const auto n = static_cast<std::size_t>(grid.points());
  if (grid.dim() == 1) return {h * static_cast<double>(flat), 0.0};
  return {h * static_cast<double>(flat / n), h * static_cast<double>(flat % n)};
}

}  // namespace snls
