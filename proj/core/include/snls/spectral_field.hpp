#pragma once

#include <span>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

/// Physical-space samples u(x_j) on the grid, same flat layout as Grid.
using PhysicalField = std::vector<Complex>;

/// Fourier coefficients of u(x) = sum_k c_k e_k(x), with the L^2-orthonormal
/// basis e_k(x) = L^{-d/2} exp(i kappa_k . x).
///
/// Simulation states keep the Nyquist row at zero (see pin_nyquist); a field
/// produced by to_spectral keeps whatever the samples contain so the
/// transform stays lossless.
class SpectralField {
 public:
  explicit SpectralField(Grid grid);
  SpectralField(Grid grid, std::vector<Complex> coeffs);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  Complex& operator[](std::size_t flat) noexcept { return coeffs_[flat]; }
  const Complex& operator[](std::size_t flat) const noexcept { return coeffs_[flat]; }

  Complex at(Mode k) const { return coeffs_[grid_.flat_index(k)]; }
  void set(Mode k, Complex value) { coeffs_[grid_.flat_index(k)] = value; }

  void pin_nyquist() noexcept;
  bool nyquist_is_zero() const noexcept;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator*=(Complex factor) noexcept;

  friend bool operator==(const SpectralField& a, const SpectralField& b) noexcept {
    return a.grid_ == b.grid_ && a.coeffs_ == b.coeffs_;
  }

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

SpectralField operator-(const SpectralField& a, const SpectralField& b);

/// The single orthonormal mode e_k.
SpectralField basis_mode(const Grid& grid, Mode k);

PhysicalField to_physical(const SpectralField& f);
/// Writes into a caller-provided buffer of grid.size() samples.
void to_physical(const SpectralField& f, std::span<Complex> out);

/// Throws ConfigError if values.size() != grid.size().
SpectralField to_spectral(const Grid& grid, std::span<const Complex> values);
void to_spectral(std::span<const Complex> values, SpectralField& out);

/// Physical coordinates of flat sample index j: (x1, x2), x2 = 0 when d = 1.
std::array<double, 2> grid_point(const Grid& grid, std::size_t flat);

}  // namespace snls
