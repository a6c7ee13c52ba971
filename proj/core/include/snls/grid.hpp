#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace snls {

using Complex = std::complex<double>;

/// Integer wavenumber (k1, k2); k2 is 0 when d = 1.
using Mode = std::array<int, 2>;

namespace detail {
struct GridData;
}

/// Periodic torus [0, L)^d sampled with N points per axis, d in {1, 2}.
///
/// Coefficients and physical samples are stored row-major in FFT order: along
/// each axis index i carries wavenumber i for i < N/2 and i - N otherwise, so
/// the mode set is {-N/2, ..., N/2 - 1}^d. Angular wavenumbers are
/// kappa = 2 pi k / L.
///
/// Grid is a cheap immutable handle: copies share the precomputed mode
/// tables and FFT plans.
class Grid {
 public:
  Grid(int dim, double length, int points);

  int dim() const noexcept;
  double length() const noexcept;
  int points() const noexcept;
  std::size_t size() const noexcept;

  double spacing() const noexcept { return length() / points(); }
  double cell_volume() const noexcept;
  double volume() const noexcept;

  int wavenumber_of(int axis_index) const noexcept {
    return axis_index < points() / 2 ? axis_index : axis_index - points();
  }

  Mode mode(std::size_t flat) const noexcept;
  /// Flat index of wavenumber k; throws ConfigError when k is off the lattice.
  std::size_t flat_index(Mode k) const;

  /// |kappa_k|^2 per flat index.
  std::span<const double> kappa_sq() const noexcept;
  /// max(|k1|, |k2|) per flat index.
  std::span<const int> linf() const noexcept;
  bool is_nyquist(std::size_t flat) const noexcept;

  /// Unnormalized DFTs: forward uses exp(-i kappa x), backward exp(+i kappa x).
  /// `in` and `out` must not alias.
  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  void backward(std::span<const Complex> in, std::span<Complex> out) const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept;

 private:
  std::shared_ptr<const detail::GridData> data_;
};

}  // namespace snls
