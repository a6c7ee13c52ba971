#include "snls/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "snls/errors.hpp"

namespace snls {

namespace {

// The FFTW planner is not re-entrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

fftw_complex* as_fftw(const Complex* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

namespace detail {

struct GridData {
  int dim = 1;
  double length = 0.0;
  int points = 0;
  std::size_t size = 0;
  std::vector<double> kappa_sq;
  std::vector<int> linf;
  std::vector<unsigned char> nyquist;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  GridData(int d, double l, int n) : dim(d), length(l), points(n) {
    size = static_cast<std::size_t>(n) * (d == 2 ? static_cast<std::size_t>(n) : 1U);
    kappa_sq.resize(size);
    linf.resize(size);
    nyquist.resize(size);
    const double base = 2.0 * std::numbers::pi / l;
    for (std::size_t flat = 0; flat < size; ++flat) {
      const int i1 = d == 2 ? static_cast<int>(flat / n) : static_cast<int>(flat);
      const int i2 = d == 2 ? static_cast<int>(flat % n) : 0;
      const int k1 = i1 < n / 2 ? i1 : i1 - n;
      const int k2 = d == 2 ? (i2 < n / 2 ? i2 : i2 - n) : 0;
      kappa_sq[flat] = base * base * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
      linf[flat] = std::max(std::abs(k1), std::abs(k2));
      nyquist[flat] = (k1 == -n / 2 || (d == 2 && k2 == -n / 2)) ? 1 : 0;
    }

    std::vector<Complex> a(size), b(size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    if (d == 1) {
      forward = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
      backward = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
    } else {
      forward = fftw_plan_dft_2d(n, n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
      backward = fftw_plan_dft_2d(n, n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
    }
  }

  GridData(const GridData&) = delete;
  GridData& operator=(const GridData&) = delete;

  ~GridData() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

}  // namespace detail

Grid::Grid(int dim, double length, int points) {
  if (dim != 1 && dim != 2) {
    throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ConfigError("torus length must be positive and finite");
  }
  if (!is_power_of_two(points) || points < 8) {
    throw ConfigError("points per dimension must be a power of two >= 8, got " +
                      std::to_string(points));
  }
  data_ = std::make_shared<const detail::GridData>(dim, length, points);
}

int Grid::dim() const noexcept { return data_->dim; }
double Grid::length() const noexcept { return data_->length; }
int Grid::points() const noexcept { return data_->points; }
std::size_t Grid::size() const noexcept { return data_->size; }

double Grid::cell_volume() const noexcept {
  const double h = spacing();
  return dim() == 2 ? h * h : h;
}

double Grid::volume() const noexcept {
  const double l = length();
  return dim() == 2 ? l * l : l;
}

Mode Grid::mode(std::size_t flat) const noexcept {
  const int n = points();
  if (dim() == 1) return {wavenumber_of(static_cast<int>(flat)), 0};
  return {wavenumber_of(static_cast<int>(flat / n)), wavenumber_of(static_cast<int>(flat % n))};
}

std::size_t Grid::flat_index(Mode k) const {
  const int n = points();
  auto axis = [n](int kk) {
    if (kk < -n / 2 || kk >= n / 2) {
      throw ConfigError("wavenumber " + std::to_string(kk) + " outside [-N/2, N/2)");
    }
    return static_cast<std::size_t>(kk >= 0 ? kk : kk + n);
  };
  if (dim() == 1) {
    if (k[1] != 0) throw ConfigError("second wavenumber must be 0 on a 1-d grid");
    return axis(k[0]);
  }
  return axis(k[0]) * static_cast<std::size_t>(n) + axis(k[1]);
}

std::span<const double> Grid::kappa_sq() const noexcept { return data_->kappa_sq; }
std::span<const int> Grid::linf() const noexcept { return data_->linf; }
bool Grid::is_nyquist(std::size_t flat) const noexcept { return data_->nyquist[flat] != 0; }

void Grid::forward(std::span<const Complex> in, std::span<Complex> out) const {
  fftw_execute_dft(data_->forward, as_fftw(in.data()), as_fftw(out.data()));
}

void Grid::backward(std::span<const Complex> in, std::span<Complex> out) const {
  fftw_execute_dft(data_->backward, as_fftw(in.data()), as_fftw(out.data()));
}

bool operator==(const Grid& a, const Grid& b) noexcept {
  if (a.data_ == b.data_) return true;
  return a.dim() == b.dim() && a.points() == b.points() && a.length() == b.length();
}

}  // namespace snls
