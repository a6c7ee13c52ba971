#pragma once

#include <span>

#include "snls/spectral_field.hpp"

// Scalar functionals of a field. Gradient and Sobolev quantities are exact
// spectral sums; |u|^p integrals are grid collocation (h^d sum_j |u_j|^p),
// without dealiasing.
namespace snls::functionals {

/// M(u) = |u|_{L^2}^2 = sum_k |c_k|^2.
double mass(const SpectralField& f);

/// 1/2 sum_k kappa_k^2 |c_k|^2 = 1/2 |grad u|_{L^2}^2.
double kinetic(const SpectralField& f);

/// sum_k (1 + kappa_k^2)^r |c_k|^2.
double sobolev_norm_sq(const SpectralField& f, double r);

/// Grid quadrature of |u|^p from physical samples. p = 0 integrates 1
/// (including at zeros of u).
double power_integral(const Grid& grid, std::span<const Complex> physical, double p);
double power_integral(const SpectralField& f, double p);

/// F_1(u) = (2 sigma + 2)^{-1} int |u|^{2 sigma + 2}.
double f1(const SpectralField& f, double sigma);
double f1(const Grid& grid, std::span<const Complex> physical, double sigma);

/// H(u) = 1/2 |grad u|^2 - F_1(u)  (focusing sign).
double energy(const SpectralField& f, double sigma);
double energy(const SpectralField& f, std::span<const Complex> physical, double sigma);

/// sum over |k|_inf > cutoff of (1 + kappa_k^2)^r |c_k|^2.
double tail_mass(const SpectralField& f, int cutoff, double r = 1.0);

/// (|u|^2)^e with exact fast paths for small integer e; pow_abs_sq(0, 0) = 1.
double pow_abs_sq(double abs_sq, double e) noexcept;

}  // namespace snls::functionals
