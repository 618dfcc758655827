#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/error.hpp"

namespace xwct {

/// Unit-mass Gaussian g_sigma(t) = exp(-t^2 / (2 sigma^2)) / (sigma sqrt(2 pi)).
class GaussianWindow {
 public:
  explicit GaussianWindow(double sigma) : sigma_(sigma) {
    require(sigma > 0.0 && std::isfinite(sigma), "window width sigma must be positive");
  }
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

inline double gaussian(const GaussianWindow& w, double t) {
  const double s = w.sigma();
  return std::exp(-0.5 * t * t / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
}

/// Closed-form polynomial Fourier transforms of t^j g_sigma(t), j = 0..4,
/// at fixed chirprate: integral t^j g(t) exp(-i2pi eta t - i pi lam t^2) dt.
///
/// All five share exp(-2 pi^2 sigma^2 eta^2 / z) with z = 1 + i 2 pi sigma^2 lam
/// and half-integer powers of z; those are computed once per chirprate.
/// sqrt(z) is the principal root, which has positive real part because Re z = 1.
class PftKernel {
 public:
  PftKernel(double sigma, double lam) : sigma_(sigma) {
    constexpr double pi = std::numbers::pi;
    const Complex z{1.0, 2.0 * pi * sigma * sigma * lam};
    inv_z_ = 1.0 / z;
    const Complex inv_root = 1.0 / std::sqrt(z);
    rpow_[0] = inv_root;  // z^{-1/2}
    for (std::size_t k = 1; k < rpow_.size(); ++k) rpow_[k] = rpow_[k - 1] * inv_z_;
    // rpow_[k] = z^{-(2k+1)/2}
    gauss_coeff_ = -2.0 * pi * pi * sigma * sigma;
    decay_ = gauss_coeff_ * inv_z_.real();
  }

  /// Moment 0 only (the plain PFT).
  Complex moment0(double eta) const {
    if (negligible(eta)) return {};
    return std::exp(exponent(eta)) * rpow_[0];
  }

  /// All five moments j = 0..4 at frequency offset eta.
  std::array<Complex, 5> moments(double eta) const {
    if (negligible(eta)) return {};
    return moments_from(std::exp(exponent(eta)), eta);
  }

  /// True when every moment at eta is below e^-50 of its peak.
  bool negligible(double eta) const { return decay_ * eta * eta < kUnderflow; }

  /// The shared Gaussian exponent -2 pi^2 sigma^2 eta^2 / z, and its coefficient.
  Complex exponent(double eta) const { return exp_coeff() * (eta * eta); }
  Complex exp_coeff() const { return gauss_coeff_ * inv_z_; }

  Complex moment0_from(Complex e) const { return e * rpow_[0]; }

  /// Moments given e = exp(exponent(eta)).
  std::array<Complex, 5> moments_from(Complex e, double eta) const {
    constexpr double pi = std::numbers::pi;
    std::array<Complex, 5> out;
    const double s2 = sigma_ * sigma_;
    const double u = 2.0 * pi * sigma_ * eta;
    const double u2 = u * u;
    const Complex i2pi_eta{0.0, -2.0 * pi * eta};  // -i 2 pi eta
    out[0] = e * rpow_[0];
    out[1] = e * i2pi_eta * s2 * rpow_[1];
    out[2] = e * s2 * (rpow_[1] - u2 * rpow_[2]);
    out[3] = e * i2pi_eta * (s2 * s2) * (3.0 * rpow_[2] - u2 * rpow_[3]);
    out[4] = e * (s2 * s2) * (3.0 * rpow_[2] - 6.0 * u2 * rpow_[3] + u2 * u2 * rpow_[4]);
    return out;
  }

 private:
  // Below e^-50 every moment is under 1e-15 of its peak for sigma <= 10; treat as zero.
  static constexpr double kUnderflow = -50.0;
  double sigma_;
  double gauss_coeff_;
  double decay_;
  Complex inv_z_;
  std::array<Complex, 5> rpow_{};
};

inline Complex pft_moment(int j, const GaussianWindow& w, double eta, double lam) {
  require(j >= 0 && j <= 4, "closed-form moment order must be in 0..4");
  return PftKernel(w.sigma(), lam).moments(eta)[static_cast<std::size_t>(j)];
}

/// Trapezoid quadrature of t^j g(t) exp(-i2pi eta t - i pi lam t^2) for j = 0..max_j
/// over [-20 sigma, 20 sigma].
///
/// The node spacing h is chosen from the Poisson summation view of the
/// trapezoid rule: its error terms are the same transform at eta + n/h, which
/// are below e^-40 once 2 pi^2 sigma^2 (1/h - |eta|)^2 / (1 + (2 pi sigma^2 lam)^2) > 40.
inline std::vector<Complex> pft_quadrature_moments(int max_j, const GaussianWindow& w, double eta,
                                                   double lam) {
  require(max_j >= 0, "moment order must be nonnegative");
  constexpr double pi = std::numbers::pi;
  const double s = w.sigma();
  const double kappa = 2.0 * pi * s * s * lam;
  const double bandwidth = std::sqrt(40.0 * (1.0 + kappa * kappa)) / (std::sqrt(2.0) * pi * s);
  // Extra margin for the polynomial factor t^j, which widens the effective spectrum.
  const double inv_h = 1.25 * (std::abs(eta) + bandwidth) + 2.0 / s;
  const double half = 20.0 * s;
  const std::size_t intervals =
      std::max<std::size_t>(4000, static_cast<std::size_t>(std::ceil(2.0 * half * inv_h)));
  const double h = 2.0 * half / static_cast<double>(intervals);

  std::vector<Complex> acc(static_cast<std::size_t>(max_j) + 1);
  for (std::size_t n = 0; n <= intervals; ++n) {
    const double t = -half + h * static_cast<double>(n);
    const double weight = (n == 0 || n == intervals) ? 0.5 : 1.0;
    const double g = gaussian(w, t);
    if (g == 0.0) continue;
    const double cycles = -(eta * t + 0.5 * lam * t * t);
    const double arg = 2.0 * pi * (cycles - std::round(cycles));
    Complex term = weight * g * Complex{std::cos(arg), std::sin(arg)};
    for (auto& a : acc) {
      a += term;
      term *= t;
    }
  }
  for (auto& a : acc) a *= h;
  return acc;
}

inline Complex pft_quadrature(int j, const GaussianWindow& w, double eta, double lam) {
  return pft_quadrature_moments(j, w, eta, lam).back();
}

}  // namespace xwct
