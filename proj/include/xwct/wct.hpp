#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/error.hpp"
#include "xwct/fft.hpp"
#include "xwct/grid.hpp"
#include "xwct/signal.hpp"
#include "xwct/window.hpp"

namespace xwct {

inline constexpr int kMomentCount = 5;

/// U^{b^j g}(a_s, b_m, lambda_l) for j = 0..4 over a band-limited grid.
struct MomentCubeStack {
  std::array<Cube3<Complex>, kMomentCount> cubes;
  AnalysisGrid grid;
  double sigma = 0.0;

  const Cube3<Complex>& operator[](std::size_t j) const { return cubes[j]; }
};

/// Produces time rows of the moment transforms one (scale, chirprate) pair at a time.
///
/// Row j equals IFFT(FFT(x) * G_j) with G_j[k] = PFT_j(mu - a eta_k, a^2 lambda).
/// The signal spectrum is computed once; each call costs `count` inverse FFTs.
class MomentRowEngine {
 public:
  MomentRowEngine(const SampledSignal& x, double sigma, const AnalysisGrid& grid)
      : grid_(grid), window_(sigma), fft_(grid.n), spectrum_(grid.n) {
    require(x.size() == grid.n, "signal length " + std::to_string(x.size()) +
                                     " does not match grid length " + std::to_string(grid.n));
    require(std::abs(x.dt - grid.dt) <= 1e-12 * grid.dt, "signal step does not match grid step");
    fft_.forward(x.samples, spectrum_);
    for (auto& s : staged_) s.resize(grid.n);
  }

  const AnalysisGrid& grid() const { return grid_; }
  double sigma() const { return window_.sigma(); }
  std::span<const Complex> spectrum() const { return spectrum_; }

  /// Fill rows[0..count-1] with moments j = 0..count-1 at band scale s and chirprate l.
  void compute(std::size_t s, std::size_t l, int count, std::span<const std::span<Complex>> rows) {
    require(count >= 1 && count <= kMomentCount, "moment count must be in 1..5");
    const double a = grid_.scales[s];
    const PftKernel kernel(window_.sigma(), a * a * grid_.chirprates[l]);
    const auto used = static_cast<std::size_t>(count);
    for (std::size_t j = 0; j < used; ++j) std::fill(staged_[j].begin(), staged_[j].end(), Complex{});

    // Signed bin kappa has eta = kappa * deta, kappa in [N/2 - N + 1, N/2].
    // The kernel argument mu - a eta is affine in kappa, so the Gaussian factor
    // exp(c nu^2) obeys a two-term multiplicative recurrence. Walk outward
    // from the bin nearest the peak until the kernel is negligible.
    const auto n = static_cast<long long>(grid_.n);
    const long long k_hi = n / 2;
    const long long k_lo = k_hi - n + 1;
    const double deta = grid_.delta_eta();
    const double step = a * deta;
    const double peak = grid_.mu / step;
    const long long start = std::clamp(static_cast<long long>(std::llround(std::clamp(
                                           peak, static_cast<double>(k_lo), static_cast<double>(k_hi)))),
                                       k_lo, k_hi);
    const Complex c = kernel.exp_coeff();
    const Complex growth = std::exp(2.0 * c * step * step);
    for (int dir : {+1, -1}) {
      long long kappa = dir > 0 ? start : start - 1;
      Complex e, ratio;
      for (int since_anchor = 0; kappa >= k_lo && kappa <= k_hi; kappa += dir, ++since_anchor) {
        const double nu = grid_.mu - static_cast<double>(kappa) * step;
        if (kernel.negligible(nu)) break;
        if (since_anchor % 32 == 0) {
          e = std::exp(kernel.exponent(nu));
          ratio = std::exp(c * (-2.0 * dir * nu * step + step * step));
        }
        const auto k = static_cast<std::size_t>(kappa < 0 ? kappa + n : kappa);
        const Complex xk = spectrum_[k];
        if (count == 1) {
          staged_[0][k] = xk * kernel.moment0_from(e);
        } else {
          const auto g = kernel.moments_from(e, nu);
          for (std::size_t j = 0; j < used; ++j) staged_[j][k] = xk * g[j];
        }
        e *= ratio;
        ratio *= growth;
      }
    }
    for (std::size_t j = 0; j < used; ++j) fft_.inverse(staged_[j], rows[j]);
  }

 private:
  AnalysisGrid grid_;
  GaussianWindow window_;
  Fft fft_;
  std::vector<Complex> spectrum_;
  std::array<std::vector<Complex>, kMomentCount> staged_;
};

/// Materialize all five moment cubes. Memory is 5 * 16 * S * N * L bytes.
inline MomentCubeStack compute_moment_cubes(const SampledSignal& x, double sigma,
                                            const AnalysisGrid& grid) {
  MomentRowEngine engine(x, sigma, grid);
  MomentCubeStack stack;
  stack.grid = grid;
  stack.sigma = sigma;
  for (auto& c : stack.cubes) c = Cube3<Complex>(grid.n_scales(), grid.n, grid.n_rates());
  std::array<std::span<Complex>, kMomentCount> rows;
  for (std::size_t s = 0; s < grid.n_scales(); ++s) {
    for (std::size_t l = 0; l < grid.n_rates(); ++l) {
      for (std::size_t j = 0; j < rows.size(); ++j) rows[j] = stack.cubes[j].row(s, l);
      engine.compute(s, l, kMomentCount, rows);
    }
  }
  return stack;
}

/// Only the plain transform U^g (moment 0).
inline Cube3<Complex> compute_wct(const SampledSignal& x, double sigma, const AnalysisGrid& grid) {
  MomentRowEngine engine(x, sigma, grid);
  Cube3<Complex> cube(grid.n_scales(), grid.n, grid.n_rates());
  std::array<std::span<Complex>, 1> rows;
  for (std::size_t s = 0; s < grid.n_scales(); ++s) {
    for (std::size_t l = 0; l < grid.n_rates(); ++l) {
      rows[0] = cube.row(s, l);
      engine.compute(s, l, 1, rows);
    }
  }
  return cube;
}

/// Direct evaluation of the transform integral, independent of FFTW.
///
/// x is replaced by its trigonometric interpolant on [0, N dt) and by zero
/// outside the record. The interpolant comes from a naive DFT and is tabulated
/// on a grid `oversample` times finer than dt; the integral over the absolute
/// time tau = b + a t is then a trapezoid sum over that table, truncated where
/// the window falls below e^-72.
class DirectWct {
 public:
  explicit DirectWct(const SampledSignal& x, double mu = 1.0, int oversample = 8)
      : n_(x.size()), dt_(x.dt), mu_(mu), oversample_(oversample) {
    require(n_ >= 2, "signal needs at least 2 samples");
    require(oversample >= 1, "oversampling factor must be positive");
    constexpr double pi = std::numbers::pi;
    const std::size_t n = n_;
    std::vector<Complex> roots(n);
    for (std::size_t r = 0; r < n; ++r)
      roots[r] = std::polar(1.0, -2.0 * pi * static_cast<double>(r) / static_cast<double>(n));
    std::vector<Complex> spectrum(n);
    for (std::size_t k = 0; k < n; ++k) {
      Complex acc{};
      for (std::size_t m = 0; m < n; ++m) acc += x.samples[m] * roots[(k * m) % n];
      spectrum[k] = acc / static_cast<double>(n);
    }

    const std::size_t fine = n * static_cast<std::size_t>(oversample);
    std::vector<Complex> fine_roots(fine);
    for (std::size_t r = 0; r < fine; ++r)
      fine_roots[r] = std::polar(1.0, 2.0 * pi * static_cast<double>(r) / static_cast<double>(fine));
    table_.assign(fine, Complex{});
    for (std::size_t q = 0; q < fine; ++q) {
      Complex acc{};
      for (std::size_t k = 0; k < n; ++k) {
        // signed bin k' times node q, reduced modulo the fine length
        const auto signed_k = static_cast<std::int64_t>(k) - (k <= n / 2 ? 0 : static_cast<std::int64_t>(n));
        const std::int64_t phase = (signed_k * static_cast<std::int64_t>(q)) % static_cast<std::int64_t>(fine);
        const auto idx = static_cast<std::size_t>(phase < 0 ? phase + static_cast<std::int64_t>(fine) : phase);
        acc += spectrum[k] * fine_roots[idx];
      }
      table_[q] = acc;
    }
  }

  /// All moments j = 0..4 at one point.
  std::array<Complex, kMomentCount> moments(double sigma, double a, double b, double lam) const {
    require(a > 0.0, "scale must be positive");
    require(sigma > 0.0, "window width sigma must be positive");
    constexpr double pi = std::numbers::pi;
    const double h = dt_ / static_cast<double>(oversample_);
    const double reach = 12.0 * sigma * a;
    const double tau_lo = std::max(0.0, b - reach);
    const double tau_hi = std::min(static_cast<double>(n_) * dt_, b + reach);
    std::array<Complex, kMomentCount> acc{};
    if (!(tau_hi > tau_lo)) return acc;
    const auto q_lo = static_cast<std::size_t>(std::ceil(tau_lo / h));
    const auto q_hi = std::min(table_.size() - 1, static_cast<std::size_t>(std::floor(tau_hi / h)));
    const GaussianWindow w(sigma);
    for (std::size_t q = q_lo; q <= q_hi; ++q) {
      const double tau = static_cast<double>(q) * h;
      const double t = (tau - b) / a;
      const double g = gaussian(w, t);
      const double cycles = -(mu_ * t + 0.5 * lam * a * a * t * t);
      const double arg = 2.0 * pi * (cycles - std::round(cycles));
      Complex term = table_[q] * g * Complex{std::cos(arg), std::sin(arg)};
      for (auto& v : acc) {
        v += term;
        term *= t;
      }
    }
    for (auto& v : acc) v *= h / a;
    return acc;
  }

  Complex operator()(double sigma, double a, double b, double lam, int j) const {
    require(j >= 0 && j < kMomentCount, "moment order must be in 0..4");
    return moments(sigma, a, b, lam)[static_cast<std::size_t>(j)];
  }

 private:
  std::size_t n_;
  double dt_;
  double mu_;
  int oversample_;
  std::vector<Complex> table_;
};

inline Complex wct_direct(const SampledSignal& x, double sigma, double a, double b, double lam, int j,
                          double mu = 1.0) {
  return DirectWct(x, mu)(sigma, a, b, lam, j);
}

/// U^g at an arbitrary scale and chirprate but a sample time b_m, through the
/// same spectral formula as the FFT path (one inverse-DFT sample, O(N)).
/// Negative mu is accepted; it is used for conjugate-symmetry checks.
class WctEvaluator {
 public:
  WctEvaluator(const SampledSignal& x, double sigma, double mu, const AnalysisGrid& grid)
      : n_(grid.n), mu_(mu), sigma_(sigma), eta_(grid.eta), spectrum_(grid.n), roots_(grid.n) {
    require(x.size() == grid.n, "signal length does not match grid length");
    require(sigma > 0.0, "window width sigma must be positive");
    Fft fft(n_);
    fft.forward(x.samples, spectrum_);
    constexpr double pi = std::numbers::pi;
    for (std::size_t r = 0; r < n_; ++r)
      roots_[r] = std::polar(1.0, 2.0 * pi * static_cast<double>(r) / static_cast<double>(n_));
  }

  Complex operator()(double a, std::size_t m, double lam) const {
    const PftKernel kernel(sigma_, a * a * lam);
    Complex acc{};
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex g = kernel.moment0(mu_ - a * eta_[k]);
      if (g == Complex{}) continue;
      acc += spectrum_[k] * g * roots_[(k * m) % n_];
    }
    return acc / static_cast<double>(n_);
  }

  double sigma() const { return sigma_; }
  double mu() const { return mu_; }

 private:
  std::size_t n_;
  double mu_;
  double sigma_;
  std::vector<double> eta_;
  std::vector<Complex> spectrum_;
  std::vector<Complex> roots_;
};

}  // namespace xwct
