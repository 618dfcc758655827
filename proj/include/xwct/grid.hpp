#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "xwct/error.hpp"

namespace xwct {

namespace detail {
// floor() that forgives representation error in exact ratios such as 2*8/0.125.
inline std::size_t robust_floor(double x) {
  return static_cast<std::size_t>(std::floor(x * (1.0 + 1e-12) + 1e-12));
}
inline std::size_t robust_ceil(double x) {
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12) - 1e-12));
}
}  // namespace detail

/// Discretization of scale a, time b and chirprate lambda, plus the frequency
/// grid xi = mu / a used for squeezing and the FFT frequency bins.
///
/// Scales follow a_j = 2^{j da} dt for j = 1..J0 with J0 = ceil((log2 N - 1) / da).
/// The grid may be restricted to a sub-band of scale indices [j_first, j_last];
/// `scales`, `freqs` and every per-scale quantity then cover that band only.
struct AnalysisGrid {
  std::size_t n = 0;
  double dt = 1.0;
  double mu = 1.0;
  double delta_a_tilde = 1.0 / 32.0;
  std::size_t j0 = 0;
  std::size_t j_first = 1;
  std::size_t j_last = 0;

  std::vector<double> scales;      // a_j, j = j_first..j_last, increasing
  std::vector<double> times;       // b_m = m dt
  double r0 = 0.0;
  double delta_lambda = 0.0;
  std::vector<double> chirprates;  // lambda_l = -R0 + l dlam
  std::vector<double> freqs;       // xi_k = mu / a_{reversed}, increasing
  std::vector<double> eta;         // FFT bins, wrapping negative above N/2

  std::size_t n_scales() const { return scales.size(); }
  std::size_t n_rates() const { return chirprates.size(); }
  double delta_eta() const { return 1.0 / (static_cast<double>(n) * dt); }

  /// Global 1-based index j of band position s.
  std::size_t global_index(std::size_t s) const { return j_first + s; }

  double scale_of_index(double j) const { return std::exp2(j * delta_a_tilde) * dt; }

  /// (Delta a)_j = a_{j+1} - a_j; the last scale of the full grid reuses the previous step.
  double scale_step(std::size_t s) const {
    const std::size_t j = global_index(s);
    const auto jd = static_cast<double>(j);
    if (j >= j0) return scale_of_index(jd) - scale_of_index(jd - 1.0);
    return scale_of_index(jd + 1.0) - scale_of_index(jd);
  }

  /// Cell measure a^-1 (Delta a)_j dlam used by squeezing.
  double squeeze_weight(std::size_t s) const {
    return scale_step(s) / scales[s] * delta_lambda;
  }

  /// Frequency position k of band scale s (freqs[k] == mu / scales[s]).
  std::size_t freq_index_of_scale(std::size_t s) const { return scales.size() - 1 - s; }

  /// (Delta xi)_k = xi_{k+1} - xi_k, the last one mirrors its predecessor.
  double freq_step(std::size_t k) const {
    if (freqs.size() < 2) return 0.0;
    if (k + 1 >= freqs.size()) return freqs[k] - freqs[k - 1];
    return freqs[k + 1] - freqs[k];
  }

  double min_freq_step() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < freqs.size(); ++k) best = std::min(best, freqs[k + 1] - freqs[k]);
    return best;
  }

  /// Band position of the scale nearest to a in log2 (nullopt outside the band).
  std::optional<std::size_t> nearest_scale(double a) const {
    if (!(a > 0.0)) return std::nullopt;
    const double j = std::log2(a / dt) / delta_a_tilde;
    const double s = std::round(j) - static_cast<double>(j_first);
    if (s < 0.0 || s >= static_cast<double>(scales.size())) return std::nullopt;
    return static_cast<std::size_t>(s);
  }

  /// Nearest chirprate index (nullopt when lambda is off the grid by more than half a step).
  std::optional<std::size_t> nearest_rate(double lam) const {
    const double l = std::round((lam + r0) / delta_lambda);
    if (!(l >= 0.0) || l >= static_cast<double>(chirprates.size())) return std::nullopt;
    return static_cast<std::size_t>(l);
  }

  /// Restrict scales to those whose frequency mu / a_j lies in [f_min, f_max].
  AnalysisGrid restricted_to_band(double f_min, double f_max) const;
};

inline AnalysisGrid build_grid(std::size_t n, double dt, double mu, double delta_a_tilde, double r0,
                               double delta_lambda) {
  require(n >= 4, "grid needs at least 4 samples");
  require(dt > 0.0, "sampling step must be positive");
  require(mu > 0.0, "mu must be positive");
  require(delta_a_tilde > 0.0, "log-scale step must be positive");
  require(r0 > 0.0, "chirprate half-range R0 must be positive");
  require(delta_lambda > 0.0, "chirprate step must be positive");
  require(delta_lambda < 2.0 * r0, "chirprate step must be smaller than 2 R0 (empty chirprate grid)");

  AnalysisGrid g;
  g.n = n;
  g.dt = dt;
  g.mu = mu;
  g.delta_a_tilde = delta_a_tilde;
  g.j0 = detail::robust_ceil((std::log2(static_cast<double>(n)) - 1.0) / delta_a_tilde);
  require(g.j0 >= 1, "scale grid is empty");
  g.j_first = 1;
  g.j_last = g.j0;

  g.scales.resize(g.j0);
  for (std::size_t s = 0; s < g.j0; ++s) g.scales[s] = g.scale_of_index(static_cast<double>(s + 1));
  g.freqs.resize(g.j0);
  for (std::size_t k = 0; k < g.j0; ++k) g.freqs[k] = mu / g.scales[g.j0 - 1 - k];

  g.times.resize(n);
  for (std::size_t m = 0; m < n; ++m) g.times[m] = static_cast<double>(m) * dt;

  g.r0 = r0;
  g.delta_lambda = delta_lambda;
  const std::size_t l_count = detail::robust_floor(2.0 * r0 / delta_lambda);
  g.chirprates.resize(l_count);
  for (std::size_t l = 0; l < l_count; ++l) g.chirprates[l] = -r0 + static_cast<double>(l) * delta_lambda;

  g.eta.resize(n);
  const double deta = g.delta_eta();
  for (std::size_t k = 0; k < n; ++k) {
    const auto kd = static_cast<double>(k);
    g.eta[k] = (k <= n / 2) ? kd * deta : (kd - static_cast<double>(n)) * deta;
  }
  return g;
}

inline AnalysisGrid AnalysisGrid::restricted_to_band(double f_min, double f_max) const {
  require(f_min > 0.0 && f_max > f_min, "frequency band must satisfy 0 < f_min < f_max");
  std::vector<std::size_t> keep;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double f = mu / scales[s];
    if (f >= f_min && f <= f_max) keep.push_back(s);
  }
  require(keep.size() >= 2, "frequency band selects fewer than two scales");
  AnalysisGrid g = *this;
  g.j_first = j_first + keep.front();
  g.j_last = j_first + keep.back();
  g.scales.assign(scales.begin() + static_cast<std::ptrdiff_t>(keep.front()),
                  scales.begin() + static_cast<std::ptrdiff_t>(keep.back()) + 1);
  g.freqs.resize(g.scales.size());
  for (std::size_t k = 0; k < g.scales.size(); ++k) g.freqs[k] = mu / g.scales[g.scales.size() - 1 - k];
  return g;
}

}  // namespace xwct
