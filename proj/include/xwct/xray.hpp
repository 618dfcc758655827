#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/error.hpp"
#include "xwct/grid.hpp"
#include "xwct/wct.hpp"
#include "xwct/window.hpp"

namespace xwct {

struct XraySettings {
  double gamma = 0.25;       // width of the averaging window h = g_gamma
  double v_halfwidth = 1.0;  // integrate over v in [-v_halfwidth, v_halfwidth]
};

/// Windowed line integral of |U^g| along (lambda, 1, 0) in (frequency, time, chirprate).
struct XwctCube {
  Cube3<double> values;
  AnalysisGrid grid;
  XraySettings settings;
};

/// Discrete h(v_q) dt on v_q = q dt, |q| <= floor(v_halfwidth / dt), summing to one.
inline std::vector<double> xray_weights(const XraySettings& xs, double dt) {
  require(xs.gamma > 0.0, "X-ray window width must be positive");
  require(xs.v_halfwidth >= dt, "X-ray half-range must be at least one sample");
  const auto q_max = static_cast<long long>(std::floor(xs.v_halfwidth / dt + 1e-9));
  const GaussianWindow h(xs.gamma);
  std::vector<double> w(static_cast<std::size_t>(2 * q_max + 1));
  double total = 0.0;
  for (long long q = -q_max; q <= q_max; ++q) {
    const double v = gaussian(h, static_cast<double>(q) * dt) * dt;
    w[static_cast<std::size_t>(q + q_max)] = v;
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

/// X-ray transform of a WCT magnitude cube on `grid`.
///
/// For each (a_s, lambda_l), the line visits frequency xi_s + lambda_l v_q at
/// time b_m + v_q. The frequency is off-grid in general and is linearly
/// interpolated in xi between the two bracketing band frequencies; samples
/// outside the band or the record contribute zero. Because the interpolation
/// position depends only on (s, l, q), each term is a shifted scaled copy of
/// at most two magnitude rows.
inline XwctCube compute_xwct(const Cube3<double>& magnitude, const AnalysisGrid& grid, const XraySettings& xs = {}) {
  require(magnitude.n_outer() == grid.n_scales() && magnitude.n_time() == grid.n &&
              magnitude.n_inner() == grid.n_rates(),
          "magnitude cube shape does not match grid");
  const auto w = xray_weights(xs, grid.dt);
  const auto q_max = static_cast<long long>(w.size() / 2);
  const std::size_t ns = grid.n_scales(), n = grid.n;
  XwctCube out{Cube3<double>(ns, n, grid.n_rates()), grid, xs};
  const auto& f = grid.freqs;  // increasing; f[k] belongs to scale ns-1-k

  for (std::size_t s = 0; s < ns; ++s) {
    const double xi = grid.mu / grid.scales[s];
    for (std::size_t l = 0; l < grid.n_rates(); ++l) {
      auto dst = out.values.row(s, l);
      const double lam = grid.chirprates[l];
      for (long long q = -q_max; q <= q_max; ++q) {
        const double target = xi + lam * static_cast<double>(q) * grid.dt;
        if (target < f.front() || target > f.back()) continue;
        auto hi = static_cast<std::size_t>(std::upper_bound(f.begin(), f.end(), target) - f.begin());
        if (hi >= f.size()) hi = f.size() - 1;
        const std::size_t lo = hi == 0 ? 0 : hi - 1;
        const double frac = hi == lo ? 0.0 : (target - f[lo]) / (f[hi] - f[lo]);
        const double weight = w[static_cast<std::size_t>(q + q_max)];
        const auto row_lo = magnitude.row(ns - 1 - lo, l);
        const auto row_hi = magnitude.row(ns - 1 - hi, l);
        const double c_lo = weight * (1.0 - frac), c_hi = weight * frac;
        // dst[m] += c_lo row_lo[m + q] + c_hi row_hi[m + q] for m + q inside the record
        const long long m_begin = std::max<long long>(0, -q);
        const long long m_end = std::min<long long>(static_cast<long long>(n), static_cast<long long>(n) - q);
        for (long long m = m_begin; m < m_end; ++m) {
          const auto src = static_cast<std::size_t>(m + q);
          dst[static_cast<std::size_t>(m)] += c_lo * row_lo[src] + c_hi * row_hi[src];
        }
      }
    }
  }
  return out;
}

inline XwctCube compute_xwct(const Cube3<Complex>& wct, const AnalysisGrid& grid, const XraySettings& xs = {}) {
  return compute_xwct(magnitude(wct), grid, xs);
}

inline XwctCube compute_xwct(const MomentCubeStack& stack, const XraySettings& xs = {}) {
  return compute_xwct(stack.cubes[0], stack.grid, xs);
}

}  // namespace xwct
