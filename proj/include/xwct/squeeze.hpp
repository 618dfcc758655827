#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/error.hpp"
#include "xwct/grid.hpp"
#include "xwct/reassign.hpp"

namespace xwct {

/// Frequency bins for squeezing. Bin k owns the half-open interval (edges[k], edges[k+1]],
/// with interior edges at the midpoints between neighbouring centers.
struct FrequencyAxis {
  std::vector<double> centers;
  std::vector<double> edges;
  bool uniform = false;

  std::size_t size() const { return centers.size(); }

  std::optional<std::size_t> bin_of(double f) const {
    if (!(f > edges.front()) || f > edges.back()) return std::nullopt;
    const auto it = std::lower_bound(edges.begin(), edges.end(), f);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
  }
};

namespace detail {
inline FrequencyAxis axis_from_centers(std::vector<double> centers, bool uniform) {
  require(centers.size() >= 2, "frequency axis needs at least two bins");
  FrequencyAxis ax;
  ax.uniform = uniform;
  const std::size_t k = centers.size();
  ax.edges.resize(k + 1);
  ax.edges[0] = centers[0] - 0.5 * (centers[1] - centers[0]);
  for (std::size_t i = 1; i < k; ++i) ax.edges[i] = 0.5 * (centers[i - 1] + centers[i]);
  ax.edges[k] = centers[k - 1] + 0.5 * (centers[k - 1] - centers[k - 2]);
  ax.centers = std::move(centers);
  return ax;
}
}  // namespace detail

/// xi_k = mu / a, the log-spaced frequencies of the analysis grid.
inline FrequencyAxis log_frequency_axis(const AnalysisGrid& grid) {
  return detail::axis_from_centers(grid.freqs, false);
}

/// f0, f0 + df, ..., covering [f0, f1].
inline FrequencyAxis uniform_frequency_axis(double f0, double f1, double df) {
  require(df > 0.0 && f1 > f0, "uniform frequency axis needs f1 > f0 and df > 0");
  const std::size_t count = detail::robust_floor((f1 - f0) / df) + 1;
  std::vector<double> c(count);
  for (std::size_t k = 0; k < count; ++k) c[k] = f0 + static_cast<double>(k) * df;
  return detail::axis_from_centers(std::move(c), true);
}

/// gamma_p = -R0 + p dgam, p = 0..P-1 with P = floor(2 R0 / dgam).
struct RateAxis {
  double r0 = 0.0;
  double step = 0.0;
  std::vector<double> centers;

  std::size_t size() const { return centers.size(); }

  /// Nearest bin; an exact midpoint goes to the lower index.
  std::optional<std::size_t> bin_of(double c) const {
    const double p = std::ceil((c + r0) / step - 0.5);
    if (!(p >= 0.0) || p >= static_cast<double>(centers.size())) return std::nullopt;
    return static_cast<std::size_t>(p);
  }
};

inline RateAxis make_rate_axis(double r0, double step) {
  require(r0 > 0.0 && step > 0.0 && step < 2.0 * r0, "rate axis needs 0 < step < 2 R0");
  RateAxis ax{r0, step, {}};
  const std::size_t count = detail::robust_floor(2.0 * r0 / step);
  ax.centers.resize(count);
  for (std::size_t p = 0; p < count; ++p) ax.centers[p] = -r0 + static_cast<double>(p) * step;
  return ax;
}

/// Values over (frequency bin, time, rate bin).
template <typename T>
struct SqueezedCube {
  Cube3<T> values;
  FrequencyAxis freq;
  RateAxis rate;
  std::string source;
  double dt = 0.0;
  double source_mass = 0.0;  // sum of |source| w over on-mask cells whose fields land in range
  std::size_t binned_cells = 0;
  std::size_t dropped_cells = 0;
};

/// Squeeze target of one cell, or nullopt when masked out or off the bin axes.
struct SqueezeMap {
  const FrequencyAxis& freq;
  const RateAxis& rate;

  std::optional<std::pair<std::size_t, std::size_t>> operator()(bool valid, double if_hz, double cr) const {
    if (!valid) return std::nullopt;
    const auto k = freq.bin_of(if_hz);
    if (!k) return std::nullopt;
    const auto p = rate.bin_of(cr);
    if (!p) return std::nullopt;
    return std::pair{*k, *p};
  }
};

namespace detail {

inline constexpr std::size_t kSqueezeTimeBlock = 16;

/// Shared kernel. Accumulates in type Acc over time blocks, then stores finish(acc).
template <typename Out, typename Acc, typename Src, typename Finish>
SqueezedCube<Out> squeeze_impl(const Cube3<Src>& source, const Cube3<double>& if_field, const Cube3<double>& cr_field,
                               const Cube3<std::uint8_t>& mask, const AnalysisGrid& grid, const FrequencyAxis& freq,
                               const RateAxis& rate, Finish finish) {
  require(source.same_shape(if_field) && source.same_shape(cr_field) && source.same_shape(mask),
          "source and reference fields differ in shape");
  require(source.n_outer() == grid.n_scales() && source.n_time() == grid.n && source.n_inner() == grid.n_rates(),
          "source shape does not match grid");
  const std::size_t ns = grid.n_scales(), n = grid.n, nl = grid.n_rates();
  const std::size_t nk = freq.size(), np = rate.size();
  SqueezedCube<Out> out{Cube3<Out>(nk, n, np), freq, rate, {}, grid.dt, 0.0, 0, 0};
  const SqueezeMap target{freq, rate};

  std::vector<double> weight(ns);
  for (std::size_t s = 0; s < ns; ++s) weight[s] = grid.squeeze_weight(s);

  constexpr std::size_t B = kSqueezeTimeBlock;
  std::vector<Acc> acc(nk * np * B);
  std::vector<std::uint8_t> touched(nk * np, 0);
  for (std::size_t m0 = 0; m0 < n; m0 += B) {
    const std::size_t width = std::min(B, n - m0);
    std::fill(acc.begin(), acc.end(), Acc{});
    std::fill(touched.begin(), touched.end(), 0);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t l = 0; l < nl; ++l) {
        const std::size_t base = source.offset(s, m0, l);
        for (std::size_t dm = 0; dm < width; ++dm) {
          const std::size_t at = base + dm;
          const auto bin = target(mask.flat()[at] != 0, if_field.flat()[at], cr_field.flat()[at]);
          if (!bin) {
            out.dropped_cells += mask.flat()[at] != 0;
            continue;
          }
          const Src v = source.flat()[at];
          const std::size_t cell = bin->first * np + bin->second;
          acc[cell * B + dm] += static_cast<Acc>(v) * weight[s];
          touched[cell] = 1;
          out.source_mass += std::abs(v) * weight[s];
          ++out.binned_cells;
        }
      }
    }
    for (std::size_t cell = 0; cell < nk * np; ++cell) {
      if (!touched[cell]) continue;
      const std::size_t k = cell / np, p = cell % np;
      for (std::size_t dm = 0; dm < width; ++dm) out.values(k, m0 + dm, p) = finish(acc[cell * B + dm]);
    }
  }
  return out;
}

}  // namespace detail

/// Squeeze a value cube (complex WCT or nonnegative XWCT) with reference fields.
///
/// Each on-mask cell adds source(s, m, l) a_s^-1 (Delta a)_s dlam to the bin
/// named by its IF and chirprate references; cells landing off either axis are
/// dropped.
template <typename T>
SqueezedCube<T> synchrosqueeze(const Cube3<T>& source, const ReferenceFields& fields, const FrequencyAxis& freq,
                               const RateAxis& rate) {
  auto out = detail::squeeze_impl<T, T>(source, fields.if_field, fields.cr_field, fields.mask, fields.grid, freq, rate,
                                        [](const T& v) { return v; });
  out.source = "order" + std::to_string(fields.order);
  return out;
}

/// |squeezed WCT| without storing the complex cube.
inline SqueezedCube<double> synchrosqueeze_magnitude(const Cube3<Complex>& source, const ReferenceFields& fields,
                                                     const FrequencyAxis& freq, const RateAxis& rate) {
  auto out = detail::squeeze_impl<double, Complex>(source, fields.if_field, fields.cr_field, fields.mask, fields.grid,
                                                   freq, rate, [](const Complex& v) { return std::abs(v); });
  out.source = "order" + std::to_string(fields.order);
  return out;
}

/// Sum of |values| over all bins.
template <typename T>
double binned_mass(const SqueezedCube<T>& cube) {
  double total = 0.0;
  for (const auto& v : cube.values.flat()) total += std::abs(v);
  return total;
}

/// Fields iterated n - 1 times: F^{j}(a, b, lam) = F(mu / IF^{j-1}, b, CR^{j-1}).
///
/// The lookup point is snapped to the nearest scale and chirprate of the grid.
/// A lookup outside the grid, or onto a masked cell, masks the cell out.
inline ReferenceFields compose_fields(const ReferenceFields& base, int n) {
  require(n >= 1, "iteration count must be at least 1");
  ReferenceFields cur = base;
  const auto& g = base.grid;
  const std::size_t ns = g.n_scales(), nt = g.n, nl = g.n_rates();
  for (int it = 1; it < n; ++it) {
    ReferenceFields next = cur;
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t l = 0; l < nl; ++l) {
        for (std::size_t m = 0; m < nt; ++m) {
          if (!cur.mask(s, m, l)) continue;
          const auto s2 = g.nearest_scale(g.mu / cur.if_field(s, m, l));
          const auto l2 = g.nearest_rate(cur.cr_field(s, m, l));
          if (!s2 || !l2 || !base.mask(*s2, m, *l2)) {
            next.mask(s, m, l) = 0;
            next.if_field(s, m, l) = next.cr_field(s, m, l) = 0.0;
            continue;
          }
          next.if_field(s, m, l) = base.if_field(*s2, m, *l2);
          next.cr_field(s, m, l) = base.cr_field(*s2, m, *l2);
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

/// Multiple synchrosqueezing after n iterations: the original cube squeezed
/// once with fields composed n - 1 times. n = 1 is plain synchrosqueezing.
template <typename T>
SqueezedCube<T> multi_squeeze(const Cube3<T>& source, const ReferenceFields& fields, int n, const FrequencyAxis& freq,
                              const RateAxis& rate) {
  auto out = synchrosqueeze(source, n == 1 ? fields : compose_fields(fields, n), freq, rate);
  out.source = "multi" + std::to_string(n) + "_order" + std::to_string(fields.order);
  return out;
}

}  // namespace xwct
