#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "xwct/cube.hpp"
#include "xwct/grid.hpp"
#include "xwct/wct.hpp"

namespace xwct {

enum class FieldMode { general, simplified };

/// Transforms with the derivative windows g', g'', b g', b^2 g'.
struct DerivativeCubes {
  Cube3<Complex> g1;    // U^{g'}
  Cube3<Complex> g2;    // U^{g''}
  Cube3<Complex> bg1;   // U^{b g'}
  Cube3<Complex> b2g1;  // U^{b^2 g'}
};

struct DerivativeValues {
  Complex g1, g2, bg1, b2g1;
};

/// For the Gaussian, g' = -t g / sigma^2, so every derivative window is a
/// combination of the moment windows.
inline DerivativeValues derivative_values(const std::array<Complex, 5>& u, double sigma) {
  const double inv2 = 1.0 / (sigma * sigma);
  return {-inv2 * u[1], -inv2 * u[0] + inv2 * inv2 * u[2], -inv2 * u[2], -inv2 * u[3]};
}

inline DerivativeCubes derivative_cubes(const MomentCubeStack& stack) {
  const auto& c0 = stack.cubes[0];
  DerivativeCubes d{Cube3<Complex>(c0.n_outer(), c0.n_time(), c0.n_inner()),
                    Cube3<Complex>(c0.n_outer(), c0.n_time(), c0.n_inner()),
                    Cube3<Complex>(c0.n_outer(), c0.n_time(), c0.n_inner()),
                    Cube3<Complex>(c0.n_outer(), c0.n_time(), c0.n_inner())};
  const double inv2 = 1.0 / (stack.sigma * stack.sigma);
  for (std::size_t n = 0; n < c0.size(); ++n) {
    const Complex u0 = stack.cubes[0].flat()[n];
    const Complex u1 = stack.cubes[1].flat()[n];
    const Complex u2 = stack.cubes[2].flat()[n];
    const Complex u3 = stack.cubes[3].flat()[n];
    d.g1.flat()[n] = -inv2 * u1;
    d.g2.flat()[n] = -inv2 * u0 + inv2 * inv2 * u2;
    d.bg1.flat()[n] = -inv2 * u2;
    d.b2g1.flat()[n] = -inv2 * u3;
  }
  return d;
}

/// Reference values of one cell. `denom` is the magnitude of the divisor in
/// use, divided by the power of sigma it naturally carries, so that it is
/// comparable to max|U^g|^2 (order 2) or max|U^g|^4 (order 3).
struct CellReference {
  double if_hz = 0.0;
  double cr = 0.0;
  double denom = 0.0;
};

namespace detail {
inline double re_over_i2pi(Complex w) { return w.imag() / (2.0 * std::numbers::pi); }
}  // namespace detail

/// Gaussian-simplified 2nd order: exact on linear chirps.
inline CellReference second_order_simplified(const std::array<Complex, 5>& u, double a, double lam,
                                             double mu, double sigma) {
  const Complex det = u[0] * u[2] - u[1] * u[1];
  CellReference r;
  r.denom = std::abs(det) / (sigma * sigma);
  if (det == Complex{}) return r;
  r.if_hz = mu / a + detail::re_over_i2pi(u[0] * u[1] / det) / a;
  r.cr = lam - detail::re_over_i2pi(u[0] * u[0] / det) / (a * a);
  return r;
}

/// 2nd order through the derivative windows.
inline CellReference second_order_general(const std::array<Complex, 5>& u, const DerivativeValues& d,
                                          double a, double lam, double mu) {
  const Complex chirp{0.0, 2.0 * std::numbers::pi * lam * a * a};
  const Complex den = d.g1 * u[1] - u[0] * d.bg1 + chirp * (u[2] * u[0] - u[1] * u[1]);
  const Complex num_if = u[1] * d.g2 - d.bg1 * d.g1 + chirp * (u[2] * d.g1 - d.bg1 * u[1] - u[1] * u[0]);
  const Complex num_cr = u[0] * d.g2 - d.g1 * d.g1 + chirp * (u[1] * d.g1 - d.bg1 * u[0] - u[0] * u[0]);
  CellReference r;
  r.denom = std::abs(den);
  if (den == Complex{}) return r;
  r.if_hz = mu / a - detail::re_over_i2pi(num_if / den) / a;
  r.cr = lam + detail::re_over_i2pi(num_cr / den) / (a * a);
  return r;
}

/// Gaussian-simplified 3rd order: exact on quadratic chirps.
inline CellReference third_order_simplified(const std::array<Complex, 5>& u, double a, double lam,
                                            double mu, double sigma) {
  const Complex u0 = u[0], u1 = u[1], u2 = u[2], u3 = u[3], u4 = u[4];
  const Complex num_if = 2.0 * u0 * u1 * (u3 * u1 - u2 * u2) + u0 * u0 * (u2 * u3 - u1 * u4);
  const Complex num_cr = 2.0 * u0 * u1 * (u3 * u0 - u1 * u2) + u0 * u0 * (u2 * u2 - u0 * u4);
  const Complex den = (u3 * u0 - u2 * u1) * (u3 * u0 - u2 * u1) + (u2 * u2 - u4 * u0) * (u2 * u0 - u1 * u1);
  CellReference r;
  const double s2 = sigma * sigma;
  r.denom = std::abs(den) / (s2 * s2 * s2);
  if (den == Complex{}) return r;
  r.if_hz = mu / a + detail::re_over_i2pi(num_if / den) / a;
  r.cr = lam - detail::re_over_i2pi(num_cr / den) / (a * a);
  return r;
}

/// 3rd order through the derivative windows.
inline CellReference third_order_general(const std::array<Complex, 5>& u, const DerivativeValues& d,
                                         double a, double lam, double mu, double sigma) {
  constexpr double pi = std::numbers::pi;
  const Complex u0 = u[0], u1 = u[1], u2 = u[2], u3 = u[3], u4 = u[4];
  const Complex half_ipi{0.0, 0.5 * pi};
  const double lin = lam * pi * pi * a * a;

  const Complex p = d.b2g1 * u0 - d.g1 * u2 + 2.0 * u1 * u0;
  const Complex q = d.g2 * u0 - d.g1 * d.g1;
  const Complex s = u1 * d.g1 - d.bg1 * u0 - u0 * u0;

  const Complex den = half_ipi * (u1 * u2 - u3 * u0) * (u2 * d.g1 - d.b2g1 * u0) -
                      half_ipi * (u2 * u2 - u0 * u4) * (d.g1 * u1 - d.bg1 * u0) +
                      lin * (u3 * u0 - u1 * u2) * (u3 * u0 - u1 * u2) +
                      lin * (u2 * u2 - u0 * u4) * (u2 * u0 - u1 * u1);
  const Complex num_if = half_ipi * p * (u2 * d.bg1 - d.b2g1 * u1) + half_ipi * q * (u4 * u1 - u3 * u2) +
                         lin * p * (u2 * u2 - u3 * u1) + lin * s * (u3 * u2 - u1 * u4);
  const Complex num_cr = half_ipi * p * (u2 * d.g1 - d.b2g1 * u0) + half_ipi * q * (u4 * u0 - u2 * u2) +
                         lin * p * (u1 * u2 - u3 * u0) + lin * s * (u2 * u2 - u0 * u4);
  CellReference r;
  const double s2 = sigma * sigma;
  r.denom = std::abs(den) / (s2 * s2);
  if (den == Complex{} || u0 == Complex{}) return r;
  r.if_hz = mu / a - detail::re_over_i2pi(d.g1 / u0 + num_if / den) / a;
  r.cr = lam + detail::re_over_i2pi(num_cr / den) / (a * a);
  return r;
}

inline CellReference cell_reference(int order, FieldMode mode, const std::array<Complex, 5>& u, double a,
                                    double lam, double mu, double sigma) {
  if (mode == FieldMode::simplified) {
    return order == 2 ? second_order_simplified(u, a, lam, mu, sigma)
                      : third_order_simplified(u, a, lam, mu, sigma);
  }
  const auto d = derivative_values(u, sigma);
  return order == 2 ? second_order_general(u, d, a, lam, mu) : third_order_general(u, d, a, lam, mu, sigma);
}

/// Relative validity thresholds: |U^g| > rel_u * max|U^g| and
/// denom > rel_d * max|U^g|^p with p = 2 (order 2) or 4 (order 3).
struct MaskThresholds {
  double rel_u = 1e-3;
  double rel_d = 1e-6;
};

/// IF (Hz) and chirprate (Hz/s) reference cubes with a validity mask.
struct ReferenceFields {
  int order = 2;
  AnalysisGrid grid;
  Cube3<double> if_field;
  Cube3<double> cr_field;
  Cube3<std::uint8_t> mask;

  bool valid(std::size_t s, std::size_t m, std::size_t l) const { return mask(s, m, l) != 0; }
  std::size_t valid_count() const {
    std::size_t c = 0;
    for (auto v : mask.flat()) c += v;
    return c;
  }
};

namespace detail {
inline void require_order(int order) { require(order == 2 || order == 3, "reference order must be 2 or 3"); }

/// Apply the mask rule once every |U^g| and denominator is known.
inline void apply_mask(ReferenceFields& f, const Cube3<Complex>& u0, const Cube3<double>& denom,
                       const MaskThresholds& th) {
  const double peak = max_abs(u0);
  const double eps_u = th.rel_u * peak;
  const double eps_d = th.rel_d * (f.order == 2 ? peak * peak : peak * peak * peak * peak);
  auto mask = f.mask.flat();
  auto ifs = f.if_field.flat();
  auto crs = f.cr_field.flat();
  for (std::size_t n = 0; n < mask.size(); ++n) {
    const bool ok = peak > 0.0 && std::abs(u0.flat()[n]) > eps_u && denom.flat()[n] > eps_d &&
                    std::isfinite(ifs[n]) && std::isfinite(crs[n]);
    mask[n] = ok ? 1 : 0;
    if (!ok) ifs[n] = crs[n] = 0.0;
  }
}
}  // namespace detail

inline ReferenceFields reference_fields(const MomentCubeStack& stack, int order, FieldMode mode,
                                        const MaskThresholds& th = {}) {
  detail::require_order(order);
  const auto& c0 = stack.cubes[0];
  const auto& g = stack.grid;
  ReferenceFields f;
  f.order = order;
  f.grid = g;
  f.if_field = Cube3<double>(c0.n_outer(), c0.n_time(), c0.n_inner());
  f.cr_field = Cube3<double>(c0.n_outer(), c0.n_time(), c0.n_inner());
  f.mask = Cube3<std::uint8_t>(c0.n_outer(), c0.n_time(), c0.n_inner());
  Cube3<double> denom(c0.n_outer(), c0.n_time(), c0.n_inner());
  for (std::size_t s = 0; s < c0.n_outer(); ++s) {
    for (std::size_t l = 0; l < c0.n_inner(); ++l) {
      for (std::size_t m = 0; m < c0.n_time(); ++m) {
        std::array<Complex, 5> u;
        for (std::size_t j = 0; j < 5; ++j) u[j] = stack.cubes[j](s, m, l);
        const auto r = cell_reference(order, mode, u, g.scales[s], g.chirprates[l], g.mu, stack.sigma);
        f.if_field(s, m, l) = r.if_hz;
        f.cr_field(s, m, l) = r.cr;
        denom(s, m, l) = r.denom;
      }
    }
  }
  detail::apply_mask(f, c0, denom, th);
  return f;
}

inline ReferenceFields second_order_fields(const MomentCubeStack& stack, FieldMode mode,
                                           const MaskThresholds& th = {}) {
  return reference_fields(stack, 2, mode, th);
}

inline ReferenceFields third_order_fields(const MomentCubeStack& stack, FieldMode mode,
                                          const MaskThresholds& th = {}) {
  return reference_fields(stack, 3, mode, th);
}

/// U^g together with reference fields, without materializing moments 1..4.
struct WctWithFields {
  Cube3<Complex> wct;
  ReferenceFields fields;
  double sigma = 0.0;
};

inline WctWithFields compute_wct_with_fields(const SampledSignal& x, double sigma, const AnalysisGrid& grid,
                                             int order, FieldMode mode = FieldMode::simplified,
                                             const MaskThresholds& th = {}) {
  detail::require_order(order);
  MomentRowEngine engine(x, sigma, grid);
  const std::size_t ns = grid.n_scales(), n = grid.n, nl = grid.n_rates();
  WctWithFields out;
  out.sigma = sigma;
  out.wct = Cube3<Complex>(ns, n, nl);
  auto& f = out.fields;
  f.order = order;
  f.grid = grid;
  f.if_field = Cube3<double>(ns, n, nl);
  f.cr_field = Cube3<double>(ns, n, nl);
  f.mask = Cube3<std::uint8_t>(ns, n, nl);
  Cube3<double> denom(ns, n, nl);

  // order 2 only reads moments 0..2
  const int count = (order == 2) ? 3 : 5;
  std::array<std::vector<Complex>, 5> scratch;
  for (auto& v : scratch) v.assign(n, Complex{});
  std::array<std::span<Complex>, 5> rows;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t l = 0; l < nl; ++l) {
      rows[0] = out.wct.row(s, l);
      for (std::size_t j = 1; j < 5; ++j) rows[j] = scratch[j];
      engine.compute(s, l, count, rows);
      for (std::size_t m = 0; m < n; ++m) {
        std::array<Complex, 5> u{rows[0][m], scratch[1][m], scratch[2][m], scratch[3][m], scratch[4][m]};
        const auto r = cell_reference(order, mode, u, grid.scales[s], grid.chirprates[l], grid.mu, sigma);
        f.if_field(s, m, l) = r.if_hz;
        f.cr_field(s, m, l) = r.cr;
        denom(s, m, l) = r.denom;
      }
    }
  }
  detail::apply_mask(f, out.wct, denom, th);
  return out;
}

}  // namespace xwct
