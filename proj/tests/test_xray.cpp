#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "xwct/xray.hpp"

using namespace xwct;

namespace {

SampledSignal linear_chirp(std::size_t n, double f0, double rate, double amp = 1.0) {
  const ComponentSpec spec{amp, PolynomialPhase{{0.0, f0, 0.5 * rate, 0.0}}};
  return synthesize(std::span(&spec, 1), n, 1.0 / 128.0);
}

AnalysisGrid chirp_grid(std::size_t n) {
  return build_grid(n, 1.0 / 128.0, 1.0, 1.0 / 32.0, 8.0, 0.5).restricted_to_band(6.0, 40.0);
}

// Fraction of |slice| within |lambda - centre| <= half, over the chirprate axis at (s, m).
double slice_fraction(const Cube3<double>& c, const AnalysisGrid& g, std::size_t s, std::size_t m, double centre,
                      double half) {
  double in = 0.0, all = 0.0;
  for (std::size_t l = 0; l < g.n_rates(); ++l) {
    all += c(s, m, l);
    if (std::abs(g.chirprates[l] - centre) <= half) in += c(s, m, l);
  }
  return in / all;
}

}  // namespace

TEST(Xray, WeightsAreNormalizedAndSymmetric) {
  const auto w = xray_weights(XraySettings{}, 1.0 / 128.0);
  ASSERT_EQ(w.size(), 2u * 128u + 1u);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-14);
  for (std::size_t q = 0; q < w.size(); ++q) EXPECT_DOUBLE_EQ(w[q], w[w.size() - 1 - q]);
  EXPECT_GT(w[w.size() / 2], w.front());
}

TEST(Xray, RejectsDegenerateSettings) {
  EXPECT_THROW(xray_weights(XraySettings{0.0, 1.0}, 0.01), ValidationError);
  EXPECT_THROW(xray_weights(XraySettings{0.25, 0.001}, 0.01), ValidationError);
}

TEST(Xray, ZeroChirprateIsTimeSmoothing) {
  const auto x = linear_chirp(256, 12.0, 4.0);
  const auto g = chirp_grid(x.size());
  const auto mag = magnitude(compute_wct(x, 3.0, g));
  const XraySettings xs{0.1, 0.25};
  const auto out = compute_xwct(mag, g, xs);
  const auto w = xray_weights(xs, g.dt);
  const auto l0 = *g.nearest_rate(0.0);
  ASSERT_EQ(g.chirprates[l0], 0.0);
  const auto q_max = static_cast<long long>(w.size() / 2);
  for (std::size_t s = 0; s < g.n_scales(); s += 7) {
    for (std::size_t m = 0; m < g.n; m += 13) {
      double expect = 0.0;
      for (long long q = -q_max; q <= q_max; ++q) {
        const long long src = static_cast<long long>(m) + q;
        if (src < 0 || src >= static_cast<long long>(g.n)) continue;
        expect += w[static_cast<std::size_t>(q + q_max)] * mag(s, static_cast<std::size_t>(src), l0);
      }
      EXPECT_NEAR(out.values(s, m, l0), expect, 1e-12 * (1.0 + expect));
    }
  }
}

TEST(Xray, NonnegativeAndZeroPreserving) {
  const auto x = linear_chirp(256, 12.0, 4.0);
  const auto g = chirp_grid(x.size());
  const auto out = compute_xwct(compute_wct(x, 3.0, g), g);
  for (double v : out.values.flat()) ASSERT_GE(v, 0.0);
  Cube3<double> zero(g.n_scales(), g.n, g.n_rates());
  EXPECT_EQ(max_abs(compute_xwct(zero, g).values), 0.0);
}

TEST(Xray, PositivelyHomogeneous) {
  const auto g = chirp_grid(256);
  const auto a = compute_xwct(compute_wct(linear_chirp(256, 12.0, 4.0), 3.0, g), g);
  const auto b = compute_xwct(compute_wct(linear_chirp(256, 12.0, 4.0, 2.5), 3.0, g), g);
  for (std::size_t n = 0; n < a.values.size(); n += 97)
    EXPECT_NEAR(b.values.flat()[n], 2.5 * a.values.flat()[n], 1e-9 * (1.0 + b.values.flat()[n]));
}

TEST(Xray, ConcentratesChirprateSlice) {
  const auto x = linear_chirp(512, 10.0, 4.0);
  const auto g = chirp_grid(x.size());
  const auto mag = magnitude(compute_wct(x, 4.0, g));
  const auto xw = compute_xwct(mag, g);
  const std::size_t m = 256;
  const auto s = *g.nearest_scale(1.0 / x.truth[0].if_hz[m]);
  const double plain = slice_fraction(mag, g, s, m, 4.0, 1.0);
  const double ray = slice_fraction(xw.values, g, s, m, 4.0, 1.0);
  EXPECT_GT(ray, plain);

  // Peak-normalized slices: away from the true chirprate the X-ray slice is lower on average.
  const auto l_peak = *g.nearest_rate(4.0);
  double ratio = 0.0;
  std::size_t count = 0;
  for (std::size_t l = 0; l < g.n_rates(); ++l) {
    if (std::abs(g.chirprates[l] - 4.0) < 2.0 * g.delta_lambda) continue;
    ratio += (xw.values(s, m, l) / xw.values(s, m, l_peak)) / (mag(s, m, l) / mag(s, m, l_peak));
    ++count;
  }
  EXPECT_LT(ratio / static_cast<double>(count), 1.0);
}

TEST(Xray, ShapeMismatchThrows) {
  const auto g = chirp_grid(256);
  Cube3<double> wrong(g.n_scales() + 1, g.n, g.n_rates());
  EXPECT_THROW(compute_xwct(wrong, g), ValidationError);
}
