#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "xwct/entropy.hpp"

using namespace xwct;

namespace {

SampledSignal tone_chirp(std::size_t n = 256) {
  const ComponentSpec spec{1.0, PolynomialPhase{{0.0, 20.0, 3.0, 0.0}}};
  return synthesize(std::span(&spec, 1), n, 1.0 / 128.0);
}

AnalysisGrid small_grid(std::size_t n) {
  return build_grid(n, 1.0 / 128.0, 1.0, 1.0 / 16.0, 8.0, 0.5).restricted_to_band(8.0, 48.0);
}

}  // namespace

TEST(Entropy, EqualCellsGiveLogCount) {
  for (std::size_t count : {1u, 2u, 7u, 64u}) {
    std::vector<double> mag(count, 3.0), w(count, 1.0);
    EXPECT_NEAR(renyi_entropy(mag, w), std::log2(static_cast<double>(count)), 1e-12) << count;
    // the cell measure enters as log2 of the total weight
    std::vector<double> quarter(count, 0.25);
    EXPECT_NEAR(renyi_entropy(mag, quarter), std::log2(0.25 * static_cast<double>(count)), 1e-12) << count;
  }
}

TEST(Entropy, InvariantUnderAmplitudeScaling) {
  std::vector<double> mag{0.1, 2.0, 0.7, 5.0, 0.0, 1.3}, w{1.0, 0.5, 0.5, 2.0, 1.0, 1.0};
  const double base = renyi_entropy(mag, w);
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    auto scaled = mag;
    for (auto& v : scaled) v *= c;
    EXPECT_NEAR(renyi_entropy(scaled, w), base, 1e-10) << c;
  }
}

TEST(Entropy, SpreadingRaisesEntropy) {
  std::vector<double> w(8, 1.0);
  std::vector<double> peaked{0, 0, 0, 4, 0, 0, 0, 0}, spread{0, 0, 1, 2, 1, 0, 0, 0}, flat(8, 1.0);
  EXPECT_LT(renyi_entropy(peaked, w), renyi_entropy(spread, w));
  EXPECT_LT(renyi_entropy(spread, w), renyi_entropy(flat, w));
}

TEST(Entropy, IgnoresPhase) {
  const auto x = tone_chirp();
  const auto g = small_grid(x.size());
  auto cube = compute_wct(x, 3.0, g);
  const double base = renyi_entropy(cube, g);
  for (std::size_t n = 0; n < cube.size(); ++n) cube.flat()[n] *= std::polar(1.0, 0.37 * static_cast<double>(n % 11));
  EXPECT_NEAR(renyi_entropy(cube, g), base, 1e-10);
}

TEST(Entropy, StreamingMatchesCube) {
  const auto x = tone_chirp();
  const auto g = small_grid(x.size());
  const double from_cube = renyi_entropy(compute_wct(x, 2.5, g), g);
  EXPECT_NEAR(entropy_for_sigma(x, 2.5, g), from_cube, 1e-10);
}

TEST(Entropy, ZeroInputThrows) {
  const auto g = small_grid(256);
  Cube3<Complex> zero(g.n_scales(), g.n, g.n_rates());
  EXPECT_THROW(renyi_entropy(zero, g), ValidationError);
  std::vector<double> mag(4, 0.0), w(4, 1.0);
  EXPECT_THROW(renyi_entropy(mag, w), ValidationError);
}

TEST(Entropy, SigmaSearchReturnsCurveMinimum) {
  const auto x = tone_chirp();
  const auto g = small_grid(x.size());
  SigmaSearch opt;
  opt.lo = 1.0;
  opt.hi = 6.0;
  const auto curve = select_sigma(x, g, opt);
  ASSERT_EQ(curve.sigmas.size(), curve.entropies.size());
  ASSERT_FALSE(curve.sigmas.empty());
  double best = curve.entropies.front(), at = curve.sigmas.front();
  for (std::size_t i = 0; i < curve.sigmas.size(); ++i)
    if (curve.entropies[i] < best) best = curve.entropies[i], at = curve.sigmas[i];
  EXPECT_DOUBLE_EQ(curve.argmin, at);
  EXPECT_GE(curve.argmin, opt.lo);
  EXPECT_LE(curve.argmin, opt.hi);
}

TEST(Entropy, RejectsBadRange) {
  const auto x = tone_chirp();
  const auto g = small_grid(x.size());
  SigmaSearch opt;
  opt.lo = 3.0;
  opt.hi = 2.0;
  EXPECT_THROW(select_sigma(x, g, opt), ValidationError);
}
