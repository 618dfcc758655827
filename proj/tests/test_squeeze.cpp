#include <gtest/gtest.h>

#include <cmath>

#include "xwct/squeeze.hpp"
#include "xwct/xray.hpp"

using namespace xwct;

namespace {

struct ChirpSetup {
  SampledSignal x;
  AnalysisGrid grid;
  WctWithFields wf;
  FrequencyAxis freq;
  RateAxis rate;
};

const ChirpSetup& chirp_setup() {
  static const ChirpSetup setup = [] {
    const ComponentSpec spec{1.0, PolynomialPhase{{0.0, 10.0, 2.0, 0.0}}};
    ChirpSetup c;
    c.x = synthesize(std::span(&spec, 1), 512, 1.0 / 128.0);
    c.grid = build_grid(512, 1.0 / 128.0, 1.0, 1.0 / 32.0, 8.0, 0.25).restricted_to_band(6.0, 40.0);
    c.wf = compute_wct_with_fields(c.x, 4.0, c.grid, 3);
    c.freq = uniform_frequency_axis(6.0, 40.0, 0.125);
    c.rate = make_rate_axis(8.0, 0.25);
    return c;
  }();
  return setup;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(SqueezeAxes, FrequencyBinsAreHalfOpen) {
  const auto ax = uniform_frequency_axis(10.0, 12.0, 0.5);
  ASSERT_EQ(ax.size(), 5u);
  EXPECT_EQ(ax.bin_of(10.0), 0u);
  EXPECT_EQ(ax.bin_of(10.25), 0u);  // upper edge belongs to the lower bin
  EXPECT_EQ(ax.bin_of(10.2500001), 1u);
  EXPECT_EQ(ax.bin_of(12.25), 4u);
  EXPECT_FALSE(ax.bin_of(9.75).has_value());
  EXPECT_FALSE(ax.bin_of(12.26).has_value());
}

TEST(SqueezeAxes, RateMidpointGoesLow) {
  const auto ax = make_rate_axis(2.0, 0.5);
  ASSERT_EQ(ax.size(), 8u);
  EXPECT_DOUBLE_EQ(ax.centers.front(), -2.0);
  EXPECT_EQ(ax.bin_of(-2.0), 0u);
  EXPECT_EQ(ax.bin_of(-1.75), 0u);
  EXPECT_EQ(ax.bin_of(-1.74), 1u);
  EXPECT_EQ(ax.bin_of(1.5), 7u);
  EXPECT_FALSE(ax.bin_of(-2.26).has_value());
  EXPECT_FALSE(ax.bin_of(1.76).has_value());
}

TEST(SqueezeAxes, LogAxisFollowsGrid) {
  const auto& c = chirp_setup();
  const auto ax = log_frequency_axis(c.grid);
  ASSERT_EQ(ax.size(), c.grid.freqs.size());
  for (std::size_t k = 0; k < ax.size(); ++k) EXPECT_EQ(ax.bin_of(c.grid.freqs[k]), k);
}

TEST(Squeeze, ConservesNonnegativeMass) {
  const auto& c = chirp_setup();
  const auto mag = magnitude(c.wf.wct);
  const auto sq = synchrosqueeze(mag, c.wf.fields, c.freq, c.rate);
  EXPECT_LT(relative_gap(binned_mass(sq), sq.source_mass), 1e-10);
  EXPECT_GT(sq.binned_cells, 0u);
  EXPECT_EQ(sq.binned_cells + sq.dropped_cells, c.wf.fields.valid_count());

  const auto xw = compute_xwct(mag, c.grid);
  const auto sx = synchrosqueeze(xw.values, c.wf.fields, c.freq, c.rate);
  EXPECT_LT(relative_gap(binned_mass(sx), sx.source_mass), 1e-10);
}

TEST(Squeeze, ComplexSqueezeIsBoundedBySourceMass) {
  const auto& c = chirp_setup();
  const auto sq = synchrosqueeze(c.wf.wct, c.wf.fields, c.freq, c.rate);
  EXPECT_LE(binned_mass(sq), sq.source_mass * (1.0 + 1e-12));
  const auto mag_only = synchrosqueeze_magnitude(c.wf.wct, c.wf.fields, c.freq, c.rate);
  for (std::size_t n = 0; n < sq.values.size(); n += 31)
    EXPECT_NEAR(mag_only.values.flat()[n], std::abs(sq.values.flat()[n]), 1e-12);
}

TEST(Squeeze, ZeroSourceGivesZero) {
  const auto& c = chirp_setup();
  Cube3<double> zero(c.grid.n_scales(), c.grid.n, c.grid.n_rates());
  const auto sq = synchrosqueeze(zero, c.wf.fields, c.freq, c.rate);
  EXPECT_EQ(max_abs(sq.values), 0.0);
  EXPECT_EQ(sq.source_mass, 0.0);
}

TEST(Squeeze, ConcentratesOnLinearChirp) {
  const auto& c = chirp_setup();
  const auto sq = synchrosqueeze(magnitude(c.wf.wct), c.wf.fields, c.freq, c.rate);
  const std::size_t n = c.grid.n;
  // central half: at 10-20 Hz the window spans about a second, so earlier times see the record edges
  double near = 0.0, all = 0.0;
  for (std::size_t m = n / 4; m <= 3 * n / 4; ++m) {
    const double f = c.x.truth[0].if_hz[m];
    for (std::size_t k = 0; k < c.freq.size(); ++k)
      for (std::size_t p = 0; p < c.rate.size(); ++p) {
        const double v = sq.values(k, m, p);
        all += v;
        if (std::abs(c.freq.centers[k] - f) <= 0.125 && std::abs(c.rate.centers[p] - 4.0) <= 0.25) near += v;
      }
  }
  EXPECT_GE(near / all, 0.9);
}

TEST(Squeeze, SingleIterationIsPlainSqueeze) {
  const auto& c = chirp_setup();
  const auto mag = magnitude(c.wf.wct);
  const auto a = multi_squeeze(mag, c.wf.fields, 1, c.freq, c.rate);
  const auto b = synchrosqueeze(mag, c.wf.fields, c.freq, c.rate);
  ASSERT_TRUE(a.values.same_shape(b.values));
  for (std::size_t n = 0; n < a.values.size(); ++n) ASSERT_EQ(a.values.flat()[n], b.values.flat()[n]);
}

TEST(Squeeze, CompositionKeepsLinearChirpInPlace) {
  const auto& c = chirp_setup();
  const auto& base = c.wf.fields;
  const auto composed = compose_fields(base, 3);
  const std::size_t n = c.grid.n;
  std::size_t kept = 0, drifted = 0;
  for (std::size_t s = 0; s < c.grid.n_scales(); ++s)
    for (std::size_t l = 0; l < c.grid.n_rates(); ++l)
      for (std::size_t m = n / 8; m <= 7 * n / 8; ++m) {
        if (!composed.valid(s, m, l)) continue;
        const bool near = std::abs(composed.if_field(s, m, l) - c.x.truth[0].if_hz[m]) <= 0.125 &&
                          std::abs(composed.cr_field(s, m, l) - 4.0) <= 0.25;
        ++(near ? kept : drifted);
      }
  ASSERT_GT(kept, 0u);
  EXPECT_GE(static_cast<double>(kept) / static_cast<double>(kept + drifted), 0.95);
}

TEST(Squeeze, CompositionNeverUnmasks) {
  const auto& c = chirp_setup();
  const auto composed = compose_fields(c.wf.fields, 2);
  for (std::size_t n = 0; n < composed.mask.size(); ++n)
    if (composed.mask.flat()[n]) ASSERT_TRUE(c.wf.fields.mask.flat()[n]);
  EXPECT_THROW(compose_fields(c.wf.fields, 0), ValidationError);
}

TEST(Squeeze, ShapeMismatchThrows) {
  const auto& c = chirp_setup();
  Cube3<double> wrong(c.grid.n_scales(), c.grid.n, c.grid.n_rates() + 1);
  EXPECT_THROW(synchrosqueeze(wrong, c.wf.fields, c.freq, c.rate), ValidationError);
}
