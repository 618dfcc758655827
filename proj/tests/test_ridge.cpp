#include <gtest/gtest.h>

#include <cmath>

#include "xwct/ridge.hpp"
#include "xwct/xray.hpp"

using namespace xwct;

namespace {

constexpr double kDt = 1.0 / 64.0;

struct Synthetic {
  Cube3<double> cube;
  FrequencyAxis freq = uniform_frequency_axis(0.0, 50.0, 0.125);
  RateAxis rate = make_rate_axis(8.0, 0.5);
};

// Linear tracks f = f0 + r t in bins, with optional dimming near their crossing and junk cells there.
Synthetic crossing_tracks(bool dim) {
  Synthetic s;
  const std::size_t n = 256;
  s.cube = Cube3<double>(s.freq.size(), n, s.rate.size());
  for (std::size_t m = 0; m < n; ++m) {
    const double t = static_cast<double>(m) * kDt;
    const double weak = dim && std::abs(t - 2.0) < 0.25 ? 0.01 : 1.0;
    s.cube(*s.freq.bin_of(30.0 - 4.0 * t), m, *s.rate.bin_of(-4.0)) += weak;
    s.cube(*s.freq.bin_of(14.0 + 4.0 * t), m, *s.rate.bin_of(4.0)) += 0.9 * weak;
    if (dim && std::abs(t - 2.0) < 0.25 && m % 3 == 0) s.cube(*s.freq.bin_of(22.0), m, *s.rate.bin_of(0.0)) = 0.05;
  }
  return s;
}

double if_rmse(const Ridge& r, double f0, double rate) {
  double acc = 0.0;
  for (std::size_t m = 0; m < r.if_hz.size(); ++m) {
    const double d = r.if_hz[m] - (f0 + rate * static_cast<double>(m) * kDt);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(r.if_hz.size()));
}

}  // namespace

TEST(Ridge, FollowsSingleTrack) {
  Synthetic s;
  const std::size_t n = 128;
  s.cube = Cube3<double>(s.freq.size(), n, s.rate.size());
  std::vector<std::size_t> k_true(n), p_true(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double t = static_cast<double>(m) * kDt;
    k_true[m] = *s.freq.bin_of(20.0 + 2.0 * t);
    p_true[m] = *s.rate.bin_of(2.0);
    s.cube(k_true[m], m, p_true[m]) = 1.0 + 0.1 * std::sin(static_cast<double>(m));
  }
  RidgeSettings rs;
  rs.k = 1;
  const auto set = extract_ridges(s.cube, s.freq, s.rate, kDt, rs);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.ridges[0].freq_idx, k_true);
  EXPECT_EQ(set.ridges[0].cr_idx, p_true);
  EXPECT_DOUBLE_EQ(set.ridges[0].cr[5], 2.0);
}

TEST(Ridge, MarksDuplicateWhenCubeRunsOut) {
  Synthetic s;
  s.cube = Cube3<double>(s.freq.size(), 32, s.rate.size());
  for (std::size_t m = 0; m < 32; ++m) s.cube(100, m, 10) = 1.0;
  const auto set = extract_ridges(s.cube, s.freq, s.rate, kDt);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_TRUE(set.duplicated);
  EXPECT_EQ(set.ridges[0].freq_idx, set.ridges[1].freq_idx);
}

TEST(Ridge, CrossesThroughWeakRegion) {
  const auto s = crossing_tracks(true);
  const auto set = extract_ridges(s.cube, s.freq, s.rate, kDt);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_FALSE(set.duplicated);
  // sorted by IF at N/8 (t = 0.5): the rising track is lower there
  EXPECT_LT(if_rmse(set.ridges[0], 14.0, 4.0), 0.1);
  EXPECT_LT(if_rmse(set.ridges[1], 30.0, -4.0), 0.1);
}

TEST(Ridge, GuardTubeKeepsRidgesApart) {
  const auto s = crossing_tracks(false);
  RidgeSettings rs;
  const auto set = extract_ridges(s.cube, s.freq, s.rate, kDt, rs);
  const auto& a = set.ridges[0];
  const auto& b = set.ridges[1];
  for (std::size_t m = 0; m < a.freq_idx.size(); ++m) {
    const bool same_f = (a.freq_idx[m] > b.freq_idx[m] ? a.freq_idx[m] - b.freq_idx[m] : b.freq_idx[m] - a.freq_idx[m]) <= rs.jump_f;
    const bool same_c = (a.cr_idx[m] > b.cr_idx[m] ? a.cr_idx[m] - b.cr_idx[m] : b.cr_idx[m] - a.cr_idx[m]) <= rs.jump_c;
    ASSERT_FALSE(same_f && same_c) << "m=" << m;
  }
}

TEST(Ridge, Deterministic) {
  const auto s = crossing_tracks(true);
  const auto a = extract_ridges(s.cube, s.freq, s.rate, kDt);
  const auto b = extract_ridges(s.cube, s.freq, s.rate, kDt);
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a.ridges[r].freq_idx, b.ridges[r].freq_idx);
    EXPECT_EQ(a.ridges[r].cr_idx, b.ridges[r].cr_idx);
  }
}

TEST(Ridge, SeparatesTwoTonesFromSqueezedXwct) {
  const std::array<ComponentSpec, 2> specs{ComponentSpec{1.0, PolynomialPhase{{0.0, 20.0, 0.0, 0.0}}},
                                           ComponentSpec{1.0, PolynomialPhase{{0.0, 50.0, 0.0, 0.0}}}};
  const auto x = synthesize(specs, 256, 1.0 / 128.0);
  const auto g = build_grid(256, x.dt, 1.0, 1.0 / 32.0, 4.0, 0.25).restricted_to_band(10.0, 60.0);
  const auto wf = compute_wct_with_fields(x, 2.0, g, 3);
  const auto sq = synchrosqueeze(compute_xwct(wf.wct, g).values, wf.fields, uniform_frequency_axis(10.0, 60.0, 0.125),
                                 make_rate_axis(4.0, 0.25));
  const auto set = extract_ridges(sq);
  ASSERT_EQ(set.size(), 2u);
  for (std::size_t m = 64; m < 192; ++m) {
    EXPECT_NEAR(set.ridges[0].if_hz[m], 20.0, 0.126);
    EXPECT_NEAR(set.ridges[1].if_hz[m], 50.0, 0.126);
    EXPECT_NEAR(set.ridges[0].cr[m], 0.0, 0.26);
  }
}

TEST(Ridge, RejectsBadInput) {
  Synthetic s;
  s.cube = Cube3<double>(s.freq.size(), 16, s.rate.size());
  EXPECT_THROW(extract_ridges(s.cube, s.freq, s.rate, kDt), ValidationError);
  s.cube(3, 3, 3) = 1.0;
  RidgeSettings none;
  none.k = 0;
  EXPECT_THROW(extract_ridges(s.cube, s.freq, s.rate, kDt, none), ValidationError);
  EXPECT_THROW(extract_ridges(s.cube, s.freq, s.rate, 0.0), ValidationError);
  Cube3<double> wrong(s.freq.size() + 1, 16, s.rate.size());
  wrong(0, 0, 0) = 1.0;
  EXPECT_THROW(extract_ridges(wrong, s.freq, s.rate, kDt), ValidationError);
}
