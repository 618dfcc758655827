#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "xwct/reassign.hpp"

using namespace xwct;

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

struct Deviation {
  double if_med;
  double cr_med;
  std::size_t cells;
};

Deviation deviation_from_truth(const ReferenceFields& f, const SampledSignal& x) {
  std::vector<double> di, dc;
  const std::size_t n = f.grid.n;
  for (std::size_t s = 0; s < f.grid.n_scales(); ++s)
    for (std::size_t l = 0; l < f.grid.n_rates(); ++l)
      for (std::size_t m = n / 8; m <= 7 * n / 8; ++m) {
        if (!f.valid(s, m, l)) continue;
        di.push_back(std::abs(f.if_field(s, m, l) - x.truth[0].if_hz[m]));
        dc.push_back(std::abs(f.cr_field(s, m, l) - x.truth[0].cr_hz_per_s[m]));
      }
  return {median(di), median(dc), di.size()};
}

double max_relative_gap(const ReferenceFields& a, const ReferenceFields& b, std::size_t* joint) {
  double worst = 0.0;
  *joint = 0;
  for (std::size_t n = 0; n < a.mask.size(); ++n) {
    if (!a.mask.flat()[n] || !b.mask.flat()[n]) continue;
    ++*joint;
    const double ia = a.if_field.flat()[n], ib = b.if_field.flat()[n];
    const double ca = a.cr_field.flat()[n], cb = b.cr_field.flat()[n];
    worst = std::max(worst, std::abs(ia - ib) / std::max(std::abs(ib), 1.0));
    worst = std::max(worst, std::abs(ca - cb) / std::max(std::abs(cb), 1.0));
  }
  return worst;
}

SampledSignal chirp(std::array<double, 4> c, std::size_t n, double dt, double amp = 1.0) {
  const ComponentSpec spec{amp, PolynomialPhase{c}};
  return synthesize(std::span(&spec, 1), n, dt);
}

}  // namespace

TEST(Reassign, DerivativeCubeIdentities) {
  const auto x = example_signal(3);
  const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 8.0, 16.0, 4.0);
  for (double sigma : {1.0, 2.5}) {
    const auto st = compute_moment_cubes(x, sigma, g);
    const auto d = derivative_cubes(st);
    const double s2 = sigma * sigma;
    for (std::size_t n = 0; n < st.cubes[0].size(); n += 7) {
      const Complex u0 = st.cubes[0].flat()[n], u2 = st.cubes[2].flat()[n];
      EXPECT_LE(std::abs(d.bg1.flat()[n] + u2 / s2), 1e-15 * (1.0 + std::abs(u2)));
      EXPECT_LE(std::abs(d.g2.flat()[n] - (-u0 / s2 + u2 / (s2 * s2))), 1e-14 * (1.0 + std::abs(u2)));
    }
  }
  SampledSignal zero;
  zero.dt = x.dt;
  zero.samples.assign(x.size(), Complex{});
  const auto dz = derivative_cubes(compute_moment_cubes(zero, 2.0, g));
  EXPECT_EQ(max_abs(dz.g1) + max_abs(dz.g2) + max_abs(dz.bg1) + max_abs(dz.b2g1), 0.0);
}

TEST(Reassign, SecondOrderExactOnLinearChirp) {
  const auto x = chirp({0.0, 10.0, 2.0, 0.0}, 1024, 1.0 / 128.0);
  const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 32.0, 8.0, 0.25).restricted_to_band(6.0, 60.0);
  const auto r = compute_wct_with_fields(x, 4.0, g, 2);
  const auto dev = deviation_from_truth(r.fields, x);
  EXPECT_GT(dev.cells, 1000u);
  EXPECT_LE(dev.if_med, 0.5 * g.min_freq_step());
  EXPECT_LE(dev.cr_med, 0.5 * g.delta_lambda);
}

TEST(Reassign, ThirdOrderExactOnQuadraticChirp) {
  const auto x = chirp({0.0, 30.0, 2.0, 0.5}, 512, 1.0 / 256.0);
  const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 32.0, 20.0, 0.25).restricted_to_band(20.0, 60.0);
  const auto r = compute_wct_with_fields(x, 4.0, g, 3);
  const auto dev = deviation_from_truth(r.fields, x);
  EXPECT_GT(dev.cells, 1000u);
  EXPECT_LE(dev.if_med, 0.5 * g.min_freq_step());
  EXPECT_LE(dev.cr_med, 0.5 * g.delta_lambda);
}

TEST(Reassign, ThirdOrderExactOnLinearChirp) {
  const auto x = chirp({0.0, 10.0, 2.0, 0.0}, 1024, 1.0 / 128.0);
  const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 32.0, 8.0, 0.5).restricted_to_band(6.0, 60.0);
  const auto r = compute_wct_with_fields(x, 4.0, g, 3);
  const auto dev = deviation_from_truth(r.fields, x);
  EXPECT_LE(dev.if_med, 0.5 * g.min_freq_step());
  EXPECT_LE(dev.cr_med, 0.5 * g.delta_lambda);
}

TEST(Reassign, PureToneHasZeroChirprate) {
  const auto x = chirp({0.0, 32.0, 0.0, 0.0}, 512, 1.0 / 128.0);
  const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 32.0, 8.0, 0.5).restricted_to_band(16.0, 60.0);
  const auto r = compute_wct_with_fields(x, 3.0, g, 2);
  const auto dev = deviation_from_truth(r.fields, x);
  EXPECT_LE(dev.cr_med, 1e-6);
  EXPECT_LE(dev.if_med, 1e-6);
}

TEST(Reassign, GeneralMatchesSimplifiedOnExamples) {
  for (int id : {1, 2}) {
    const auto x = example_signal(id);
    const double r0 = id == 1 ? 8.0 : 24.0;
    const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 16.0, r0, 1.0).restricted_to_band(6.0, 100.0);
    const auto st = compute_moment_cubes(x, id == 1 ? 6.32 : 4.21, g);
    for (int order : {2, 3}) {
      const auto simple = reference_fields(st, order, FieldMode::simplified);
      const auto general = reference_fields(st, order, FieldMode::general);
      std::size_t joint = 0;
      const double gap = max_relative_gap(general, simple, &joint);
      EXPECT_GT(joint, 1000u);
      EXPECT_LE(gap, 1e-9) << "example " << id << " order " << order;
    }
  }
}

TEST(Reassign, MaterializedAndStreamingAgree) {
  const auto x = example_signal(3);
  const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 16.0, 32.0, 2.0).restricted_to_band(15.0, 70.0);
  const auto st = compute_moment_cubes(x, 5.02, g);
  const auto a = third_order_fields(st, FieldMode::simplified);
  const auto b = compute_wct_with_fields(x, 5.02, g, 3);
  for (std::size_t n = 0; n < a.mask.size(); ++n) {
    ASSERT_EQ(a.mask.flat()[n], b.fields.mask.flat()[n]);
    ASSERT_EQ(a.if_field.flat()[n], b.fields.if_field.flat()[n]);
    ASSERT_EQ(st.cubes[0].flat()[n], b.wct.flat()[n]);
  }
}

TEST(Reassign, PhaseAndAmplitudeInvariance) {
  const auto x = example_signal(2);
  SampledSignal y = x;
  const Complex c = 3.5 * std::polar(1.0, 0.9);
  for (auto& v : y.samples) v *= c;
  const auto g = build_grid(x.size(), x.dt, 1.0, 1.0 / 16.0, 24.0, 1.0).restricted_to_band(10.0, 90.0);
  for (int order : {2, 3}) {
    const auto a = compute_wct_with_fields(x, 4.21, g, order).fields;
    const auto b = compute_wct_with_fields(y, 4.21, g, order).fields;
    std::size_t joint = 0, differing = 0;
    for (std::size_t n = 0; n < a.mask.size(); ++n) differing += a.mask.flat()[n] != b.mask.flat()[n];
    EXPECT_LE(differing, a.mask.size() / 10000);
    EXPECT_LE(max_relative_gap(a, b, &joint), 1e-9);
  }
}
