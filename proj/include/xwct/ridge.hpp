#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/error.hpp"
#include "xwct/squeeze.hpp"

namespace xwct {

struct RidgeSettings {
  std::size_t k = 2;
  std::size_t jump_f = 3;       // max frequency-bin change per sample
  std::size_t jump_c = 3;       // max rate-bin change per sample
  double penalty_factor = 0.002;  // smoothness penalty per squared bin, relative to max|cube|
};

struct Ridge {
  std::vector<std::size_t> freq_idx;
  std::vector<std::size_t> cr_idx;
  std::vector<double> if_hz;
  std::vector<double> cr;
};

struct RidgeSet {
  std::vector<Ridge> ridges;
  bool duplicated = false;  // fewer distinct ridges than requested

  std::size_t size() const { return ridges.size(); }
};

namespace detail {

/// Greedy extraction over a magnitude cube (k, m, p) with a forbidden mask.
///
/// Tracking keeps continuous estimates of frequency and chirprate. Each sample
/// the frequency advances by chirprate * dt and the chirprate by its slope over
/// the last kSlopeSpan samples. The chosen cell pulls both estimates with weight
/// v / (v + penalty), so weak cells, such as those near an IF crossing, leave
/// the track coasting along its current curve.
class RidgeTracker {
 public:
  static constexpr std::size_t kSlopeSpan = 16;

  RidgeTracker(const Cube3<double>& mag, const FrequencyAxis& freq, const RateAxis& rate, double dt,
               const RidgeSettings& rs)
      : mag_(mag), freq_(freq), rate_(rate), dt_(dt), rs_(rs),
        forbidden_(mag.n_outer(), mag.n_time(), mag.n_inner()) {
    penalty_ = rs.penalty_factor * max_abs(mag);
  }

  /// Extract one ridge; false when every allowed cell is zero.
  bool extract(std::vector<std::size_t>& fk, std::vector<std::size_t>& fp) {
    const std::size_t nk = mag_.n_outer(), n = mag_.n_time(), np = mag_.n_inner();
    double best = 0.0;
    std::size_t sk = 0, sm = 0, sp = 0;
    for (std::size_t k = 0; k < nk; ++k)
      for (std::size_t p = 0; p < np; ++p) {
        const auto row = mag_.row(k, p);
        for (std::size_t m = 0; m < n; ++m)
          if (row[m] > best && !forbidden_(k, m, p)) best = row[m], sk = k, sm = m, sp = p;
      }
    if (!(best > 0.0)) return false;
    fk.assign(n, 0);
    fp.assign(n, 0);
    fk[sm] = sk;
    fp[sm] = sp;
    grow(sm, +1, fk, fp);
    grow(sm, -1, fk, fp);
    for (std::size_t m = 0; m < n; ++m) claim(m, fk[m], fp[m]);
    return true;
  }

 private:
  std::size_t nearest_bin(double f) const {
    if (f <= freq_.edges.front()) return 0;
    if (f > freq_.edges.back()) return freq_.size() - 1;
    return *freq_.bin_of(f);
  }

  std::size_t nearest_rate(double c) const {
    const double p = std::round((c + rate_.r0) / rate_.step);
    return static_cast<std::size_t>(std::clamp(p, 0.0, static_cast<double>(rate_.size() - 1)));
  }

  void grow(std::size_t seed, int dir, std::vector<std::size_t>& fk, std::vector<std::size_t>& fp) const {
    const std::size_t n = mag_.n_time();
    double f_hat = freq_.centers[fk[seed]];
    std::vector<double> c_hist{rate_.centers[fp[seed]]};
    for (std::size_t m = seed;;) {
      if (dir > 0 ? m + 1 >= n : m == 0) break;
      m = dir > 0 ? m + 1 : m - 1;
      const std::size_t span = std::min(kSlopeSpan, c_hist.size() - 1);
      const double c_now = c_hist.back();
      const double c_step = span ? (c_now - c_hist[c_hist.size() - 1 - span]) / static_cast<double>(span) : 0.0;
      const double c_pred = c_now + c_step;
      const double f_pred = f_hat + dir * 0.5 * (c_now + c_pred) * dt_;
      step(m, f_pred, c_pred, fk[m], fp[m]);
      const double v = mag_(fk[m], m, fp[m]);
      const double pull = v + penalty_ > 0.0 ? v / (v + penalty_) : 0.0;
      f_hat = f_pred + pull * (freq_.centers[fk[m]] - f_pred);
      c_hist.push_back(c_pred + pull * (rate_.centers[fp[m]] - c_pred));
    }
  }

  // Best allowed cell around the predicted position at time m. The window
  // widens only when it is fully forbidden.
  void step(std::size_t m, double f_pred, double c_pred, std::size_t& k_out, std::size_t& p_out) const {
    const std::size_t nk = mag_.n_outer(), np = mag_.n_inner();
    const std::size_t k0 = nearest_bin(f_pred), p0 = nearest_rate(c_pred);
    for (std::size_t widen = 1;; widen *= 2) {
      const std::size_t jf = rs_.jump_f * widen, jc = rs_.jump_c * widen;
      const std::size_t k_lo = k0 > jf ? k0 - jf : 0, k_hi = std::min(nk - 1, k0 + jf);
      const std::size_t p_lo = p0 > jc ? p0 - jc : 0, p_hi = std::min(np - 1, p0 + jc);
      double best = -std::numeric_limits<double>::infinity();
      bool found = false;
      for (std::size_t k = k_lo; k <= k_hi; ++k) {
        const double dk = (freq_.centers[k] - f_pred) / (freq_.edges[k + 1] - freq_.edges[k]);
        for (std::size_t p = p_lo; p <= p_hi; ++p) {
          if (forbidden_(k, m, p)) continue;
          const double dp = (rate_.centers[p] - c_pred) / rate_.step;
          const double score = mag_(k, m, p) - penalty_ * (dk * dk + dp * dp);
          if (score > best) best = score, k_out = k, p_out = p, found = true;
        }
      }
      if (found) return;
      if (k_lo == 0 && p_lo == 0 && k_hi == nk - 1 && p_hi == np - 1) {
        k_out = k0, p_out = p0;  // whole slice forbidden
        return;
      }
    }
  }

  void claim(std::size_t m, std::size_t k0, std::size_t p0) {
    const std::size_t nk = mag_.n_outer(), np = mag_.n_inner();
    const std::size_t k_lo = k0 > rs_.jump_f ? k0 - rs_.jump_f : 0, k_hi = std::min(nk - 1, k0 + rs_.jump_f);
    const std::size_t p_lo = p0 > rs_.jump_c ? p0 - rs_.jump_c : 0, p_hi = std::min(np - 1, p0 + rs_.jump_c);
    for (std::size_t k = k_lo; k <= k_hi; ++k)
      for (std::size_t p = p_lo; p <= p_hi; ++p) forbidden_(k, m, p) = 1;
  }

  const Cube3<double>& mag_;
  const FrequencyAxis& freq_;
  const RateAxis& rate_;
  double dt_;
  RidgeSettings rs_;
  Cube3<std::uint8_t> forbidden_;
  double penalty_ = 0.0;
};

}  // namespace detail

/// Greedy 3D ridge extraction.
///
/// Each round seeds at the largest cell outside earlier guard tubes, then
/// grows forward and backward in time, choosing at each step the best
/// |cube| - penalty * (dk^2 + dp^2) within the jump window around the
/// chirprate-predicted frequency. The cells within
/// (jump_f, jump_c) bins of the new ridge become forbidden for later rounds.
/// Ridges are returned sorted by IF at time N/8.
inline RidgeSet extract_ridges(const Cube3<double>& magnitude, const FrequencyAxis& freq, const RateAxis& rate,
                               double dt, const RidgeSettings& rs = {}) {
  require(dt > 0.0, "time step must be positive");
  require(rs.k >= 1, "ridge count must be at least 1");
  require(magnitude.n_outer() == freq.size() && magnitude.n_inner() == rate.size(),
          "cube shape does not match its bin axes");
  require(max_abs(magnitude) > 0.0, "cannot extract ridges from an all-zero cube");
  detail::RidgeTracker tracker(magnitude, freq, rate, dt, rs);
  const std::size_t n = magnitude.n_time();
  RidgeSet out;
  for (std::size_t r = 0; r < rs.k; ++r) {
    Ridge ridge;
    if (!tracker.extract(ridge.freq_idx, ridge.cr_idx)) {
      out.duplicated = true;
      ridge = out.ridges.back();
    }
    out.ridges.push_back(std::move(ridge));
  }
  for (auto& ridge : out.ridges) {
    ridge.if_hz.resize(n);
    ridge.cr.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      ridge.if_hz[m] = freq.centers[ridge.freq_idx[m]];
      ridge.cr[m] = rate.centers[ridge.cr_idx[m]];
    }
  }
  const std::size_t m_ref = n / 8;
  std::stable_sort(out.ridges.begin(), out.ridges.end(), [&](const Ridge& a, const Ridge& b) {
    return a.if_hz[m_ref] < b.if_hz[m_ref] || (a.if_hz[m_ref] == b.if_hz[m_ref] && a.cr[m_ref] < b.cr[m_ref]);
  });
  return out;
}

template <typename T>
RidgeSet extract_ridges(const SqueezedCube<T>& cube, const RidgeSettings& rs = {}) {
  if constexpr (std::is_same_v<T, double>) {
    bool nonnegative = std::all_of(cube.values.flat().begin(), cube.values.flat().end(),
                                   [](double v) { return v >= 0.0; });
    if (nonnegative) return extract_ridges(cube.values, cube.freq, cube.rate, cube.dt, rs);
  }
  return extract_ridges(magnitude(cube.values), cube.freq, cube.rate, cube.dt, rs);
}

}  // namespace xwct
