#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/error.hpp"
#include "xwct/grid.hpp"
#include "xwct/ridge.hpp"
#include "xwct/signal.hpp"
#include "xwct/wct.hpp"
#include "xwct/window.hpp"

namespace xwct {

struct IfCrEstimate {
  std::vector<std::vector<double>> if_hz;  // per component
  std::vector<std::vector<double>> cr;
};

/// IF = mu / a_check is the ridge's frequency-bin center; CR is its rate-bin center.
inline IfCrEstimate estimate_if_cr(const RidgeSet& ridges) {
  IfCrEstimate out;
  for (const auto& r : ridges.ridges) {
    out.if_hz.push_back(r.if_hz);
    out.cr.push_back(r.cr);
  }
  return out;
}

enum class RetrievalMethod { simple, group };

struct ModeEstimate {
  std::vector<std::vector<Complex>> modes;  // per component, length N
  RetrievalMethod method = RetrievalMethod::simple;
  std::size_t pseudo_inverse_samples = 0;  // times where C was ill-conditioned
};

/// x_l(b) = U^g(mu / IF_l(b), b, CR_l(b)), evaluated at the continuous scale.
inline ModeEstimate retrieve_simple(const WctEvaluator& wct, const RidgeSet& ridges) {
  ModeEstimate out;
  for (const auto& r : ridges.ridges) {
    std::vector<Complex> mode(r.if_hz.size());
    for (std::size_t m = 0; m < mode.size(); ++m) mode[m] = wct(wct.mu() / r.if_hz[m], m, r.cr[m]);
    out.modes.push_back(std::move(mode));
  }
  return out;
}

/// Same rule read from a precomputed cube at the nearest grid scale and chirprate.
inline ModeEstimate retrieve_simple(const Cube3<Complex>& wct, const AnalysisGrid& grid, const RidgeSet& ridges) {
  ModeEstimate out;
  for (const auto& r : ridges.ridges) {
    std::vector<Complex> mode(r.if_hz.size());
    for (std::size_t m = 0; m < mode.size(); ++m) {
      const auto s = grid.nearest_scale(grid.mu / r.if_hz[m]);
      const auto l = grid.nearest_rate(r.cr[m]);
      mode[m] = (s && l) ? wct(*s, m, *l) : Complex{};
    }
    out.modes.push_back(std::move(mode));
  }
  return out;
}

/// c_{l,k} = PFT_0(mu (1 - a_l / a_k), a_l^2 (lam_l - lam_k)).
inline Eigen::MatrixXcd crosstalk_matrix(std::span<const double> scales, std::span<const double> rates, double sigma,
                                         double mu) {
  const auto k = static_cast<Eigen::Index>(scales.size());
  const GaussianWindow w(sigma);
  Eigen::MatrixXcd c(k, k);
  for (Eigen::Index l = 0; l < k; ++l)
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto al = scales[static_cast<std::size_t>(l)], aj = scales[static_cast<std::size_t>(j)];
      const auto ll = rates[static_cast<std::size_t>(l)], lj = rates[static_cast<std::size_t>(j)];
      c(l, j) = pft_moment(0, w, mu * (1.0 - al / aj), al * al * (ll - lj));
    }
  return c;
}

inline constexpr double kConditionLimit = 1e6;

/// Joint retrieval: solve C x = u at every time, u_l = U^g(a_l, b, lam_l).
/// C is inverted directly unless its condition number exceeds kConditionLimit,
/// in which case the SVD pseudo-inverse is applied.
inline ModeEstimate retrieve_group(const WctEvaluator& wct, const RidgeSet& ridges) {
  const std::size_t kk = ridges.size();
  require(kk >= 1, "group retrieval needs at least one ridge");
  const std::size_t n = ridges.ridges.front().if_hz.size();
  ModeEstimate out;
  out.method = RetrievalMethod::group;
  out.modes.assign(kk, std::vector<Complex>(n));
  std::vector<double> scales(kk), rates(kk);
  Eigen::VectorXcd u(static_cast<Eigen::Index>(kk));
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t l = 0; l < kk; ++l) {
      scales[l] = wct.mu() / ridges.ridges[l].if_hz[m];
      rates[l] = ridges.ridges[l].cr[m];
      u(static_cast<Eigen::Index>(l)) = wct(scales[l], m, rates[l]);
    }
    const auto c = crosstalk_matrix(scales, rates, wct.sigma(), wct.mu());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0), smin = sv(sv.size() - 1);
    Eigen::VectorXcd x;
    if (smin > 0.0 && smax / smin <= kConditionLimit) {
      x = c.partialPivLu().solve(u);
    } else {
      ++out.pseudo_inverse_samples;
      svd.setThreshold(1.0 / kConditionLimit);
      x = svd.solve(u);
    }
    for (std::size_t l = 0; l < kk; ++l) out.modes[l][m] = x(static_cast<Eigen::Index>(l));
  }
  return out;
}

inline ModeEstimate retrieve(const WctEvaluator& wct, const RidgeSet& ridges, RetrievalMethod method) {
  return method == RetrievalMethod::group ? retrieve_group(wct, ridges) : retrieve_simple(wct, ridges);
}

/// Index range [floor(n/8), floor(7n/8)] kept by the trimmed error metrics.
inline std::pair<std::size_t, std::size_t> trimmed_range(std::size_t n) { return {n / 8, 7 * n / 8}; }

/// sqrt(mean |f - g|^2) over the trimmed range.
template <typename T>
double rmse_trimmed(std::span<const T> truth, std::span<const T> estimate) {
  require(truth.size() == estimate.size(), "RMSE needs series of equal length");
  require(truth.size() >= 8, "RMSE needs at least 8 samples");
  const auto [lo, hi] = trimmed_range(truth.size());
  double acc = 0.0;
  for (std::size_t m = lo; m <= hi; ++m) acc += std::norm(truth[m] - estimate[m]);
  return std::sqrt(acc / static_cast<double>(hi - lo + 1));
}

template <typename T>
double rmse_trimmed(const std::vector<T>& truth, const std::vector<T>& estimate) {
  return rmse_trimmed(std::span<const T>(truth), std::span<const T>(estimate));
}

/// Pairing of estimated components to truth components minimizing total trimmed IF RMSE.
inline std::vector<std::size_t> match_components(const IfCrEstimate& est, const std::vector<ComponentTruth>& truth) {
  const std::size_t kk = std::min(est.if_hz.size(), truth.size());
  std::vector<std::size_t> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t l = 0; l < kk; ++l) cost += rmse_trimmed(truth[perm[l]].if_hz, est.if_hz[l]);
    if (cost < best_cost) best_cost = cost, best = perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.resize(kk);
  return best;  // estimate l pairs with truth best[l]
}

/// Cell of maximal |U| at time m within a frequency/chirprate box (testing utility).
inline std::optional<std::pair<std::size_t, std::size_t>> box_argmax(const Cube3<Complex>& wct, const AnalysisGrid& grid,
                                                                     std::size_t m, double f_lo, double f_hi,
                                                                     double cr_lo, double cr_hi) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  double best_v = -1.0;
  for (std::size_t s = 0; s < grid.n_scales(); ++s) {
    const double f = grid.mu / grid.scales[s];
    if (f < f_lo || f > f_hi) continue;
    for (std::size_t l = 0; l < grid.n_rates(); ++l) {
      const double c = grid.chirprates[l];
      if (c < cr_lo || c > cr_hi) continue;
      const double v = std::abs(wct(s, m, l));
      if (v > best_v) best_v = v, best = std::pair{s, l};
    }
  }
  return best;
}

}  // namespace xwct
