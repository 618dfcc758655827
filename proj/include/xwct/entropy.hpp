#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "xwct/error.hpp"
#include "xwct/grid.hpp"
#include "xwct/wct.hpp"

namespace xwct {

inline constexpr double kDefaultRenyiOrder = 2.5;

/// Running sums for E = (log2 sum w|U|^{2l} - l log2 sum w|U|^2) / (1 - l).
class RenyiAccumulator {
 public:
  explicit RenyiAccumulator(double ell = kDefaultRenyiOrder) : ell_(ell) {
    require(ell > 1.0, "Renyi order must exceed 1");
  }

  void add(double magnitude, double weight) { add_energy(magnitude * magnitude, weight); }

  /// p = |U|^2.
  void add_energy(double p, double weight) {
    const double high = ell_ == 2.5 ? p * p * std::sqrt(p) : std::pow(p, ell_);
    high_ += weight * high;
    energy_ += weight * p;
  }

  double value() const {
    require(energy_ > 0.0, "entropy is undefined for an all-zero transform");
    return (std::log2(high_) - ell_ * std::log2(energy_)) / (1.0 - ell_);
  }

 private:
  double ell_;
  double high_ = 0.0;
  double energy_ = 0.0;
};

/// Entropy of cells with explicit weights.
inline double renyi_entropy(std::span<const double> magnitudes, std::span<const double> weights,
                            double ell = kDefaultRenyiOrder) {
  require(magnitudes.size() == weights.size(), "magnitude and weight counts differ");
  RenyiAccumulator acc(ell);
  for (std::size_t n = 0; n < magnitudes.size(); ++n) acc.add(magnitudes[n], weights[n]);
  return acc.value();
}

/// Entropy of U^g on its grid with cell measure a^-1 (Delta a) dt dlam.
inline double renyi_entropy(const Cube3<Complex>& cube, const AnalysisGrid& grid, double ell = kDefaultRenyiOrder) {
  require(cube.n_outer() == grid.n_scales() && cube.n_time() == grid.n && cube.n_inner() == grid.n_rates(),
          "cube shape does not match grid");
  RenyiAccumulator acc(ell);
  for (std::size_t s = 0; s < grid.n_scales(); ++s) {
    const double w = grid.squeeze_weight(s) * grid.dt;
    for (std::size_t l = 0; l < grid.n_rates(); ++l)
      for (const auto& v : cube.row(s, l)) acc.add_energy(std::norm(v), w);
  }
  return acc.value();
}

inline double renyi_entropy(const MomentCubeStack& stack, double ell = kDefaultRenyiOrder) {
  return renyi_entropy(stack.cubes[0], stack.grid, ell);
}

/// Entropy of U^g for one window width without storing the cube.
inline double entropy_for_sigma(const SampledSignal& x, double sigma, const AnalysisGrid& grid,
                                double ell = kDefaultRenyiOrder) {
  MomentRowEngine engine(x, sigma, grid);
  RenyiAccumulator acc(ell);
  std::vector<Complex> row(grid.n);
  std::array<std::span<Complex>, 1> rows{std::span<Complex>(row)};
  for (std::size_t s = 0; s < grid.n_scales(); ++s) {
    const double w = grid.squeeze_weight(s) * grid.dt;
    for (std::size_t l = 0; l < grid.n_rates(); ++l) {
      engine.compute(s, l, 1, rows);
      for (const auto& v : row) acc.add_energy(std::norm(v), w);
    }
  }
  return acc.value();
}

struct EntropyCurve {
  std::vector<double> sigmas;
  std::vector<double> entropies;
  double argmin = 0.0;
  bool at_boundary = false;
};

struct SigmaSearch {
  double lo = 0.5;
  double hi = 12.0;
  double coarse_step = 0.5;
  double fine_step = 0.05;
  double fine_halfwidth = 0.5;
  double ell = kDefaultRenyiOrder;
};

/// Coarse sweep followed by a local refinement around the coarse minimum.
inline EntropyCurve select_sigma(const SampledSignal& x, const AnalysisGrid& grid, const SigmaSearch& opt = {}) {
  require(opt.lo > 0.0 && opt.hi > opt.lo, "sigma range must satisfy 0 < lo < hi");
  require(opt.coarse_step > 0.0 && opt.fine_step > 0.0, "sigma steps must be positive");
  std::map<long long, std::pair<double, double>> curve;  // keyed on sigma in 1e-9 units
  auto eval = [&](double sigma) {
    const auto key = std::llround(sigma * 1e9);
    auto it = curve.find(key);
    if (it == curve.end()) it = curve.emplace(key, std::pair{sigma, entropy_for_sigma(x, sigma, grid, opt.ell)}).first;
    return it->second.second;
  };
  auto grid_points = [](double a, double b, double step) {
    std::vector<double> pts;
    const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) pts.push_back(a + static_cast<double>(i) * step);
    return pts;
  };

  const auto coarse = grid_points(opt.lo, opt.hi, opt.coarse_step);
  double best_sigma = coarse.front();
  double best = eval(best_sigma);
  for (double s : coarse)
    if (const double e = eval(s); e < best) best = e, best_sigma = s;

  EntropyCurve out;
  out.at_boundary = best_sigma == coarse.front() || best_sigma == coarse.back();
  if (!out.at_boundary) {
    const double a = std::max(opt.lo, best_sigma - opt.fine_halfwidth);
    const double b = std::min(opt.hi, best_sigma + opt.fine_halfwidth);
    for (double s : grid_points(a, b, opt.fine_step))
      if (const double e = eval(s); e < best) best = e, best_sigma = s;
  }
  for (const auto& [key, v] : curve) {
    out.sigmas.push_back(v.first);
    out.entropies.push_back(v.second);
  }
  out.argmin = best_sigma;
  return out;
}

}  // namespace xwct
