#pragma once

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "xwct/entropy.hpp"
#include "xwct/error.hpp"
#include "xwct/grid.hpp"
#include "xwct/reassign.hpp"
#include "xwct/retrieve.hpp"
#include "xwct/ridge.hpp"
#include "xwct/signal.hpp"
#include "xwct/squeeze.hpp"
#include "xwct/wct.hpp"
#include "xwct/xray.hpp"

namespace xwct {

enum class Method { swct2, swct3, sxwct3, mswct3 };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::swct2: return "swct2";
    case Method::swct3: return "swct3";
    case Method::sxwct3: return "sxwct3";
    case Method::mswct3: return "mswct3";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::swct2, Method::swct3, Method::sxwct3, Method::mswct3})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown method '" + s + "' (expected swct2, swct3, sxwct3 or mswct3)");
}

inline std::string to_string(RetrievalMethod r) { return r == RetrievalMethod::group ? "group" : "simple"; }

inline RetrievalMethod parse_retrieval(const std::string& s) {
  if (s == "group") return RetrievalMethod::group;
  if (s == "simple") return RetrievalMethod::simple;
  throw ValidationError("unknown retrieval '" + s + "' (expected simple or group)");
}

struct AnalysisConfig {
  std::optional<double> sigma;  // empty: entropy search
  SigmaSearch sigma_search;
  double mu = 1.0;
  double delta_a_tilde = 1.0 / 32.0;
  double r0 = 8.0;
  double delta_lambda = 0.125;
  std::optional<double> delta_gamma;  // empty: equal to delta_lambda
  double band_lo = 0.0;               // 0: lowest grid frequency
  double band_hi = 0.0;               // 0: highest grid frequency
  double delta_xi = 0.125;            // squeeze frequency step; 0 selects the log-spaced grid frequencies
  XraySettings xray;
  Method method = Method::sxwct3;
  int iters = 5;
  RidgeSettings ridge;
  RetrievalMethod retrieval = RetrievalMethod::group;

  double rate_step() const { return delta_gamma.value_or(delta_lambda); }
  int order() const { return method == Method::swct2 ? 2 : 3; }

  void validate() const {
    require(!sigma || *sigma > 0.0, "sigma must be positive");
    require(mu > 0.0, "mu must be positive");
    require(delta_a_tilde > 0.0, "log-scale step must be positive");
    require(r0 > 0.0 && delta_lambda > 0.0 && delta_lambda < 2.0 * r0, "need R0 > 0 and 0 < dlam < 2 R0");
    require(rate_step() > 0.0 && rate_step() < 2.0 * r0, "need 0 < dgam < 2 R0");
    require(band_lo >= 0.0 && band_hi >= 0.0 && (band_hi == 0.0 || band_hi > band_lo), "band needs lo < hi");
    require(delta_xi >= 0.0, "squeeze frequency step must be nonnegative");
    require(iters >= 1, "iteration count must be at least 1");
    require(ridge.k >= 1, "ridge count must be at least 1");
    require(ridge.penalty_factor >= 0.0, "penalty must be nonnegative");
  }
};

/// Grid, band and window presets for the three built-in crossover examples.
inline AnalysisConfig example_config(int id) {
  AnalysisConfig c;
  switch (id) {
    case 1:
      c.sigma = 6.32, c.r0 = 8.0, c.delta_lambda = 0.125, c.band_lo = 6.0, c.band_hi = 48.0;
      break;
    case 2:
      c.sigma = 4.21, c.r0 = 36.0, c.delta_lambda = 0.25, c.band_lo = 8.0, c.band_hi = 72.0;
      break;
    case 3:
      c.sigma = 5.02, c.r0 = 32.0, c.delta_lambda = 0.25, c.band_lo = 18.0, c.band_hi = 72.0;
      break;
    default:
      throw ValidationError("unknown example id " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
  return c;
}

struct Analysis {
  AnalysisGrid grid;
  double sigma = 0.0;
  std::optional<EntropyCurve> entropy;
  WctWithFields wf;
  std::optional<Cube3<double>> xwct;
  SqueezedCube<double> squeezed;
};

inline AnalysisGrid analysis_grid(const SampledSignal& x, const AnalysisConfig& cfg) {
  auto g = build_grid(x.size(), x.dt, cfg.mu, cfg.delta_a_tilde, cfg.r0, cfg.delta_lambda);
  if (cfg.band_lo > 0.0 || cfg.band_hi > 0.0)
    g = g.restricted_to_band(cfg.band_lo > 0.0 ? cfg.band_lo : g.freqs.front(),
                             cfg.band_hi > 0.0 ? cfg.band_hi : g.freqs.back());
  return g;
}

inline FrequencyAxis squeeze_axis(const AnalysisGrid& g, const AnalysisConfig& cfg) {
  if (cfg.delta_xi == 0.0) return log_frequency_axis(g);
  const double lo = cfg.band_lo > 0.0 ? cfg.band_lo : g.freqs.front();
  const double hi = cfg.band_hi > 0.0 ? cfg.band_hi : g.freqs.back();
  return uniform_frequency_axis(lo, hi, cfg.delta_xi);
}

/// Window selection, transform, reference fields and the squeeze for the configured method.
inline Analysis analyze(const SampledSignal& x, const AnalysisConfig& cfg) {
  cfg.validate();
  require(x.size() >= 4, "signal needs at least 4 samples");
  Analysis a;
  a.grid = analysis_grid(x, cfg);
  if (cfg.sigma) {
    a.sigma = *cfg.sigma;
  } else {
    a.entropy = select_sigma(x, a.grid, cfg.sigma_search);
    a.sigma = a.entropy->argmin;
  }
  a.wf = compute_wct_with_fields(x, a.sigma, a.grid, cfg.order());
  const auto freq = squeeze_axis(a.grid, cfg);
  const auto rate = make_rate_axis(cfg.r0, cfg.rate_step());
  switch (cfg.method) {
    case Method::swct2:
    case Method::swct3:
      a.squeezed = synchrosqueeze_magnitude(a.wf.wct, a.wf.fields, freq, rate);
      break;
    case Method::sxwct3:
      a.xwct = compute_xwct(a.wf.wct, a.grid, cfg.xray).values;
      a.squeezed = synchrosqueeze(*a.xwct, a.wf.fields, freq, rate);
      break;
    case Method::mswct3:
      a.squeezed = synchrosqueeze_magnitude(a.wf.wct, compose_fields(a.wf.fields, cfg.iters), freq, rate);
      a.squeezed.source = "multi" + std::to_string(cfg.iters) + "_order3";
      break;
  }
  return a;
}

inline RidgeSet track_ridges(const Analysis& a, const AnalysisConfig& cfg) {
  return extract_ridges(a.squeezed, cfg.ridge);
}

inline ModeEstimate retrieve_modes(const SampledSignal& x, double sigma, const AnalysisGrid& grid, const RidgeSet& ridges,
                                   const AnalysisConfig& cfg) {
  require(!ridges.ridges.empty() && ridges.ridges.front().if_hz.size() == x.size(),
          "ridges must cover every sample of the signal");
  const WctEvaluator ev(x, sigma, cfg.mu, grid);
  return retrieve(ev, ridges, cfg.retrieval);
}

struct ComponentScore {
  std::size_t truth_index = 0;
  double if_rmse = 0.0;
  double cr_rmse = 0.0;
  double mode_rmse = 0.0;
};

/// Trimmed RMSEs against the truth, estimates paired with components by IF.
inline std::vector<ComponentScore> score(const std::vector<ComponentTruth>& truth, const RidgeSet& ridges,
                                         const ModeEstimate& modes) {
  const auto est = estimate_if_cr(ridges);
  const auto pair = match_components(est, truth);
  std::vector<ComponentScore> out;
  for (std::size_t l = 0; l < pair.size(); ++l) {
    const auto& t = truth[pair[l]];
    out.push_back({pair[l], rmse_trimmed(t.if_hz, est.if_hz[l]), rmse_trimmed(t.cr_hz_per_s, est.cr[l]),
                   rmse_trimmed(t.samples, modes.modes[l])});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.truth_index < b.truth_index; });
  return out;
}

inline nlohmann::ordered_json to_json(const AnalysisConfig& c) {
  nlohmann::ordered_json j;
  j["sigma"] = c.sigma ? nlohmann::ordered_json(*c.sigma) : nlohmann::ordered_json("auto");
  if (!c.sigma)
    j["sigma_search"] = {{"lo", c.sigma_search.lo},
                         {"hi", c.sigma_search.hi},
                         {"coarse_step", c.sigma_search.coarse_step},
                         {"fine_step", c.sigma_search.fine_step},
                         {"renyi_order", c.sigma_search.ell}};
  j["mu"] = c.mu;
  j["delta_a_tilde"] = c.delta_a_tilde;
  j["r0"] = c.r0;
  j["delta_lambda"] = c.delta_lambda;
  j["delta_gamma"] = c.rate_step();
  j["band"] = {c.band_lo, c.band_hi};
  j["delta_xi"] = c.delta_xi;
  j["xray"] = {{"gamma", c.xray.gamma}, {"v_halfwidth", c.xray.v_halfwidth}};
  j["method"] = to_string(c.method);
  j["iters"] = c.iters;
  j["ridge"] = {{"k", c.ridge.k},
                {"jump_f", c.ridge.jump_f},
                {"jump_c", c.ridge.jump_c},
                {"penalty", c.ridge.penalty_factor}};
  j["retrieval"] = to_string(c.retrieval);
  return j;
}

inline nlohmann::ordered_json to_json(const Analysis& a) {
  nlohmann::ordered_json j;
  j["sigma"] = a.sigma;
  if (a.entropy) {
    j["entropy_sigma"] = a.entropy->sigmas;
    j["entropy"] = a.entropy->entropies;
    j["entropy_at_boundary"] = a.entropy->at_boundary;
  }
  j["grid"] = {{"n", a.grid.n},
               {"dt", a.grid.dt},
               {"scales", a.grid.n_scales()},
               {"j_first", a.grid.j_first},
               {"j_last", a.grid.j_last},
               {"f_min", a.grid.freqs.front()},
               {"f_max", a.grid.freqs.back()},
               {"rates", a.grid.n_rates()}};
  j["squeeze"] = {{"source", a.squeezed.source},
                  {"freq_bins", a.squeezed.freq.size()},
                  {"rate_bins", a.squeezed.rate.size()},
                  {"valid_cells", a.wf.fields.valid_count()},
                  {"binned_cells", a.squeezed.binned_cells},
                  {"dropped_cells", a.squeezed.dropped_cells},
                  {"source_mass", a.squeezed.source_mass},
                  {"binned_mass", binned_mass(a.squeezed)}};
  return j;
}

inline nlohmann::ordered_json to_json(const std::vector<ComponentScore>& scores) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& s : scores)
    j.push_back({{"component", s.truth_index + 1},
                 {"if_rmse", s.if_rmse},
                 {"cr_rmse", s.cr_rmse},
                 {"mode_rmse", s.mode_rmse}});
  return j;
}

}  // namespace xwct
