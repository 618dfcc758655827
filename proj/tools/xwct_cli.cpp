// Command-line front end: gen, analyze, ridges, retrieve, demo.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "xwct/xwct.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace xwct;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 failed for " + path.string());
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

// Files written by one command, hashed into manifest.json at the end.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }

  void write_manifest(const std::string& command, const ordered_json& parameters) const {
    auto names = names_;
    std::sort(names.begin(), names.end());
    ordered_json files = ordered_json::array();
    for (const auto& n : names)
      files.push_back({{"name", n}, {"bytes", fs::file_size(dir_ / n)}, {"sha256", sha256_file(dir_ / n)}});
    io::write_json(dir_ / "manifest.json", {{"command", command}, {"parameters", parameters}, {"files", files}});
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

// Flags mirroring AnalysisConfig; only flags given on the command line override the base config.
struct ConfigFlags {
  std::string sigma = "auto";
  double mu = 1.0, da = 1.0 / 32.0, r0 = 8.0, dlam = 0.125, dgam = 0.0;
  double band_lo = 0.0, band_hi = 0.0, dxi = 0.125;
  double xray_gamma = 0.25, xray_v = 1.0;
  std::string method = "sxwct3";
  int iters = 5;
  std::size_t k = 2, jump_f = 3, jump_c = 3;
  double penalty = 0.002;
  std::string retrieval = "group";
  std::vector<CLI::Option*> options;

  void attach(CLI::App* app) {
    auto add = [&](const char* name, auto& var, const char* help) { options.push_back(app->add_option(name, var, help)); };
    add("--sigma", sigma, "window width: auto or a positive value");
    add("--mu", mu, "wavelet center frequency");
    add("--da", da, "log2 scale step");
    add("--r0", r0, "chirprate half-range (Hz/s)");
    add("--dlam", dlam, "chirprate step (Hz/s)");
    add("--dgam", dgam, "squeezed chirprate step (Hz/s), defaults to --dlam");
    add("--band-lo", band_lo, "lowest analysed frequency (Hz), 0 for the grid minimum");
    add("--band-hi", band_hi, "highest analysed frequency (Hz), 0 for the grid maximum");
    add("--dxi", dxi, "squeezed frequency step (Hz), 0 for the log-spaced grid");
    add("--xray-gamma", xray_gamma, "width of the X-ray averaging window");
    add("--xray-v", xray_v, "X-ray integration half-range (s)");
    add("--method", method, "swct2, swct3, sxwct3 or mswct3");
    add("--iters", iters, "iterations for mswct3");
    add("--k", k, "number of ridges");
    add("--jump-f", jump_f, "frequency-bin search half-width per sample");
    add("--jump-c", jump_c, "chirprate-bin search half-width per sample");
    add("--penalty", penalty, "smoothness penalty relative to the cube maximum");
    add("--retrieval", retrieval, "simple or group");
  }

  bool given(const std::string& name) const {
    for (auto* o : options)
      if (o->check_lname(name.substr(2)) && o->count() > 0) return true;
    return false;
  }

  AnalysisConfig apply(AnalysisConfig c) const {
    if (given("--sigma")) {
      if (sigma == "auto") {
        c.sigma.reset();
      } else {
        try {
          std::size_t used = 0;
          c.sigma = std::stod(sigma, &used);
          if (used != sigma.size()) throw std::invalid_argument(sigma);
        } catch (const std::exception&) {
          throw ValidationError("--sigma expects 'auto' or a number, got '" + sigma + "'");
        }
      }
    }
    if (given("--mu")) c.mu = mu;
    if (given("--da")) c.delta_a_tilde = da;
    if (given("--r0")) c.r0 = r0;
    if (given("--dlam")) c.delta_lambda = dlam;
    if (given("--dgam")) c.delta_gamma = dgam;
    if (given("--band-lo")) c.band_lo = band_lo;
    if (given("--band-hi")) c.band_hi = band_hi;
    if (given("--dxi")) c.delta_xi = dxi;
    if (given("--xray-gamma")) c.xray.gamma = xray_gamma;
    if (given("--xray-v")) c.xray.v_halfwidth = xray_v;
    if (given("--method")) c.method = parse_method(method);
    if (given("--iters")) c.iters = iters;
    if (given("--k")) c.ridge.k = k;
    if (given("--jump-f")) c.ridge.jump_f = jump_f;
    if (given("--jump-c")) c.ridge.jump_c = jump_c;
    if (given("--penalty")) c.ridge.penalty_factor = penalty;
    if (given("--retrieval")) c.retrieval = parse_retrieval(retrieval);
    c.validate();
    return c;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_scores(const std::vector<ComponentScore>& scores) {
  for (const auto& s : scores)
    std::printf("  component %zu: IF RMSE %.4f  CR RMSE %.4f  mode RMSE %.4f\n", s.truth_index + 1, s.if_rmse,
                s.cr_rmse, s.mode_rmse);
}

struct GenArgs {
  int example = 0;
  std::string spec, out = "signal.csv", truth_out;
};

int run_gen(const GenArgs& a) {
  SampledSignal x;
  if (a.example != 0) {
    x = example_signal(a.example);
  } else {
    require(!a.spec.empty(), "gen needs --example or --spec");
    const auto spec = io::parse_signal_spec(io::read_json(a.spec));
    x = synthesize(spec.components, spec.n, spec.dt);
  }
  io::write_signal(a.out, x);
  const fs::path truth = a.truth_out.empty() ? fs::path(fs::path(a.out).replace_extension("").string() + "_truth.csv")
                                             : fs::path(a.truth_out);
  io::write_truth(truth, x);
  std::printf("wrote %zu samples to %s and truth to %s\n", x.size(), a.out.c_str(), truth.string().c_str());
  return 0;
}

struct AnalyzeArgs {
  std::string in, out_dir = "analysis";
  std::vector<double> slice_freqs;
  bool dump_cubes = false;
};

int run_analyze(const AnalyzeArgs& a, const AnalysisConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto x = io::read_signal(a.in);
  const auto an = analyze(x, cfg);
  OutputSet out(a.out_dir);
  if (an.entropy) io::write_entropy_curve(out.path("entropy.csv"), *an.entropy);
  io::write_tf_projection(out.path("squeezed_tf.csv"), an.squeezed.values, an.squeezed.freq.centers, x.dt);
  const auto wct_mag = magnitude(an.wf.wct);
  for (double f : a.slice_freqs) {
    const auto s = an.grid.nearest_scale(cfg.mu / f);
    require(s.has_value(), "slice frequency " + std::to_string(f) + " Hz lies outside the analysed band");
    std::vector<std::string> names{"wct"};
    std::vector<const Cube3<double>*> cubes{&wct_mag};
    if (an.xwct) names.push_back("xwct"), cubes.push_back(&*an.xwct);
    io::write_slice(out.path("slice_" + io::number_text(f) + ".csv"), names, cubes, an.grid, *s);
  }
  if (a.dump_cubes) {
    io::write_cube(out.path("wct.cube"), an.wf.wct);
    if (an.xwct) io::write_cube(out.path("xwct.cube"), *an.xwct);
    io::write_cube(out.path("squeezed.cube"), an.squeezed.values);
  }
  const ordered_json report{{"input", a.in}, {"config", to_json(cfg)}, {"analysis", to_json(an)}};
  io::write_json(out.path("report.json"), report);
  out.write_manifest("analyze", to_json(cfg));
  std::printf("sigma %.4g, %zu scales x %zu samples x %zu chirprates; wrote %s (%.1f s)\n", an.sigma,
              an.grid.n_scales(), an.grid.n, an.grid.n_rates(), a.out_dir.c_str(), seconds_since(t0));
  return 0;
}

struct RidgesArgs {
  std::string in, out_dir = "ridges";
};

int run_ridges(const RidgesArgs& a, const AnalysisConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto x = io::read_signal(a.in);
  const auto an = analyze(x, cfg);
  const auto ridges = track_ridges(an, cfg);
  OutputSet out(a.out_dir);
  io::write_ridges(out.path("ridges.csv"), ridges, x.dt, x.t0);
  ordered_json report{{"input", a.in}, {"config", to_json(cfg)}, {"analysis", to_json(an)}};
  report["duplicated_ridges"] = ridges.duplicated;
  io::write_json(out.path("report.json"), report);
  out.write_manifest("ridges", to_json(cfg));
  std::printf("%zu ridges written to %s (%.1f s)\n", ridges.size(), a.out_dir.c_str(), seconds_since(t0));
  return 0;
}

struct RetrieveArgs {
  std::string in, ridges, truth, out_dir = "modes";
};

int run_retrieve(const RetrieveArgs& a, const AnalysisConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto x = io::read_signal(a.in);
  const auto ridges = io::read_ridges(a.ridges);
  const auto grid = analysis_grid(x, cfg);
  double sigma = 0.0;
  ordered_json report{{"input", a.in}, {"ridges", a.ridges}, {"config", to_json(cfg)}};
  if (cfg.sigma) {
    sigma = *cfg.sigma;
  } else {
    const auto curve = select_sigma(x, grid, cfg.sigma_search);
    sigma = curve.argmin;
  }
  report["sigma"] = sigma;
  const auto modes = retrieve_modes(x, sigma, grid, ridges, cfg);
  report["pseudo_inverse_samples"] = modes.pseudo_inverse_samples;
  OutputSet out(a.out_dir);
  io::write_modes(out.path("modes.csv"), modes, x.dt, x.t0);
  if (!a.truth.empty()) {
    const auto truth = io::read_truth(a.truth);
    const auto scores = score(truth, ridges, modes);
    report["components"] = to_json(scores);
    print_scores(scores);
  }
  io::write_json(out.path("report.json"), report);
  out.write_manifest("retrieve", to_json(cfg));
  std::printf("%zu modes written to %s (%.1f s)\n", modes.modes.size(), a.out_dir.c_str(), seconds_since(t0));
  return 0;
}

struct DemoArgs {
  int example = 1;
  std::string out_dir = "demo";
};

int run_demo(const DemoArgs& a, const ConfigFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = flags.apply(example_config(a.example));
  const auto x = example_signal(a.example);
  const auto an = analyze(x, cfg);
  const auto ridges = track_ridges(an, cfg);
  const auto modes = retrieve_modes(x, an.sigma, an.grid, ridges, cfg);
  const auto scores = score(x.truth, ridges, modes);

  OutputSet out(a.out_dir);
  io::write_signal(out.path("signal.csv"), x);
  io::write_truth(out.path("truth.csv"), x);
  io::write_ridges(out.path("ridges.csv"), ridges, x.dt);
  io::write_modes(out.path("modes.csv"), modes, x.dt);
  ordered_json report{{"example", a.example}, {"config", to_json(cfg)}, {"analysis", to_json(an)}};
  report["duplicated_ridges"] = ridges.duplicated;
  report["pseudo_inverse_samples"] = modes.pseudo_inverse_samples;
  report["components"] = to_json(scores);
  io::write_json(out.path("report.json"), report);
  out.write_manifest("demo", to_json(cfg));

  std::printf("example %d, %s, sigma %.4g, %s retrieval\n", a.example, to_string(cfg.method).c_str(), an.sigma,
              to_string(cfg.retrieval).c_str());
  print_scores(scores);
  std::printf("runtime %.1f s\n", seconds_since(t0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"X-ray wavelet-chirplet analysis of multicomponent chirps"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write an example or a JSON-specified signal with its truth");
  auto* ex_opt = gen_cmd->add_option("--example", gen.example, "built-in example 1, 2 or 3");
  gen_cmd->add_option("--spec", gen.spec, "JSON component specification")->excludes(ex_opt);
  gen_cmd->add_option("--out", gen.out, "signal CSV path");
  gen_cmd->add_option("--truth-out", gen.truth_out, "truth CSV path (default: <out>_truth.csv)");

  AnalyzeArgs an;
  ConfigFlags an_flags;
  auto* an_cmd = app.add_subcommand("analyze", "transform, reference fields and squeeze a signal file");
  an_cmd->add_option("--in", an.in, "signal CSV (t,re,im)")->required();
  an_cmd->add_option("--out-dir", an.out_dir, "output directory");
  an_cmd->add_option("--slice-scale", an.slice_freqs, "write the (b, lambda) slice at a = 1/f for each f");
  an_cmd->add_flag("--dump-cubes", an.dump_cubes, "write binary cube dumps");
  an_flags.attach(an_cmd);

  RidgesArgs rg;
  ConfigFlags rg_flags;
  auto* rg_cmd = app.add_subcommand("ridges", "extract IF/chirprate ridges from a signal file");
  rg_cmd->add_option("--in", rg.in, "signal CSV (t,re,im)")->required();
  rg_cmd->add_option("--out-dir", rg.out_dir, "output directory");
  rg_flags.attach(rg_cmd);

  RetrieveArgs rt;
  ConfigFlags rt_flags;
  auto* rt_cmd = app.add_subcommand("retrieve", "recover modes along given ridges");
  rt_cmd->add_option("--in", rt.in, "signal CSV (t,re,im)")->required();
  rt_cmd->add_option("--ridges", rt.ridges, "ridge CSV (t,if_1,cr_1,...)")->required();
  rt_cmd->add_option("--truth", rt.truth, "truth CSV for error reporting");
  rt_cmd->add_option("--out-dir", rt.out_dir, "output directory");
  rt_flags.attach(rt_cmd);

  DemoArgs dm;
  ConfigFlags dm_flags;
  auto* dm_cmd = app.add_subcommand("demo", "full pipeline on a built-in example with error report");
  dm_cmd->add_option("--example", dm.example, "example 1, 2 or 3")->required();
  dm_cmd->add_option("--out-dir", dm.out_dir, "output directory");
  dm_flags.attach(dm_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*an_cmd) return run_analyze(an, an_flags.apply(AnalysisConfig{}));
    if (*rg_cmd) return run_ridges(rg, rg_flags.apply(AnalysisConfig{}));
    if (*rt_cmd) return run_retrieve(rt, rt_flags.apply(AnalysisConfig{}));
    if (*dm_cmd) return run_demo(dm, dm_flags);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  }
  return 0;
}
