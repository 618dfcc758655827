#pragma once

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/entropy.hpp"
#include "xwct/error.hpp"
#include "xwct/ridge.hpp"
#include "xwct/retrieve.hpp"
#include "xwct/signal.hpp"

namespace xwct::io {

namespace fs = std::filesystem;

namespace detail {

/// Shortest decimal text that parses back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

inline void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

inline double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

/// Header plus rows of numbers; every row must have the header's width.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " columns, found " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_double(cells[c], path, lineno);
    t.rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read from " + path.string() + " failed");
  if (t.header.empty()) throw ValidationError(path.string() + ": empty file");
  return t;
}

inline double uniform_step(const std::vector<double>& t, const fs::path& path) {
  require(t.size() >= 2, path.string() + ": need at least 2 samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  require(dt > 0.0, path.string() + ": time column must increase");
  for (std::size_t i = 1; i < t.size(); ++i)
    require(std::abs((t[i] - t[i - 1]) - dt) <= 1e-6 * dt, path.string() + ": time column is not uniformly sampled");
  return dt;
}

}  // namespace detail

/// Signal as `t,re,im`.
inline void write_signal(const fs::path& path, const SampledSignal& x) {
  auto out = detail::open_out(path);
  out << "t,re,im\n";
  for (std::size_t m = 0; m < x.size(); ++m)
    out << detail::fmt(x.time(m)) << ',' << detail::fmt(x.samples[m].real()) << ','
        << detail::fmt(x.samples[m].imag()) << '\n';
  detail::close_checked(out, path);
}

inline SampledSignal read_signal(const fs::path& path) {
  const auto t = detail::read_table(path);
  require(t.header == std::vector<std::string>{"t", "re", "im"}, path.string() + ": header must be t,re,im");
  require(!t.rows.empty(), path.string() + ": no samples");
  SampledSignal x;
  std::vector<double> times;
  for (const auto& r : t.rows) {
    times.push_back(r[0]);
    x.samples.emplace_back(r[1], r[2]);
  }
  x.dt = detail::uniform_step(times, path);
  x.t0 = times.front();
  return x;
}

/// Per-component truth as `t,if_1,cr_1,re_1,im_1,if_2,...`.
inline void write_truth(const fs::path& path, const SampledSignal& x) {
  require(x.has_truth(), "signal carries no truth to write");
  auto out = detail::open_out(path);
  out << 't';
  for (std::size_t c = 1; c <= x.truth.size(); ++c) {
    const auto k = std::to_string(c);
    out << ",if_" << k << ",cr_" << k << ",re_" << k << ",im_" << k;
  }
  out << '\n';
  for (std::size_t m = 0; m < x.size(); ++m) {
    out << detail::fmt(x.time(m));
    for (const auto& tr : x.truth)
      out << ',' << detail::fmt(tr.if_hz[m]) << ',' << detail::fmt(tr.cr_hz_per_s[m]) << ','
          << detail::fmt(tr.samples[m].real()) << ',' << detail::fmt(tr.samples[m].imag());
    out << '\n';
  }
  detail::close_checked(out, path);
}

inline std::vector<ComponentTruth> read_truth(const fs::path& path) {
  const auto t = detail::read_table(path);
  require(t.header.size() >= 5 && (t.header.size() - 1) % 4 == 0 && t.header[0] == "t",
          path.string() + ": header must be t followed by if,cr,re,im groups");
  const std::size_t k = (t.header.size() - 1) / 4;
  std::vector<ComponentTruth> out(k);
  for (const auto& r : t.rows)
    for (std::size_t c = 0; c < k; ++c) {
      out[c].if_hz.push_back(r[1 + 4 * c]);
      out[c].cr_hz_per_s.push_back(r[2 + 4 * c]);
      out[c].samples.emplace_back(r[3 + 4 * c], r[4 + 4 * c]);
    }
  return out;
}

/// Ridges as `t,if_1,cr_1,if_2,cr_2,...`.
inline void write_ridges(const fs::path& path, const RidgeSet& ridges, double dt, double t0 = 0.0) {
  require(ridges.size() >= 1, "no ridges to write");
  auto out = detail::open_out(path);
  out << 't';
  for (std::size_t c = 1; c <= ridges.size(); ++c) out << ",if_" << c << ",cr_" << c;
  out << '\n';
  const std::size_t n = ridges.ridges.front().if_hz.size();
  for (std::size_t m = 0; m < n; ++m) {
    out << detail::fmt(t0 + static_cast<double>(m) * dt);
    for (const auto& r : ridges.ridges) out << ',' << detail::fmt(r.if_hz[m]) << ',' << detail::fmt(r.cr[m]);
    out << '\n';
  }
  detail::close_checked(out, path);
}

/// Reads IF/CR tracks; bin indices are left empty.
inline RidgeSet read_ridges(const fs::path& path) {
  const auto t = detail::read_table(path);
  require(t.header.size() >= 3 && (t.header.size() - 1) % 2 == 0 && t.header[0] == "t",
          path.string() + ": header must be t followed by if,cr pairs");
  RidgeSet out;
  out.ridges.resize((t.header.size() - 1) / 2);
  for (const auto& r : t.rows)
    for (std::size_t c = 0; c < out.ridges.size(); ++c) {
      require(r[1 + 2 * c] > 0.0, path.string() + ": ridge IF must be positive");
      out.ridges[c].if_hz.push_back(r[1 + 2 * c]);
      out.ridges[c].cr.push_back(r[2 + 2 * c]);
    }
  return out;
}

/// Modes as `t,re_1,im_1,re_2,im_2,...`.
inline void write_modes(const fs::path& path, const ModeEstimate& modes, double dt, double t0 = 0.0) {
  require(!modes.modes.empty(), "no modes to write");
  auto out = detail::open_out(path);
  out << 't';
  for (std::size_t c = 1; c <= modes.modes.size(); ++c) out << ",re_" << c << ",im_" << c;
  out << '\n';
  for (std::size_t m = 0; m < modes.modes.front().size(); ++m) {
    out << detail::fmt(t0 + static_cast<double>(m) * dt);
    for (const auto& x : modes.modes) out << ',' << detail::fmt(x[m].real()) << ',' << detail::fmt(x[m].imag());
    out << '\n';
  }
  detail::close_checked(out, path);
}

inline constexpr char kCubeMagic[8] = {'X', 'W', 'C', 'T', '1', '\0', '\0', '\0'};

/// Binary dump: 8-byte magic, u64 kind (1 real, 2 complex), three u64 extents
/// (outer, time, inner), then values in storage order, little-endian doubles.
template <typename T>
void write_cube(const fs::path& path, const Cube3<T>& cube) {
  static_assert(std::is_same_v<T, double> || std::is_same_v<T, Complex>);
  auto out = detail::open_out(path, std::ios::binary);
  const std::uint64_t head[4] = {std::is_same_v<T, double> ? 1u : 2u, cube.n_outer(), cube.n_time(), cube.n_inner()};
  out.write(kCubeMagic, sizeof kCubeMagic);
  out.write(reinterpret_cast<const char*>(head), sizeof head);
  out.write(reinterpret_cast<const char*>(cube.flat().data()), static_cast<std::streamsize>(cube.size() * sizeof(T)));
  detail::close_checked(out, path);
}

template <typename T>
Cube3<T> read_cube(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  std::uint64_t head[4];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(head), sizeof head);
  if (!in) throw IoError(path.string() + ": truncated header");
  require(std::memcmp(magic, kCubeMagic, sizeof magic) == 0, path.string() + ": not a cube dump");
  require(head[0] == (std::is_same_v<T, double> ? 1u : 2u), path.string() + ": value type differs");
  Cube3<T> cube(head[1], head[2], head[3]);
  in.read(reinterpret_cast<char*>(cube.flat().data()), static_cast<std::streamsize>(cube.size() * sizeof(T)));
  if (!in) throw IoError(path.string() + ": truncated data");
  return cube;
}

/// (b, lambda) slice at one band scale, long format `t,lambda,<name>...`.
inline void write_slice(const fs::path& path, const std::vector<std::string>& names,
                        const std::vector<const Cube3<double>*>& cubes, const AnalysisGrid& grid, std::size_t s) {
  require(names.size() == cubes.size() && !cubes.empty(), "slice needs one name per cube");
  auto out = detail::open_out(path);
  out << "t,lambda";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t m = 0; m < grid.n; ++m)
    for (std::size_t l = 0; l < grid.n_rates(); ++l) {
      out << detail::fmt(grid.times[m]) << ',' << detail::fmt(grid.chirprates[l]);
      for (const auto* c : cubes) out << ',' << detail::fmt((*c)(s, m, l));
      out << '\n';
    }
  detail::close_checked(out, path);
}

/// Time-frequency projection max_p |cube(k, m, p)| as `t,f,value` rows with nonzero value.
inline void write_tf_projection(const fs::path& path, const Cube3<double>& cube, const std::vector<double>& freqs,
                                double dt) {
  auto out = detail::open_out(path);
  out << "t,f,value\n";
  for (std::size_t m = 0; m < cube.n_time(); ++m)
    for (std::size_t k = 0; k < cube.n_outer(); ++k) {
      double best = 0.0;
      for (std::size_t p = 0; p < cube.n_inner(); ++p) best = std::max(best, cube(k, m, p));
      if (best > 0.0)
        out << detail::fmt(static_cast<double>(m) * dt) << ',' << detail::fmt(freqs[k]) << ',' << detail::fmt(best)
            << '\n';
    }
  detail::close_checked(out, path);
}

/// Entropy against window width as `sigma,entropy`.
inline void write_entropy_curve(const fs::path& path, const EntropyCurve& curve) {
  auto out = detail::open_out(path);
  out << "sigma,entropy\n";
  for (std::size_t i = 0; i < curve.sigmas.size(); ++i)
    out << detail::fmt(curve.sigmas[i]) << ',' << detail::fmt(curve.entropies[i]) << '\n';
  detail::close_checked(out, path);
}

/// Shortest round-trip text of a number, for file names and reports.
inline std::string number_text(double v) { return detail::fmt(v); }

inline void write_json(const fs::path& path, const nlohmann::ordered_json& doc) {
  auto out = detail::open_out(path);
  out << doc.dump(2) << '\n';
  detail::close_checked(out, path);
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// Component list from JSON:
/// {"n": 1024, "dt": 0.0078125, "components": [{"amplitude": 1, "poly": [c0, c1, c2, c3]},
///  {"sinusoid": {"linear_rate": 41, "amplitude": 10.2, "angular_rate": 1.57, "sign": -1}}]}
struct SignalSpec {
  std::size_t n = 0;
  double dt = 0.0;
  std::vector<ComponentSpec> components;
};

inline SignalSpec parse_signal_spec(const nlohmann::json& j) {
  SignalSpec spec;
  try {
    spec.n = j.at("n").get<std::size_t>();
    spec.dt = j.at("dt").get<double>();
    for (const auto& c : j.at("components")) {
      ComponentSpec cs;
      cs.amplitude = c.value("amplitude", 1.0);
      if (c.contains("poly")) {
        const auto coeffs = c.at("poly").get<std::vector<double>>();
        require(!coeffs.empty() && coeffs.size() <= 4, "poly needs 1 to 4 coefficients");
        PolynomialPhase p;
        std::copy(coeffs.begin(), coeffs.end(), p.coeffs.begin());
        cs.phase = p;
      } else if (c.contains("sinusoid")) {
        const auto& s = c.at("sinusoid");
        cs.phase = SinusoidalPhase{s.at("linear_rate").get<double>(), s.at("amplitude").get<double>(),
                                   s.at("angular_rate").get<double>(), s.value("sign", 1)};
      } else {
        throw ValidationError("component needs a 'poly' or 'sinusoid' phase");
      }
      spec.components.push_back(cs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("signal spec: ") + e.what());
  }
  return spec;
}

}  // namespace xwct::io
