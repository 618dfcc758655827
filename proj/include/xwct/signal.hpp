#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xwct/cube.hpp"
#include "xwct/error.hpp"

namespace xwct {

/// phi(t) = c0 + c1 t + c2 t^2 + c3 t^3, in cycles.
struct PolynomialPhase {
  std::array<double, 4> coeffs{};
};

/// phi(t) = linear_rate * t + sign * amplitude * sin(angular_rate * t), in cycles.
struct SinusoidalPhase {
  double linear_rate = 0.0;
  double amplitude = 0.0;
  double angular_rate = 0.0;
  int sign = 1;
};

struct ComponentSpec {
  double amplitude = 1.0;
  std::variant<PolynomialPhase, SinusoidalPhase> phase;

  /// Phase in cycles.
  double phase_at(double t) const {
    return std::visit(
        [t](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PolynomialPhase>) {
            const auto& c = p.coeffs;
            return c[0] + t * (c[1] + t * (c[2] + t * c[3]));
          } else {
            return p.linear_rate * t + p.sign * p.amplitude * std::sin(p.angular_rate * t);
          }
        },
        phase);
  }

  /// Instantaneous frequency phi'(t) in Hz.
  double if_at(double t) const {
    return std::visit(
        [t](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PolynomialPhase>) {
            const auto& c = p.coeffs;
            return c[1] + t * (2.0 * c[2] + 3.0 * c[3] * t);
          } else {
            return p.linear_rate +
                   p.sign * p.amplitude * p.angular_rate * std::cos(p.angular_rate * t);
          }
        },
        phase);
  }

  /// Chirprate phi''(t) in Hz/s.
  double cr_at(double t) const {
    return std::visit(
        [t](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PolynomialPhase>) {
            const auto& c = p.coeffs;
            return 2.0 * c[2] + 6.0 * c[3] * t;
          } else {
            return -p.sign * p.amplitude * p.angular_rate * p.angular_rate *
                   std::sin(p.angular_rate * t);
          }
        },
        phase);
  }

  /// A * exp(i 2 pi phi(t)); no model validation.
  Complex sample(double t) const {
    const double cycles = phase_at(t);
    const double frac = cycles - std::round(cycles);
    return std::polar(amplitude, 2.0 * std::numbers::pi * frac);
  }
};

struct ComponentTruth {
  std::vector<double> if_hz;
  std::vector<double> cr_hz_per_s;
  std::vector<Complex> samples;
};

struct SampledSignal {
  std::vector<Complex> samples;
  double dt = 1.0;
  double t0 = 0.0;
  std::vector<ComponentTruth> truth;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t n) const { return t0 + static_cast<double>(n) * dt; }
  bool has_truth() const { return !truth.empty(); }
};

struct SynthesisOptions {
  /// Reject IF >= 1/(2 dt). Example 2 touches 65 Hz at both ends of its
  /// record at 128 Hz sampling, so the built-in examples turn this off.
  bool reject_above_nyquist = true;
};

/// Sum of components sampled at t_n = n dt, n = 0..N-1, with analytic IF/CR truth.
///
/// Rejects components whose IF is nonpositive at some sample (the model needs
/// phi' > 0) and, unless disabled, IF at or above Nyquist.
inline SampledSignal synthesize(std::span<const ComponentSpec> components, std::size_t n,
                                double dt, const SynthesisOptions& options = {}) {
  require(n >= 2, "signal needs at least 2 samples");
  require(dt > 0.0, "sampling step must be positive");
  require(!components.empty(), "signal needs at least one component");

  SampledSignal out;
  out.dt = dt;
  out.samples.assign(n, Complex{});
  const double nyquist = 0.5 / dt;

  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& spec = components[k];
    require(spec.amplitude > 0.0, "component amplitude must be positive");
    ComponentTruth truth;
    truth.if_hz.resize(n);
    truth.cr_hz_per_s.resize(n);
    truth.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = out.time(i);
      const double f = spec.if_at(t);
      if (!(f > 0.0)) {
        throw ValidationError("component " + std::to_string(k + 1) +
                              " has nonpositive instantaneous frequency " + std::to_string(f) +
                              " Hz at t=" + std::to_string(t));
      }
      if (options.reject_above_nyquist && f >= nyquist) {
        throw ValidationError("component " + std::to_string(k + 1) + " frequency " +
                              std::to_string(f) + " Hz reaches Nyquist " +
                              std::to_string(nyquist) + " Hz at t=" + std::to_string(t));
      }
      truth.if_hz[i] = f;
      truth.cr_hz_per_s[i] = spec.cr_at(t);
      truth.samples[i] = spec.sample(t);
      out.samples[i] += truth.samples[i];
    }
    out.truth.push_back(std::move(truth));
  }
  return out;
}

/// Component specs of the three two-component crossover examples.
inline std::vector<ComponentSpec> example_components(int id) {
  constexpr double pi = std::numbers::pi;
  switch (id) {
    case 1:
      // e^{i2pi(42t-2t^2)} + e^{i2pi(10t+2t^2)}
      return {ComponentSpec{1.0, PolynomialPhase{{0.0, 42.0, -2.0, 0.0}}},
              ComponentSpec{1.0, PolynomialPhase{{0.0, 10.0, 2.0, 0.0}}}};
    case 2:
      // 3(t-2)^3 + 29t and -3(t-2)^3 + 47t, expanded
      return {ComponentSpec{1.0, PolynomialPhase{{-24.0, 65.0, -18.0, 3.0}}},
              ComponentSpec{1.0, PolynomialPhase{{24.0, 11.0, 18.0, -3.0}}}};
    case 3:
      // 41t -/+ (32/pi) sin(pi t / 2)
      return {ComponentSpec{1.0, SinusoidalPhase{41.0, 32.0 / pi, pi / 2.0, -1}},
              ComponentSpec{1.0, SinusoidalPhase{41.0, 32.0 / pi, pi / 2.0, +1}}};
    default:
      throw ValidationError("unknown example id " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
}

struct ExampleLayout {
  std::size_t n;
  double dt;
};

inline ExampleLayout example_layout(int id) {
  switch (id) {
    case 1: return {8 * 128, 1.0 / 128.0};
    case 2:
    case 3: return {4 * 128, 1.0 / 128.0};
    default:
      throw ValidationError("unknown example id " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
}

inline SampledSignal example_signal(int id) {
  const auto layout = example_layout(id);
  const auto components = example_components(id);
  return synthesize(components, layout.n, layout.dt, SynthesisOptions{false});
}

}  // namespace xwct
