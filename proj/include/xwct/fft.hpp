#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>

#include "xwct/cube.hpp"

namespace xwct {

/// Owning wrapper around a pair of FFTW plans of fixed length.
///
/// Plans are made with FFTW_ESTIMATE so results are reproducible run to run.
/// inverse() applies the 1/N factor, so inverse(forward(x)) == x.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_1d(len, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(len, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  Fft(Fft&& other) noexcept { swap(other); }
  Fft& operator=(Fft&& other) noexcept {
    if (this != &other) {
      release();
      swap(other);
    }
    return *this;
  }

  ~Fft() { release(); }

  std::size_t size() const { return n_; }

  void forward(std::span<const Complex> in, std::span<Complex> out) { run(forward_, in, out, 1.0); }

  void inverse(std::span<const Complex> in, std::span<Complex> out) {
    run(backward_, in, out, 1.0 / static_cast<double>(n_));
  }

  /// Scratch input buffer; fill it and call inverse_from_input() to skip one copy.
  std::span<Complex> input() { return {reinterpret_cast<Complex*>(in_), n_}; }

  void inverse_from_input(std::span<Complex> out) {
    fftw_execute(backward_);
    const double scale = 1.0 / static_cast<double>(n_);
    const auto* src = reinterpret_cast<const Complex*>(out_);
    for (std::size_t k = 0; k < n_; ++k) out[k] = src[k] * scale;
  }

 private:
  void run(fftw_plan plan, std::span<const Complex> in, std::span<Complex> out, double scale) {
    std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(in_));
    fftw_execute(plan);
    const auto* src = reinterpret_cast<const Complex*>(out_);
    for (std::size_t k = 0; k < n_; ++k) out[k] = src[k] * scale;
  }

  void release() {
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
    if (in_) fftw_free(in_);
    if (out_) fftw_free(out_);
    forward_ = backward_ = nullptr;
    in_ = out_ = nullptr;
  }

  void swap(Fft& other) noexcept {
    std::swap(n_, other.n_);
    std::swap(in_, other.in_);
    std::swap(out_, other.out_);
    std::swap(forward_, other.forward_);
    std::swap(backward_, other.backward_);
  }

  std::size_t n_ = 0;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace xwct
