#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace xwct {

using Complex = std::complex<double>;

/// Dense 3D array over (outer, time, inner) axes.
///
/// Logical indexing is (i, m, l) = (scale or frequency, time, chirprate or
/// gamma). Storage keeps time contiguous for each (i, l) pair, so a fixed
/// (i, l) "row" is a span of n_time values. Every kernel in this library
/// (FFT rows, X-ray line sums, reassignment) walks time innermost.
template <typename T>
class Cube3 {
 public:
  Cube3() = default;
  Cube3(std::size_t n_outer, std::size_t n_time, std::size_t n_inner, T fill = T{})
      : n_outer_(n_outer), n_time_(n_time), n_inner_(n_inner),
        data_(n_outer * n_time * n_inner, fill) {}

  std::size_t n_outer() const { return n_outer_; }
  std::size_t n_time() const { return n_time_; }
  std::size_t n_inner() const { return n_inner_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t offset(std::size_t i, std::size_t m, std::size_t l) const {
    return (i * n_inner_ + l) * n_time_ + m;
  }

  T& operator()(std::size_t i, std::size_t m, std::size_t l) { return data_[offset(i, m, l)]; }
  const T& operator()(std::size_t i, std::size_t m, std::size_t l) const {
    return data_[offset(i, m, l)];
  }

  std::span<T> row(std::size_t i, std::size_t l) {
    return {data_.data() + (i * n_inner_ + l) * n_time_, n_time_};
  }
  std::span<const T> row(std::size_t i, std::size_t l) const {
    return {data_.data() + (i * n_inner_ + l) * n_time_, n_time_};
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  bool same_shape(const auto& other) const {
    return n_outer_ == other.n_outer() && n_time_ == other.n_time() && n_inner_ == other.n_inner();
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

 private:
  std::size_t n_outer_ = 0;
  std::size_t n_time_ = 0;
  std::size_t n_inner_ = 0;
  std::vector<T> data_;
};

/// Elementwise magnitude of a cube (identity copy for real nonnegative data).
template <typename T>
Cube3<double> magnitude(const Cube3<T>& cube) {
  Cube3<double> out(cube.n_outer(), cube.n_time(), cube.n_inner());
  auto src = cube.flat();
  auto dst = out.flat();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = std::abs(src[n]);
  return out;
}

template <typename T>
double max_abs(const Cube3<T>& cube) {
  double best = 0.0;
  for (const auto& v : cube.flat()) best = std::max(best, static_cast<double>(std::abs(v)));
  return best;
}

}  // namespace xwct
