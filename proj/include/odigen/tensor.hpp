#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace odigen {

// Batched NCHW array. Scalar type is a template parameter so the same
// layer code runs in float for training and double for gradient checks.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {
    if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0)
      throw std::invalid_argument("Tensor4: negative dimension");
  }

  size_t size() const { return data.size(); }
  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" +
           std::to_string(h) + "x" + std::to_string(w);
  }

  T& at(int in, int ic, int iy, int ix) {
    return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  const T& at(int in, int ic, int iy, int ix) const {
    return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename U>
  Tensor4<U> cast() const {
    Tensor4<U> out(n, c, h, w);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

template <typename T>
void check_same_shape(const Tensor4<T>& a, const Tensor4<T>& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
}

}  // namespace odigen
