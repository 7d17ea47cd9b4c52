#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "odigen/rng.hpp"
#include "odigen/tensor.hpp"

namespace odigen::nn {

enum class Mode { train, eval };

// One-hot class label as a plain vector; validated where consumed.
template <typename T>
void check_one_hot(const std::vector<T>& label) {
  int ones = 0;
  for (T v : label) {
    if (v == T(1))
      ++ones;
    else if (v != T(0))
      throw std::invalid_argument("label: not one-hot");
  }
  if (ones != 1) throw std::invalid_argument("label: not one-hot");
}

// Base layer. forward saves whatever backward needs; backward accumulates
// into the gradient tensors (callers zero them between steps). Layers
// ignore the class label unless they are attention wrappers.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor4<T> forward(const Tensor4<T>& x, Mode mode, Rng& rng) = 0;
  virtual Tensor4<T> backward(const Tensor4<T>& grad_out) = 0;
  virtual std::string kind() const = 0;
  virtual void set_label(const std::vector<T>&) {}
  virtual void init(Rng&) {}
  // Trainable parameters with their gradients, as (name, param, grad).
  virtual std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> param_entries() {
    return {};
  }
  // Non-trainable state that still persists in checkpoints.
  virtual std::vector<std::pair<std::string, Tensor4<T>*>> buffer_entries() { return {}; }

  void zero_grads() {
    for (auto& [name, p, g] : param_entries()) g->fill(T(0));
  }
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

namespace detail {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Column j = (gy, gx) of the output grid holds the k*k*c patch of `img`
// sampled at stride `s` with padding `p`; out-of-bounds taps are zero.
// `img` points at one sample's (c, h, w) block.
template <typename T>
Mat<T> im2col(const T* img, int c, int h, int w, int k, int s, int p, int gh, int gw) {
  Mat<T> m = Mat<T>::Zero(static_cast<Eigen::Index>(c) * k * k,
                          static_cast<Eigen::Index>(gh) * gw);
  for (int ci = 0; ci < c; ++ci)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        Eigen::Index row = (static_cast<Eigen::Index>(ci) * k + ky) * k + kx;
        for (int gy = 0; gy < gh; ++gy) {
          int iy = gy * s - p + ky;
          if (iy < 0 || iy >= h) continue;
          const T* src = img + (static_cast<size_t>(ci) * h + iy) * w;
          for (int gx = 0; gx < gw; ++gx) {
            int ix = gx * s - p + kx;
            if (ix >= 0 && ix < w) m(row, static_cast<Eigen::Index>(gy) * gw + gx) = src[ix];
          }
        }
      }
  return m;
}

// Adjoint of im2col: accumulates each patch column back into `img`.
template <typename T>
void col2im(const Mat<T>& m, T* img, int c, int h, int w, int k, int s, int p, int gh, int gw) {
  for (int ci = 0; ci < c; ++ci)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        Eigen::Index row = (static_cast<Eigen::Index>(ci) * k + ky) * k + kx;
        for (int gy = 0; gy < gh; ++gy) {
          int iy = gy * s - p + ky;
          if (iy < 0 || iy >= h) continue;
          T* dst = img + (static_cast<size_t>(ci) * h + iy) * w;
          for (int gx = 0; gx < gw; ++gx) {
            int ix = gx * s - p + kx;
            if (ix >= 0 && ix < w) dst[ix] += m(row, static_cast<Eigen::Index>(gy) * gw + gx);
          }
        }
      }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution, kernel k, stride s, zero padding p. Default 4/2/1 halves the
// spatial size on even inputs. Implemented as im2col plus a matrix product.

template <typename T>
class Conv : public Layer<T> {
 public:
  Conv(int c_in, int c_out, int k = 4, int stride = 2, int pad = 1)
      : c_in_(c_in), c_out_(c_out), k_(k), stride_(stride), pad_(pad),
        weight_(c_out, c_in, k, k), bias_(1, c_out, 1, 1),
        grad_weight_(c_out, c_in, k, k), grad_bias_(1, c_out, 1, 1) {}

  std::string kind() const override { return "conv"; }
  int out_channels() const { return c_out_; }

  void init(Rng& rng) override {
    for (T& v : weight_.data) v = gaussian<T>(rng, T(0), T(0.02));
    bias_.fill(T(0));
  }

  Tensor4<T> forward(const Tensor4<T>& x, Mode, Rng&) override {
    if (x.c != c_in_)
      throw std::invalid_argument("conv: expected " + std::to_string(c_in_) +
                                  " input channels, got " + std::to_string(x.c));
    int oh = (x.h + 2 * pad_ - k_) / stride_ + 1;
    int ow = (x.w + 2 * pad_ - k_) / stride_ + 1;
    if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv: input too small");
    saved_input_ = x;
    Tensor4<T> out(x.n, c_out_, oh, ow);
    // weight (c_out, c_in, k, k) viewed as (c_out) x (c_in*k*k)
    Eigen::Map<const detail::RowMat<T>> wm(weight_.data.data(), c_out_,
                                           static_cast<Eigen::Index>(c_in_) * k_ * k_);
    for (int n = 0; n < x.n; ++n) {
      detail::Mat<T> cols = detail::im2col(x.data.data() + static_cast<size_t>(n) * x.c * x.h * x.w,
                                           c_in_, x.h, x.w, k_, stride_, pad_, oh, ow);
      Eigen::Map<detail::RowMat<T>> om(out.data.data() + static_cast<size_t>(n) * c_out_ * oh * ow,
                                       c_out_, static_cast<Eigen::Index>(oh) * ow);
      om.noalias() = wm * cols;
      for (int co = 0; co < c_out_; ++co) om.row(co).array() += bias_.data[co];
    }
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& go) override {
    const Tensor4<T>& x = saved_input_;
    Tensor4<T> gx(x.n, x.c, x.h, x.w);
    Eigen::Map<const detail::RowMat<T>> wm(weight_.data.data(), c_out_,
                                           static_cast<Eigen::Index>(c_in_) * k_ * k_);
    Eigen::Map<detail::RowMat<T>> gwm(grad_weight_.data.data(), c_out_,
                                      static_cast<Eigen::Index>(c_in_) * k_ * k_);
    for (int n = 0; n < go.n; ++n) {
      Eigen::Map<const detail::RowMat<T>> gom(
          go.data.data() + static_cast<size_t>(n) * c_out_ * go.h * go.w, c_out_,
          static_cast<Eigen::Index>(go.h) * go.w);
      detail::Mat<T> cols = detail::im2col(x.data.data() + static_cast<size_t>(n) * x.c * x.h * x.w,
                                           c_in_, x.h, x.w, k_, stride_, pad_, go.h, go.w);
      gwm.noalias() += gom * cols.transpose();
      for (int co = 0; co < c_out_; ++co) grad_bias_.data[co] += gom.row(co).sum();
      detail::Mat<T> gcols = wm.transpose() * gom;
      detail::col2im(gcols, gx.data.data() + static_cast<size_t>(n) * x.c * x.h * x.w, c_in_, x.h,
                     x.w, k_, stride_, pad_, go.h, go.w);
    }
    return gx;
  }

  std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> param_entries() override {
    return {{"weight", &weight_, &grad_weight_}, {"bias", &bias_, &grad_bias_}};
  }

 private:
  int c_in_, c_out_, k_, stride_, pad_;
  Tensor4<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor4<T> saved_input_;
};

// ---------------------------------------------------------------------------
// Transposed convolution; the 4/2/1 default exactly doubles the spatial size.

template <typename T>
class Deconv : public Layer<T> {
 public:
  Deconv(int c_in, int c_out, int k = 4, int stride = 2, int pad = 1)
      : c_in_(c_in), c_out_(c_out), k_(k), stride_(stride), pad_(pad),
        weight_(c_in, c_out, k, k), bias_(1, c_out, 1, 1),
        grad_weight_(c_in, c_out, k, k), grad_bias_(1, c_out, 1, 1) {}

  std::string kind() const override { return "deconv"; }
  int out_channels() const { return c_out_; }

  void init(Rng& rng) override {
    for (T& v : weight_.data) v = gaussian<T>(rng, T(0), T(0.02));
    bias_.fill(T(0));
  }

  Tensor4<T> forward(const Tensor4<T>& x, Mode, Rng&) override {
    if (x.c != c_in_) throw std::invalid_argument("deconv: input channel mismatch");
    int oh = (x.h - 1) * stride_ - 2 * pad_ + k_;
    int ow = (x.w - 1) * stride_ - 2 * pad_ + k_;
    if (oh <= 0 || ow <= 0) throw std::invalid_argument("deconv: input too small");
    saved_input_ = x;
    Tensor4<T> out(x.n, c_out_, oh, ow);
    // weight (c_in, c_out, k, k) viewed as (c_in) x (c_out*k*k); the input
    // grid plays the role the output grid plays in Conv.
    Eigen::Map<const detail::RowMat<T>> wm(weight_.data.data(), c_in_,
                                           static_cast<Eigen::Index>(c_out_) * k_ * k_);
    for (int n = 0; n < x.n; ++n) {
      T* out_plane = out.data.data() + static_cast<size_t>(n) * c_out_ * oh * ow;
      for (int co = 0; co < c_out_; ++co)
        std::fill(out_plane + static_cast<size_t>(co) * oh * ow,
                  out_plane + static_cast<size_t>(co + 1) * oh * ow, bias_.data[co]);
      Eigen::Map<const detail::RowMat<T>> xm(
          x.data.data() + static_cast<size_t>(n) * c_in_ * x.h * x.w, c_in_,
          static_cast<Eigen::Index>(x.h) * x.w);
      detail::Mat<T> cols = wm.transpose() * xm;
      detail::col2im(cols, out_plane, c_out_, oh, ow, k_, stride_, pad_, x.h, x.w);
    }
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& go) override {
    const Tensor4<T>& x = saved_input_;
    Tensor4<T> gx(x.n, x.c, x.h, x.w);
    Eigen::Map<const detail::RowMat<T>> wm(weight_.data.data(), c_in_,
                                           static_cast<Eigen::Index>(c_out_) * k_ * k_);
    Eigen::Map<detail::RowMat<T>> gwm(grad_weight_.data.data(), c_in_,
                                      static_cast<Eigen::Index>(c_out_) * k_ * k_);
    for (int n = 0; n < go.n; ++n) {
      const T* go_plane = go.data.data() + static_cast<size_t>(n) * c_out_ * go.h * go.w;
      for (int co = 0; co < c_out_; ++co) {
        const T* p = go_plane + static_cast<size_t>(co) * go.h * go.w;
        for (size_t i = 0; i < static_cast<size_t>(go.h) * go.w; ++i) grad_bias_.data[co] += p[i];
      }
      detail::Mat<T> cols =
          detail::im2col(go_plane, c_out_, go.h, go.w, k_, stride_, pad_, x.h, x.w);
      Eigen::Map<const detail::RowMat<T>> xm(
          x.data.data() + static_cast<size_t>(n) * c_in_ * x.h * x.w, c_in_,
          static_cast<Eigen::Index>(x.h) * x.w);
      gwm.noalias() += xm * cols.transpose();
      Eigen::Map<detail::RowMat<T>> gxm(
          gx.data.data() + static_cast<size_t>(n) * c_in_ * x.h * x.w, c_in_,
          static_cast<Eigen::Index>(x.h) * x.w);
      gxm.noalias() = wm * cols;
    }
    return gx;
  }

  std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> param_entries() override {
    return {{"weight", &weight_, &grad_weight_}, {"bias", &bias_, &grad_bias_}};
  }

 private:
  int c_in_, c_out_, k_, stride_, pad_;
  Tensor4<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor4<T> saved_input_;
};

// ---------------------------------------------------------------------------
// Batch normalization over (n, h, w) per channel.

template <typename T>
class BatchNorm : public Layer<T> {
 public:
  explicit BatchNorm(int c, T momentum = T(0.1), T eps = T(1e-5))
      : c_(c), momentum_(momentum), eps_(eps),
        gamma_(1, c, 1, 1, T(1)), beta_(1, c, 1, 1),
        grad_gamma_(1, c, 1, 1), grad_beta_(1, c, 1, 1),
        running_mean_(1, c, 1, 1), running_var_(1, c, 1, 1, T(1)) {}

  std::string kind() const override { return "batchnorm"; }

  void init(Rng& rng) override {
    for (T& v : gamma_.data) v = gaussian<T>(rng, T(1), T(0.02));
    beta_.fill(T(0));
    running_mean_.fill(T(0));
    running_var_.fill(T(1));
  }

  Tensor4<T> forward(const Tensor4<T>& x, Mode mode, Rng&) override {
    if (x.c != c_) throw std::invalid_argument("batchnorm: channel mismatch");
    saved_mode_ = mode;
    Tensor4<T> out(x.n, x.c, x.h, x.w);
    const size_t m = static_cast<size_t>(x.n) * x.h * x.w;
    if (mode == Mode::train) {
      saved_input_ = x;
      mean_.assign(c_, T(0));
      var_.assign(c_, T(0));
      for (int c = 0; c < c_; ++c) {
        T s = T(0);
        for (int n = 0; n < x.n; ++n)
          for (int y = 0; y < x.h; ++y)
            for (int xx = 0; xx < x.w; ++xx) s += x.at(n, c, y, xx);
        mean_[c] = s / T(m);
        T sv = T(0);
        for (int n = 0; n < x.n; ++n)
          for (int y = 0; y < x.h; ++y)
            for (int xx = 0; xx < x.w; ++xx) {
              T d = x.at(n, c, y, xx) - mean_[c];
              sv += d * d;
            }
        var_[c] = sv / T(m);
        running_mean_.data[c] = (T(1) - momentum_) * running_mean_.data[c] + momentum_ * mean_[c];
        running_var_.data[c] = (T(1) - momentum_) * running_var_.data[c] + momentum_ * var_[c];
        T inv = T(1) / std::sqrt(var_[c] + eps_);
        for (int n = 0; n < x.n; ++n)
          for (int y = 0; y < x.h; ++y)
            for (int xx = 0; xx < x.w; ++xx)
              out.at(n, c, y, xx) =
                  gamma_.data[c] * (x.at(n, c, y, xx) - mean_[c]) * inv + beta_.data[c];
      }
    } else {
      saved_input_ = x;
      for (int c = 0; c < c_; ++c) {
        T inv = T(1) / std::sqrt(running_var_.data[c] + eps_);
        for (int n = 0; n < x.n; ++n)
          for (int y = 0; y < x.h; ++y)
            for (int xx = 0; xx < x.w; ++xx)
              out.at(n, c, y, xx) =
                  gamma_.data[c] * (x.at(n, c, y, xx) - running_mean_.data[c]) * inv +
                  beta_.data[c];
      }
    }
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& go) override {
    const Tensor4<T>& x = saved_input_;
    check_same_shape(go, x, "batchnorm backward");
    Tensor4<T> gx(x.n, x.c, x.h, x.w);
    const size_t m = static_cast<size_t>(x.n) * x.h * x.w;
    for (int c = 0; c < c_; ++c) {
      if (saved_mode_ == Mode::eval) {
        T inv = T(1) / std::sqrt(running_var_.data[c] + eps_);
        for (int n = 0; n < x.n; ++n)
          for (int y = 0; y < x.h; ++y)
            for (int xx = 0; xx < x.w; ++xx) {
              T g = go.at(n, c, y, xx);
              T xh = (x.at(n, c, y, xx) - running_mean_.data[c]) * inv;
              grad_gamma_.data[c] += g * xh;
              grad_beta_.data[c] += g;
              gx.at(n, c, y, xx) = g * gamma_.data[c] * inv;
            }
        continue;
      }
      T inv = T(1) / std::sqrt(var_[c] + eps_);
      T sum_g = T(0), sum_gxh = T(0);
      for (int n = 0; n < x.n; ++n)
        for (int y = 0; y < x.h; ++y)
          for (int xx = 0; xx < x.w; ++xx) {
            T g = go.at(n, c, y, xx);
            T xh = (x.at(n, c, y, xx) - mean_[c]) * inv;
            sum_g += g;
            sum_gxh += g * xh;
            grad_gamma_.data[c] += g * xh;
            grad_beta_.data[c] += g;
          }
      for (int n = 0; n < x.n; ++n)
        for (int y = 0; y < x.h; ++y)
          for (int xx = 0; xx < x.w; ++xx) {
            T g = go.at(n, c, y, xx);
            T xh = (x.at(n, c, y, xx) - mean_[c]) * inv;
            gx.at(n, c, y, xx) =
                gamma_.data[c] * inv * (g - sum_g / T(m) - xh * sum_gxh / T(m));
          }
    }
    return gx;
  }

  std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> param_entries() override {
    return {{"gamma", &gamma_, &grad_gamma_}, {"beta", &beta_, &grad_beta_}};
  }
  std::vector<std::pair<std::string, Tensor4<T>*>> buffer_entries() override {
    return {{"running_mean", &running_mean_}, {"running_var", &running_var_}};
  }

 private:
  int c_;
  T momentum_, eps_;
  Tensor4<T> gamma_, beta_, grad_gamma_, grad_beta_;
  Tensor4<T> running_mean_, running_var_;
  Tensor4<T> saved_input_;
  std::vector<T> mean_, var_;
  Mode saved_mode_ = Mode::train;
};

// ---------------------------------------------------------------------------
// Elementwise activations.

template <typename T>
class LeakyReLU : public Layer<T> {
 public:
  explicit LeakyReLU(T slope = T(0.2)) : slope_(slope) {}
  std::string kind() const override { return "leaky_relu"; }

  Tensor4<T> forward(const Tensor4<T>& x, Mode, Rng&) override {
    saved_input_ = x;
    Tensor4<T> out = x;
    for (T& v : out.data) v = v >= T(0) ? v : slope_ * v;
    return out;
  }
  Tensor4<T> backward(const Tensor4<T>& go) override {
    check_same_shape(go, saved_input_, "leaky_relu backward");
    Tensor4<T> gx = go;
    for (size_t i = 0; i < gx.data.size(); ++i)
      if (saved_input_.data[i] < T(0)) gx.data[i] *= slope_;
    return gx;
  }

 private:
  T slope_;
  Tensor4<T> saved_input_;
};

template <typename T>
class ReLU : public Layer<T> {
 public:
  std::string kind() const override { return "relu"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode, Rng&) override {
    saved_input_ = x;
    Tensor4<T> out = x;
    for (T& v : out.data) v = std::max(v, T(0));
    return out;
  }
  Tensor4<T> backward(const Tensor4<T>& go) override {
    check_same_shape(go, saved_input_, "relu backward");
    Tensor4<T> gx = go;
    for (size_t i = 0; i < gx.data.size(); ++i)
      if (saved_input_.data[i] < T(0)) gx.data[i] = T(0);
    return gx;
  }

 private:
  Tensor4<T> saved_input_;
};

template <typename T>
class Tanh : public Layer<T> {
 public:
  std::string kind() const override { return "tanh"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode, Rng&) override {
    Tensor4<T> out = x;
    for (T& v : out.data) v = std::tanh(v);
    saved_output_ = out;
    return out;
  }
  Tensor4<T> backward(const Tensor4<T>& go) override {
    check_same_shape(go, saved_output_, "tanh backward");
    Tensor4<T> gx = go;
    for (size_t i = 0; i < gx.data.size(); ++i)
      gx.data[i] *= T(1) - saved_output_.data[i] * saved_output_.data[i];
    return gx;
  }

 private:
  Tensor4<T> saved_output_;
};

template <typename T>
class Sigmoid : public Layer<T> {
 public:
  std::string kind() const override { return "sigmoid"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode, Rng&) override {
    Tensor4<T> out = x;
    for (T& v : out.data) v = T(1) / (T(1) + std::exp(-v));
    saved_output_ = out;
    return out;
  }
  Tensor4<T> backward(const Tensor4<T>& go) override {
    check_same_shape(go, saved_output_, "sigmoid backward");
    Tensor4<T> gx = go;
    for (size_t i = 0; i < gx.data.size(); ++i)
      gx.data[i] *= saved_output_.data[i] * (T(1) - saved_output_.data[i]);
    return gx;
  }

 private:
  Tensor4<T> saved_output_;
};

// Inverted dropout. The `always_active` knob keeps it stochastic during
// generation, where dropout doubles as the cGAN noise source.
template <typename T>
class Dropout : public Layer<T> {
 public:
  explicit Dropout(T p = T(0.5), bool always_active = true)
      : p_(p), always_active_(always_active) {}
  std::string kind() const override { return "dropout"; }

  Tensor4<T> forward(const Tensor4<T>& x, Mode mode, Rng& rng) override {
    active_ = always_active_ || mode == Mode::train;
    if (!active_) return x;
    mask_ = Tensor4<T>(x.n, x.c, x.h, x.w);
    T scale = T(1) / (T(1) - p_);
    Tensor4<T> out = x;
    for (size_t i = 0; i < x.data.size(); ++i) {
      T keep = uniform<T>(rng, T(0), T(1)) >= p_ ? scale : T(0);
      mask_.data[i] = keep;
      out.data[i] *= keep;
    }
    return out;
  }
  Tensor4<T> backward(const Tensor4<T>& go) override {
    if (!active_) return go;
    check_same_shape(go, mask_, "dropout backward");
    Tensor4<T> gx = go;
    for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] *= mask_.data[i];
    return gx;
  }

 private:
  T p_;
  bool always_active_;
  bool active_ = false;
  Tensor4<T> mask_;
};

// ---------------------------------------------------------------------------
// Fully-connected over the flattened (c*h*w) features; output is (n, out, 1, 1).

template <typename T>
class FullyConnected : public Layer<T> {
 public:
  FullyConnected(int in_features, int out_features)
      : in_(in_features), out_(out_features),
        weight_(1, 1, out_features, in_features), bias_(1, out_features, 1, 1),
        grad_weight_(1, 1, out_features, in_features), grad_bias_(1, out_features, 1, 1) {}

  std::string kind() const override { return "fc"; }

  void init(Rng& rng) override {
    for (T& v : weight_.data) v = gaussian<T>(rng, T(0), T(0.02));
    bias_.fill(T(0));
  }

  Tensor4<T> forward(const Tensor4<T>& x, Mode, Rng&) override {
    if (static_cast<int>(x.size() / x.n) != in_)
      throw std::invalid_argument("fc: expected " + std::to_string(in_) + " features");
    saved_input_ = x;
    Tensor4<T> out(x.n, out_, 1, 1);
    for (int n = 0; n < x.n; ++n)
      for (int o = 0; o < out_; ++o) {
        T acc = bias_.data[o];
        for (int i = 0; i < in_; ++i)
          acc += weight_.data[static_cast<size_t>(o) * in_ + i] *
                 x.data[static_cast<size_t>(n) * in_ + i];
        out.at(n, o, 0, 0) = acc;
      }
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& go) override {
    const Tensor4<T>& x = saved_input_;
    Tensor4<T> gx(x.n, x.c, x.h, x.w);
    for (int n = 0; n < x.n; ++n)
      for (int o = 0; o < out_; ++o) {
        T g = go.at(n, o, 0, 0);
        grad_bias_.data[o] += g;
        for (int i = 0; i < in_; ++i) {
          grad_weight_.data[static_cast<size_t>(o) * in_ + i] +=
              g * x.data[static_cast<size_t>(n) * in_ + i];
          gx.data[static_cast<size_t>(n) * in_ + i] +=
              g * weight_.data[static_cast<size_t>(o) * in_ + i];
        }
      }
    return gx;
  }

  std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> param_entries() override {
    return {{"weight", &weight_, &grad_weight_}, {"bias", &bias_, &grad_bias_}};
  }

 private:
  int in_, out_;
  Tensor4<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor4<T> saved_input_;
};

// ---------------------------------------------------------------------------
// Class-conditioned channel attention. Wraps a conv or deconv; a small
// fully-connected map from the one-hot label produces sigmoid gates that
// scale the wrapped layer's output channels.

template <typename T>
std::vector<T> attention_weights(const std::vector<T>& label, const Tensor4<T>& weight,
                                 const Tensor4<T>& bias) {
  check_one_hot(label);
  int c_out = bias.c;
  int k = weight.w;
  if (static_cast<int>(label.size()) != k)
    throw std::invalid_argument("attention_weights: label length mismatch");
  std::vector<T> gates(c_out);
  for (int c = 0; c < c_out; ++c) {
    T acc = bias.data[c];
    for (int j = 0; j < k; ++j)
      acc += weight.data[static_cast<size_t>(c) * k + j] * label[j];
    gates[c] = T(1) / (T(1) + std::exp(-acc));
  }
  return gates;
}

template <typename T>
Tensor4<T> apply_channel_attention(const Tensor4<T>& feature, const std::vector<T>& gates) {
  if (static_cast<int>(gates.size()) != feature.c)
    throw std::invalid_argument("apply_channel_attention: gate count mismatch");
  Tensor4<T> out = feature;
  for (int n = 0; n < out.n; ++n)
    for (int c = 0; c < out.c; ++c)
      for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) out.at(n, c, y, x) *= gates[c];
  return out;
}

template <typename T>
class ChannelAttention : public Layer<T> {
 public:
  ChannelAttention(LayerPtr<T> inner, int c_out, int k_classes)
      : inner_(std::move(inner)), c_out_(c_out), k_(k_classes),
        weight_(1, 1, c_out, k_classes), bias_(1, c_out, 1, 1),
        grad_weight_(1, 1, c_out, k_classes), grad_bias_(1, c_out, 1, 1) {}

  std::string kind() const override { return "channel_attention"; }
  Layer<T>& inner() { return *inner_; }

  void init(Rng& rng) override {
    inner_->init(rng);
    for (T& v : weight_.data) v = gaussian<T>(rng, T(0), T(0.02));
    bias_.fill(T(0));
  }

  void set_label(const std::vector<T>& label) override {
    check_one_hot(label);
    if (static_cast<int>(label.size()) != k_)
      throw std::invalid_argument("channel_attention: label class count mismatch");
    label_ = label;
  }

  Tensor4<T> forward(const Tensor4<T>& x, Mode mode, Rng& rng) override {
    if (label_.empty()) throw std::logic_error("channel_attention: label not set");
    saved_pre_ = inner_->forward(x, mode, rng);
    if (saved_pre_.c != c_out_)
      throw std::invalid_argument("channel_attention: wrapped output channel mismatch");
    gates_ = attention_weights(label_, weight_, bias_);
    return apply_channel_attention(saved_pre_, gates_);
  }

  Tensor4<T> backward(const Tensor4<T>& go) override {
    check_same_shape(go, saved_pre_, "channel_attention backward");
    Tensor4<T> g_pre = go;
    std::vector<T> g_gate(c_out_, T(0));
    for (int n = 0; n < go.n; ++n)
      for (int c = 0; c < c_out_; ++c)
        for (int y = 0; y < go.h; ++y)
          for (int x = 0; x < go.w; ++x) {
            g_gate[c] += go.at(n, c, y, x) * saved_pre_.at(n, c, y, x);
            g_pre.at(n, c, y, x) *= gates_[c];
          }
    for (int c = 0; c < c_out_; ++c) {
      T g_lin = g_gate[c] * gates_[c] * (T(1) - gates_[c]);
      grad_bias_.data[c] += g_lin;
      for (int j = 0; j < k_; ++j)
        grad_weight_.data[static_cast<size_t>(c) * k_ + j] += g_lin * label_[j];
    }
    return inner_->backward(g_pre);
  }

  std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> param_entries() override {
    auto entries = inner_->param_entries();
    for (auto& [name, p, g] : entries) name = "inner." + name;
    entries.emplace_back("att_weight", &weight_, &grad_weight_);
    entries.emplace_back("att_bias", &bias_, &grad_bias_);
    return entries;
  }
  std::vector<std::pair<std::string, Tensor4<T>*>> buffer_entries() override {
    auto entries = inner_->buffer_entries();
    for (auto& [name, p] : entries) name = "inner." + name;
    return entries;
  }

 private:
  LayerPtr<T> inner_;
  int c_out_, k_;
  Tensor4<T> weight_, bias_, grad_weight_, grad_bias_;
  std::vector<T> label_, gates_;
  Tensor4<T> saved_pre_;
};

// ---------------------------------------------------------------------------
// Central finite-difference verification of backward() against the scalar
// loss sum(r * forward(x)) with a fixed random weighting r, which keeps
// the check meaningful for layers whose unweighted output sum is input
// independent (BatchNorm). Returns the max relative error over inputs and
// parameters. Run with T = double.

template <typename T>
T grad_check(Layer<T>& layer, const Tensor4<T>& input, T eps, Mode mode = Mode::train,
             uint64_t seed = 0) {
  Tensor4<T> loss_weights;
  auto loss_of = [&](const Tensor4<T>& x) {
    Rng rng(seed);
    Tensor4<T> out = layer.forward(x, mode, rng);
    if (loss_weights.size() == 0) {
      loss_weights = Tensor4<T>(out.n, out.c, out.h, out.w);
      Rng wrng(derive_seed(seed, 999));
      for (T& v : loss_weights.data) v = gaussian<T>(wrng, T(0), T(1));
    }
    T s = T(0);
    for (size_t i = 0; i < out.data.size(); ++i) s += loss_weights.data[i] * out.data[i];
    return s;
  };

  layer.zero_grads();
  Tensor4<T> analytic_input;
  {
    loss_of(input);  // populates loss_weights
    Rng rng(seed);
    layer.forward(input, mode, rng);
    analytic_input = layer.backward(loss_weights);
  }

  T max_err = T(0);
  auto compare = [&](T analytic, T numeric) {
    T denom = std::max({std::abs(analytic), std::abs(numeric), T(1e-8)});
    max_err = std::max(max_err, std::abs(analytic - numeric) / denom);
  };

  Tensor4<T> x = input;
  for (size_t i = 0; i < x.data.size(); ++i) {
    T orig = x.data[i];
    x.data[i] = orig + eps;
    T lp = loss_of(x);
    x.data[i] = orig - eps;
    T lm = loss_of(x);
    x.data[i] = orig;
    compare(analytic_input.data[i], (lp - lm) / (2 * eps));
  }

  for (auto& [name, param, grad] : layer.param_entries()) {
    for (size_t i = 0; i < param->data.size(); ++i) {
      T orig = param->data[i];
      param->data[i] = orig + eps;
      T lp = loss_of(input);
      param->data[i] = orig - eps;
      T lm = loss_of(input);
      param->data[i] = orig;
      compare(grad->data[i], (lp - lm) / (2 * eps));
    }
  }
  return max_err;
}

}  // namespace odigen::nn
