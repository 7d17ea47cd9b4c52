#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "odigen/tensor.hpp"

namespace odigen::gan {

template <typename T>
struct LossWeights {
  T lambda = T(100);
};

namespace detail {
template <typename T>
T clamp_score(T s) {
  return std::clamp(s, T(1e-12), T(1) - T(1e-12));
}
}  // namespace detail

// Discriminator loss: -mean(log D(x,y)) - mean(log(1 - D(x,G(x,z)))),
// the minimization form of the cGAN objective. Gradients w.r.t. the two
// score maps come along for the backward pass.
template <typename T>
struct DLoss {
  T value;
  Tensor4<T> grad_real, grad_fake;
};

template <typename T>
DLoss<T> loss_d(const Tensor4<T>& scores_real, const Tensor4<T>& scores_fake) {
  DLoss<T> out;
  out.grad_real = Tensor4<T>(scores_real.n, scores_real.c, scores_real.h, scores_real.w);
  out.grad_fake = Tensor4<T>(scores_fake.n, scores_fake.c, scores_fake.h, scores_fake.w);
  T acc = T(0);
  const T nr = T(scores_real.size()), nf = T(scores_fake.size());
  for (size_t i = 0; i < scores_real.data.size(); ++i) {
    T s = detail::clamp_score(scores_real.data[i]);
    acc -= std::log(s) / nr;
    out.grad_real.data[i] = -T(1) / (s * nr);
  }
  for (size_t i = 0; i < scores_fake.data.size(); ++i) {
    T s = detail::clamp_score(scores_fake.data[i]);
    acc -= std::log(T(1) - s) / nf;
    out.grad_fake.data[i] = T(1) / ((T(1) - s) * nf);
  }
  out.value = acc;
  return out;
}

// Generator loss: adversarial term -mean(log D(x,G)) plus lambda * L1
// reconstruction.
template <typename T>
struct GLoss {
  T total, gan_term, l1_term;
  Tensor4<T> grad_scores;     // d total / d scores_fake
  Tensor4<T> grad_generated;  // d total / d generated (L1 part)
};

template <typename T>
GLoss<T> loss_g(const Tensor4<T>& scores_fake, const Tensor4<T>& target,
                const Tensor4<T>& generated, const LossWeights<T>& weights) {
  check_same_shape(target, generated, "loss_g");
  GLoss<T> out;
  out.grad_scores = Tensor4<T>(scores_fake.n, scores_fake.c, scores_fake.h, scores_fake.w);
  out.grad_generated = Tensor4<T>(generated.n, generated.c, generated.h, generated.w);
  const T nf = T(scores_fake.size()), np = T(generated.size());
  T gan = T(0);
  for (size_t i = 0; i < scores_fake.data.size(); ++i) {
    T s = detail::clamp_score(scores_fake.data[i]);
    gan -= std::log(s) / nf;
    out.grad_scores.data[i] = -T(1) / (s * nf);
  }
  T l1 = T(0);
  for (size_t i = 0; i < generated.data.size(); ++i) {
    T d = generated.data[i] - target.data[i];
    l1 += std::abs(d) / np;
    T sign = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
    out.grad_generated.data[i] = weights.lambda * sign / np;
  }
  out.gan_term = gan;
  out.l1_term = l1;
  out.total = gan + weights.lambda * l1;
  return out;
}

}  // namespace odigen::gan
