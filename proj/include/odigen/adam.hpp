#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "odigen/tensor.hpp"

namespace odigen::train {

template <typename T>
struct AdamConfig {
  T lr = T(2e-4);
  T beta1 = T(0.5);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

// Adam with bias correction. Moment buffers are addressed positionally,
// so the parameter list must stay stable for the optimizer's lifetime.
template <typename T>
class Adam {
 public:
  Adam() = default;
  explicit Adam(const AdamConfig<T>& cfg) : cfg_(cfg) {}

  void step(std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>>& entries) {
    if (m_.empty()) {
      for (auto& [name, p, g] : entries) {
        m_.emplace_back(p->n, p->c, p->h, p->w);
        v_.emplace_back(p->n, p->c, p->h, p->w);
      }
    }
    if (m_.size() != entries.size())
      throw std::invalid_argument("Adam: parameter list changed size");
    ++t_;
    T bc1 = T(1) - std::pow(cfg_.beta1, T(t_));
    T bc2 = T(1) - std::pow(cfg_.beta2, T(t_));
    for (size_t k = 0; k < entries.size(); ++k) {
      auto& [name, p, g] = entries[k];
      for (size_t i = 0; i < p->data.size(); ++i) {
        T gi = g->data[i];
        m_[k].data[i] = cfg_.beta1 * m_[k].data[i] + (T(1) - cfg_.beta1) * gi;
        v_[k].data[i] = cfg_.beta2 * v_[k].data[i] + (T(1) - cfg_.beta2) * gi * gi;
        T mhat = m_[k].data[i] / bc1;
        T vhat = v_[k].data[i] / bc2;
        p->data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  const AdamConfig<T>& config() const { return cfg_; }
  long long step_count() const { return t_; }
  std::vector<Tensor4<T>>& first_moments() { return m_; }
  std::vector<Tensor4<T>>& second_moments() { return v_; }
  void restore(long long t, std::vector<Tensor4<T>> m, std::vector<Tensor4<T>> v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  AdamConfig<T> cfg_;
  long long t_ = 0;
  std::vector<Tensor4<T>> m_, v_;
};

}  // namespace odigen::train
