#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "odigen/image.hpp"
#include "odigen/layers.hpp"

namespace odigen::nn {

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w)
    throw std::invalid_argument("concat_channels: spatial/batch mismatch");
  Tensor4<T> out(a.n, a.c + b.c, a.h, a.w);
  for (int n = 0; n < a.n; ++n) {
    for (int c = 0; c < a.c; ++c)
      for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) out.at(n, c, y, x) = a.at(n, c, y, x);
    for (int c = 0; c < b.c; ++c)
      for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) out.at(n, a.c + c, y, x) = b.at(n, c, y, x);
  }
  return out;
}

template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> split_channels(const Tensor4<T>& t, int c_first) {
  Tensor4<T> a(t.n, c_first, t.h, t.w), b(t.n, t.c - c_first, t.h, t.w);
  for (int n = 0; n < t.n; ++n) {
    for (int c = 0; c < c_first; ++c)
      for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x) a.at(n, c, y, x) = t.at(n, c, y, x);
    for (int c = c_first; c < t.c; ++c)
      for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x) b.at(n, c - c_first, y, x) = t.at(n, c, y, x);
  }
  return {std::move(a), std::move(b)};
}

// Image<->tensor rescale: images live in [0,1], networks in [-1,1].
template <typename T>
Tensor4<T> image_to_tensor(const Image& img) {
  Tensor4<T> t(1, img.channels, img.height, img.width);
  for (size_t i = 0; i < img.pixels.size(); ++i)
    t.data[i] = static_cast<T>(img.pixels[i]) * T(2) - T(1);
  return t;
}

template <typename T>
Image tensor_to_image(const Tensor4<T>& t, int batch_index = 0) {
  Image img(t.w, t.h, t.c);
  size_t per = static_cast<size_t>(t.c) * t.h * t.w;
  for (size_t i = 0; i < per; ++i) {
    double v = (static_cast<double>(t.data[batch_index * per + i]) + 1.0) / 2.0;
    img.pixels[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return img;
}

enum class Conditioning { class_conditioned, class_independent };

// Named parameter/buffer plumbing shared by the three networks.
template <typename T>
struct NetModule {
  std::vector<std::pair<std::string, Layer<T>*>> named_layers;

  std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> param_entries() {
    std::vector<std::tuple<std::string, Tensor4<T>*, Tensor4<T>*>> out;
    for (auto& [prefix, layer] : named_layers)
      for (auto& [name, p, g] : layer->param_entries())
        out.emplace_back(prefix + "." + name, p, g);
    return out;
  }
  std::vector<std::pair<std::string, Tensor4<T>*>> buffer_entries() {
    std::vector<std::pair<std::string, Tensor4<T>*>> out;
    for (auto& [prefix, layer] : named_layers)
      for (auto& [name, p] : layer->buffer_entries())
        out.emplace_back(prefix + "." + name, p);
    return out;
  }
  void zero_grads() {
    for (auto& [n, l] : named_layers) l->zero_grads();
  }
  void set_label(const std::vector<T>& label) {
    for (auto& [n, l] : named_layers) l->set_label(label);
  }
  void init(Rng& rng) {
    for (auto& [n, l] : named_layers) l->init(rng);
  }
  size_t param_count() {
    size_t k = 0;
    for (auto& [name, p, g] : param_entries()) k += p->size();
    return k;
  }
};

template <typename T>
LayerPtr<T> maybe_attend(LayerPtr<T> inner, int c_out, Conditioning mode, int k_classes) {
  if (mode == Conditioning::class_conditioned)
    return std::make_unique<ChannelAttention<T>>(std::move(inner), c_out, k_classes);
  return inner;
}

struct GeneratorSpec {
  int base_channels = 64;
  int depth = 8;
  int k_classes = 1;
  int image_channels = 3;
  Conditioning conditioning = Conditioning::class_conditioned;

  void validate() const {
    if (depth < 3) throw std::invalid_argument("GeneratorSpec: depth < 3");
    if (base_channels <= 0 || k_classes <= 0)
      throw std::invalid_argument("GeneratorSpec: non-positive field");
  }
};

// U-Net: `depth` stride-2 convs down, `depth` deconvs up with skip
// concatenation, Tanh head. Dropout in the three innermost decoder stages
// stays active at generation time and realizes the cGAN noise input.
template <typename T>
class Generator : public NetModule<T> {
 public:
  explicit Generator(const GeneratorSpec& spec) : spec_(spec) {
    spec.validate();
    const int d = spec.depth;
    ch_.resize(d);
    for (int i = 0; i < d; ++i) ch_[i] = spec.base_channels * std::min(1 << i, 8);

    for (int i = 0; i < d; ++i) {
      int c_in = i == 0 ? spec.image_channels : ch_[i - 1];
      enc_convs_.push_back(maybe_attend<T>(std::make_unique<Conv<T>>(c_in, ch_[i]), ch_[i],
                                           spec.conditioning, spec.k_classes));
      enc_norms_.push_back(i >= 1 && i <= d - 2 ? std::make_unique<BatchNorm<T>>(ch_[i])
                                                : nullptr);
      enc_relus_.push_back(i > 0 ? std::make_unique<LeakyReLU<T>>(T(0.2)) : nullptr);
    }
    for (int j = 0; j < d; ++j) {
      int c_in = j == d - 1 ? ch_[d - 1] : 2 * ch_[j];
      int c_out = j == 0 ? spec.image_channels : ch_[j - 1];
      dec_relus_.push_back(std::make_unique<ReLU<T>>());
      dec_convs_.push_back(maybe_attend<T>(std::make_unique<Deconv<T>>(c_in, c_out), c_out,
                                           spec.conditioning, spec.k_classes));
      dec_norms_.push_back(j >= 1 ? std::make_unique<BatchNorm<T>>(c_out) : nullptr);
      dec_drops_.push_back(j >= d - 3 ? std::make_unique<Dropout<T>>(T(0.5), true) : nullptr);
    }
    tanh_ = std::make_unique<Tanh<T>>();
    register_layers();
  }

  const GeneratorSpec& spec() const { return spec_; }

  Tensor4<T> forward(const Tensor4<T>& x, Mode mode, Rng& rng) {
    const int d = spec_.depth;
    if (x.h % (1 << d) != 0 || x.w % (1 << d) != 0)
      throw std::invalid_argument("generator: input size not divisible by 2^depth");
    skips_.assign(d, {});
    Tensor4<T> a = x;
    for (int i = 0; i < d; ++i) {
      if (enc_relus_[i]) a = enc_relus_[i]->forward(a, mode, rng);
      a = enc_convs_[i]->forward(a, mode, rng);
      if (enc_norms_[i]) a = enc_norms_[i]->forward(a, mode, rng);
      skips_[i] = a;
    }
    Tensor4<T> cur = skips_[d - 1];
    for (int j = d - 1; j >= 0; --j) {
      Tensor4<T> in = j == d - 1 ? cur : concat_channels(cur, skips_[j]);
      Tensor4<T> t = dec_relus_[j]->forward(in, mode, rng);
      t = dec_convs_[j]->forward(t, mode, rng);
      if (dec_norms_[j]) t = dec_norms_[j]->forward(t, mode, rng);
      if (dec_drops_[j]) t = dec_drops_[j]->forward(t, mode, rng);
      cur = std::move(t);
    }
    return tanh_->forward(cur, mode, rng);
  }

  // Returns grad w.r.t. the network input.
  Tensor4<T> backward(const Tensor4<T>& grad_out) {
    const int d = spec_.depth;
    std::vector<Tensor4<T>> skip_grads(d);
    Tensor4<T> g = tanh_->backward(grad_out);
    for (int j = 0; j < d; ++j) {
      if (dec_drops_[j]) g = dec_drops_[j]->backward(g);
      if (dec_norms_[j]) g = dec_norms_[j]->backward(g);
      g = dec_convs_[j]->backward(g);
      g = dec_relus_[j]->backward(g);
      if (j == d - 1) {
        skip_grads[d - 1] = add_into(std::move(skip_grads[d - 1]), g);
      } else {
        auto [g_deeper, g_skip] = split_channels(g, ch_[j]);
        skip_grads[j] = add_into(std::move(skip_grads[j]), g_skip);
        g = std::move(g_deeper);
      }
    }
    Tensor4<T> carry;
    for (int i = d - 1; i >= 0; --i) {
      Tensor4<T> gi = std::move(skip_grads[i]);
      if (carry.size() > 0) gi = add_into(std::move(gi), carry);
      if (enc_norms_[i]) gi = enc_norms_[i]->backward(gi);
      gi = enc_convs_[i]->backward(gi);
      if (enc_relus_[i]) gi = enc_relus_[i]->backward(gi);
      carry = std::move(gi);
    }
    return carry;
  }

 private:
  static Tensor4<T> add_into(Tensor4<T> acc, const Tensor4<T>& g) {
    if (acc.size() == 0) return g;
    check_same_shape(acc, g, "generator backward accumulate");
    for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
    return acc;
  }

  void register_layers() {
    const int d = spec_.depth;
    for (int i = 0; i < d; ++i) {
      std::string p = "enc" + std::to_string(i);
      if (enc_relus_[i]) this->named_layers.push_back({p + ".act", enc_relus_[i].get()});
      this->named_layers.push_back({p + ".conv", enc_convs_[i].get()});
      if (enc_norms_[i]) this->named_layers.push_back({p + ".norm", enc_norms_[i].get()});
    }
    for (int j = 0; j < d; ++j) {
      std::string p = "dec" + std::to_string(j);
      this->named_layers.push_back({p + ".act", dec_relus_[j].get()});
      this->named_layers.push_back({p + ".conv", dec_convs_[j].get()});
      if (dec_norms_[j]) this->named_layers.push_back({p + ".norm", dec_norms_[j].get()});
      if (dec_drops_[j]) this->named_layers.push_back({p + ".drop", dec_drops_[j].get()});
    }
    this->named_layers.push_back({"head.tanh", tanh_.get()});
  }

  GeneratorSpec spec_;
  std::vector<int> ch_;
  std::vector<LayerPtr<T>> enc_convs_, dec_convs_;
  std::vector<std::unique_ptr<BatchNorm<T>>> enc_norms_, dec_norms_;
  std::vector<std::unique_ptr<LeakyReLU<T>>> enc_relus_;
  std::vector<std::unique_ptr<ReLU<T>>> dec_relus_;
  std::vector<std::unique_ptr<Dropout<T>>> dec_drops_;
  std::unique_ptr<Tanh<T>> tanh_;
  std::vector<Tensor4<T>> skips_;
};

struct DiscriminatorSpec {
  int base_channels = 64;
  int k_classes = 1;
  int image_channels = 3;
  Conditioning conditioning = Conditioning::class_conditioned;
  static constexpr int kLayerCount = 5;
};

// PatchGAN: 5 convs over the channel-concatenated (condition, candidate)
// pair, sigmoid score map out. Strides 2,2,2,1,1.
template <typename T>
class Discriminator : public NetModule<T> {
 public:
  explicit Discriminator(const DiscriminatorSpec& spec) : spec_(spec) {
    int b = spec.base_channels;
    const int chans[5] = {b, 2 * b, 4 * b, 8 * b, 1};
    const int strides[5] = {2, 2, 2, 1, 1};
    int c_in = 2 * spec.image_channels;
    for (int i = 0; i < 5; ++i) {
      convs_.push_back(maybe_attend<T>(std::make_unique<Conv<T>>(c_in, chans[i], 4, strides[i], 1),
                                       chans[i], spec.conditioning, spec.k_classes));
      norms_.push_back(i >= 1 && i <= 3 ? std::make_unique<BatchNorm<T>>(chans[i]) : nullptr);
      acts_.push_back(i <= 3 ? std::make_unique<LeakyReLU<T>>(T(0.2)) : nullptr);
      c_in = chans[i];
    }
    sigmoid_ = std::make_unique<Sigmoid<T>>();
    for (int i = 0; i < 5; ++i) {
      std::string p = "d" + std::to_string(i);
      this->named_layers.push_back({p + ".conv", convs_[i].get()});
      if (norms_[i]) this->named_layers.push_back({p + ".norm", norms_[i].get()});
      if (acts_[i]) this->named_layers.push_back({p + ".act", acts_[i].get()});
    }
    this->named_layers.push_back({"head.sigmoid", sigmoid_.get()});
  }

  const DiscriminatorSpec& spec() const { return spec_; }

  // condition and candidate must share shape; both are expected in [-1,1].
  Tensor4<T> forward(const Tensor4<T>& condition, const Tensor4<T>& candidate, Mode mode,
                     Rng& rng) {
    check_same_shape(condition, candidate, "discriminator input pair");
    Tensor4<T> a = concat_channels(condition, candidate);
    for (int i = 0; i < 5; ++i) {
      a = convs_[i]->forward(a, mode, rng);
      if (norms_[i]) a = norms_[i]->forward(a, mode, rng);
      if (acts_[i]) a = acts_[i]->forward(a, mode, rng);
    }
    return sigmoid_->forward(a, mode, rng);
  }

  // Returns (grad_condition, grad_candidate).
  std::pair<Tensor4<T>, Tensor4<T>> backward(const Tensor4<T>& grad_scores) {
    Tensor4<T> g = sigmoid_->backward(grad_scores);
    for (int i = 4; i >= 0; --i) {
      if (acts_[i]) g = acts_[i]->backward(g);
      if (norms_[i]) g = norms_[i]->backward(g);
      g = convs_[i]->backward(g);
    }
    return split_channels(g, g.c / 2);
  }

 private:
  DiscriminatorSpec spec_;
  std::vector<LayerPtr<T>> convs_;
  std::vector<std::unique_ptr<BatchNorm<T>>> norms_;
  std::vector<std::unique_ptr<LeakyReLU<T>>> acts_;
  std::unique_ptr<Sigmoid<T>> sigmoid_;
};

struct ClassifierSpec {
  int input_width = 0;
  int input_height = 0;
  int image_channels = 3;
  int k_classes = 0;
  int base_channels = 16;
  int feature_dim = 32;
};

// Small scene classifier: 3 conv stages then a two-layer head. The hidden
// activation doubles as the feature embedding for the FID metric.
template <typename T>
class Classifier : public NetModule<T> {
 public:
  explicit Classifier(const ClassifierSpec& spec) : spec_(spec) {
    if (spec.k_classes < 2) throw std::invalid_argument("Classifier: need >= 2 classes");
    int b = spec.base_channels;
    const int chans[3] = {b, 2 * b, 4 * b};
    int c_in = spec.image_channels;
    int h = spec.input_height, w = spec.input_width;
    for (int i = 0; i < 3; ++i) {
      convs_.push_back(std::make_unique<Conv<T>>(c_in, chans[i]));
      norms_.push_back(i >= 1 ? std::make_unique<BatchNorm<T>>(chans[i]) : nullptr);
      acts_.push_back(std::make_unique<LeakyReLU<T>>(T(0.2)));
      c_in = chans[i];
      h = (h + 2 - 4) / 2 + 1;
      w = (w + 2 - 4) / 2 + 1;
      if (h <= 0 || w <= 0) throw std::invalid_argument("Classifier: input too small");
    }
    flat_dim_ = chans[2] * h * w;
    fc_hidden_ = std::make_unique<FullyConnected<T>>(flat_dim_, spec.feature_dim);
    hidden_act_ = std::make_unique<ReLU<T>>();
    fc_out_ = std::make_unique<FullyConnected<T>>(spec.feature_dim, spec.k_classes);
    for (int i = 0; i < 3; ++i) {
      std::string p = "c" + std::to_string(i);
      this->named_layers.push_back({p + ".conv", convs_[i].get()});
      if (norms_[i]) this->named_layers.push_back({p + ".norm", norms_[i].get()});
      this->named_layers.push_back({p + ".act", acts_[i].get()});
    }
    this->named_layers.push_back({"fc_hidden", fc_hidden_.get()});
    this->named_layers.push_back({"hidden_act", hidden_act_.get()});
    this->named_layers.push_back({"fc_out", fc_out_.get()});
  }

  const ClassifierSpec& spec() const { return spec_; }

  // Returns raw logits (n, k, 1, 1); features() gives the last hidden
  // activation of the most recent forward.
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode, Rng& rng) {
    if (x.h != spec_.input_height || x.w != spec_.input_width)
      throw std::invalid_argument("classifier: input size mismatch, expected " +
                                  std::to_string(spec_.input_width) + "x" +
                                  std::to_string(spec_.input_height));
    Tensor4<T> a = x;
    for (int i = 0; i < 3; ++i) {
      a = convs_[i]->forward(a, mode, rng);
      if (norms_[i]) a = norms_[i]->forward(a, mode, rng);
      a = acts_[i]->forward(a, mode, rng);
    }
    a = fc_hidden_->forward(a, mode, rng);
    features_ = hidden_act_->forward(a, mode, rng);
    return fc_out_->forward(features_, mode, rng);
  }

  const Tensor4<T>& features() const { return features_; }

  Tensor4<T> backward(const Tensor4<T>& grad_logits) {
    Tensor4<T> g = fc_out_->backward(grad_logits);
    g = hidden_act_->backward(g);
    g = fc_hidden_->backward(g);
    for (int i = 2; i >= 0; --i) {
      g = acts_[i]->backward(g);
      if (norms_[i]) g = norms_[i]->backward(g);
      g = convs_[i]->backward(g);
    }
    return g;
  }

 private:
  ClassifierSpec spec_;
  int flat_dim_ = 0;
  std::vector<std::unique_ptr<Conv<T>>> convs_;
  std::vector<std::unique_ptr<BatchNorm<T>>> norms_;
  std::vector<std::unique_ptr<LeakyReLU<T>>> acts_;
  std::unique_ptr<FullyConnected<T>> fc_hidden_, fc_out_;
  std::unique_ptr<ReLU<T>> hidden_act_;
  Tensor4<T> features_;
};

}  // namespace odigen::nn
