#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "odigen/adam.hpp"
#include "odigen/checkpoint.hpp"
#include "odigen/dataset.hpp"
#include "odigen/losses.hpp"
#include "odigen/network.hpp"
#include "odigen/padding.hpp"

namespace odigen::train {

enum class Variant { conditioned, independent, specific };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::conditioned: return "conditioned";
    case Variant::independent: return "independent";
    default: return "specific";
  }
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "conditioned") return Variant::conditioned;
  if (s == "independent") return Variant::independent;
  if (s == "specific") return Variant::specific;
  throw std::invalid_argument("unknown variant: " + s);
}

struct TrainConfig {
  double lr = 2e-4;
  double beta1 = 0.5, beta2 = 0.999;
  int batch_size = 1;
  int iterations = 200;
  uint64_t seed = 0;
  bool pad_enabled = true;
  Variant variant = Variant::conditioned;
  float lambda = 100.0f;
  int image_width = 512;  // equirect, height = width / 2
  int base_channels = 64;
  int depth = 8;
  int k_classes = 1;
  std::optional<int> per_class_cap;

  void validate() const {
    if (lr < 0 || batch_size < 1 || iterations < 0 || image_width < 8 || base_channels < 1 ||
        depth < 3 || k_classes < 1 || lambda < 0)
      throw std::invalid_argument("TrainConfig: invalid field");
  }

  std::string echo(const std::vector<std::string>& class_names) const {
    std::ostringstream os;
    os << "lr=" << lr << "\nbeta1=" << beta1 << "\nbeta2=" << beta2
       << "\nbatch_size=" << batch_size << "\niterations=" << iterations << "\nseed=" << seed
       << "\npad=" << (pad_enabled ? "on" : "off") << "\nvariant=" << variant_name(variant)
       << "\nlambda=" << lambda << "\nimage_width=" << image_width
       << "\nbase_channels=" << base_channels << "\ndepth=" << depth
       << "\nk_classes=" << k_classes << "\nclasses=";
    for (size_t i = 0; i < class_names.size(); ++i)
      os << (i ? "," : "") << class_names[i];
    os << "\n";
    return os.str();
  }
};

struct StepLosses {
  float d = 0, g_gan = 0, g_l1 = 0;
};

using LossHistory = std::vector<StepLosses>;

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(long long iteration)
      : std::runtime_error("training diverged at iteration " + std::to_string(iteration)),
        iteration(iteration) {}
  long long iteration;
};

template <typename T>
std::vector<T> one_hot(int class_id, int k) {
  std::vector<T> v(k, T(0));
  v.at(class_id) = T(1);
  return v;
}

// Deterministic stochastic generation: dropout in the decoder acts as the
// noise source, seeded per call. BatchNorm runs on batch statistics, as
// the reference pix2pix setup does at inference.
template <typename T>
Image generate(nn::Generator<T>& gen, const EmbeddedPair& embedded,
               const std::vector<T>& label, uint64_t noise_seed) {
  if (gen.spec().conditioning == nn::Conditioning::class_conditioned) gen.set_label(label);
  Tensor4<T> x = nn::image_to_tensor<T>(embedded.canvas);
  Rng rng(derive_seed(noise_seed, 0xd70ULL));
  Tensor4<T> out = gen.forward(x, nn::Mode::train, rng);
  return nn::tensor_to_image(out);
}

// One generator/discriminator pair plus optimizer state.
template <typename T>
class GanTrainer {
 public:
  GanTrainer(const TrainConfig& cfg, std::vector<std::string> class_names)
      : cfg_(cfg), class_names_(std::move(class_names)) {
    cfg_.validate();
    nn::Conditioning mode = cfg_.variant == Variant::conditioned
                                ? nn::Conditioning::class_conditioned
                                : nn::Conditioning::class_independent;
    nn::GeneratorSpec gs;
    gs.base_channels = cfg_.base_channels;
    gs.depth = cfg_.depth;
    gs.k_classes = cfg_.k_classes;
    gs.conditioning = mode;
    gen_ = std::make_unique<nn::Generator<T>>(gs);
    nn::DiscriminatorSpec ds;
    ds.base_channels = cfg_.base_channels;
    ds.k_classes = cfg_.k_classes;
    ds.conditioning = mode;
    disc_ = std::make_unique<nn::Discriminator<T>>(ds);

    Rng init_rng(derive_seed(cfg_.seed, 1));
    gen_->init(init_rng);
    disc_->init(init_rng);
    AdamConfig<T> ac{static_cast<T>(cfg_.lr), static_cast<T>(cfg_.beta1),
                     static_cast<T>(cfg_.beta2), T(1e-8)};
    adam_g_ = Adam<T>(ac);
    adam_d_ = Adam<T>(ac);
    dropout_rng_ = Rng(derive_seed(cfg_.seed, 2));
    pad_rng_ = Rng(derive_seed(cfg_.seed, 3));
    pad_spec_ = gan::PadSpec::for_width(cfg_.image_width, cfg_.pad_enabled);
  }

  nn::Generator<T>& generator() { return *gen_; }
  nn::Discriminator<T>& discriminator() { return *disc_; }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  long long iteration() const { return iteration_; }

  StepLosses train_step(const data::PairSample& sample) {
    auto label = one_hot<T>(sample.class_id, cfg_.k_classes);
    if (cfg_.variant == Variant::conditioned) {
      gen_->set_label(label);
      disc_->set_label(label);
    }
    Tensor4<T> x = nn::image_to_tensor<T>(sample.x.canvas);
    Tensor4<T> y = nn::image_to_tensor<T>(sample.y);

    // Generator forward once; the same fake drives both updates.
    Tensor4<T> fake = gen_->forward(x, nn::Mode::train, dropout_rng_);

    StepLosses losses;

    // --- Discriminator update (generator frozen) ---
    disc_->zero_grads();
    {
      T d_loss = T(0);
      {
        auto [px, py, junk1, junk2] = pad_pair(x, y);
        Tensor4<T> scores = disc_->forward(px, py, nn::Mode::train, dropout_rng_);
        // real half: -mean log s
        Tensor4<T> gr(scores.n, scores.c, scores.h, scores.w);
        T nr = T(scores.size());
        for (size_t i = 0; i < scores.data.size(); ++i) {
          T s = gan::detail::clamp_score(scores.data[i]);
          d_loss -= std::log(s) / nr;
          gr.data[i] = -T(1) / (s * nr);
        }
        disc_->backward(gr);
      }
      {
        auto [px, pf, junk1, junk2] = pad_pair(x, fake);
        Tensor4<T> scores = disc_->forward(px, pf, nn::Mode::train, dropout_rng_);
        Tensor4<T> gf(scores.n, scores.c, scores.h, scores.w);
        T nf = T(scores.size());
        for (size_t i = 0; i < scores.data.size(); ++i) {
          T s = gan::detail::clamp_score(scores.data[i]);
          d_loss -= std::log(T(1) - s) / nf;
          gf.data[i] = T(1) / ((T(1) - s) * nf);
        }
        disc_->backward(gf);
      }
      losses.d = static_cast<float>(d_loss);
      if (cfg_.lr > 0) {
        auto entries = disc_->param_entries();
        adam_d_.step(entries);
      }
    }

    // --- Generator update (discriminator frozen) ---
    gen_->zero_grads();
    disc_->zero_grads();  // grads flow through D but are discarded
    {
      auto [px, pf, ctx_x, ctx_f] = pad_pair(x, fake);
      Tensor4<T> scores = disc_->forward(px, pf, nn::Mode::train, dropout_rng_);
      gan::GLoss<T> gl =
          gan::loss_g(scores, y, fake, gan::LossWeights<T>{static_cast<T>(cfg_.lambda)});
      losses.g_gan = static_cast<float>(gl.gan_term);
      losses.g_l1 = static_cast<float>(gl.l1_term);
      auto [g_cond, g_cand] = disc_->backward(gl.grad_scores);
      Tensor4<T> g_fake = gan::continuity_pad_backward(ctx_f, g_cand);
      for (size_t i = 0; i < g_fake.data.size(); ++i)
        g_fake.data[i] += gl.grad_generated.data[i];
      gen_->backward(g_fake);
      if (cfg_.lr > 0) {
        auto entries = gen_->param_entries();
        adam_g_.step(entries);
      }
    }

    ++iteration_;
    if (!std::isfinite(losses.d) || !std::isfinite(losses.g_gan) || !std::isfinite(losses.g_l1))
      throw TrainingDiverged(iteration_);
    return losses;
  }

  Checkpoint to_checkpoint() const {
    Checkpoint ckpt;
    ckpt.config_text = cfg_.echo(class_names_);
    // carry the sampler streams so a resumed run continues bit for bit
    std::ostringstream rs;
    rs << "dropout_rng=" << dropout_rng_ << "\npad_rng=" << pad_rng_ << "\n";
    ckpt.config_text += rs.str();
    ckpt.iteration = static_cast<uint64_t>(iteration_);
    auto add_net = [&](const std::string& prefix, auto& net) {
      for (auto& [name, p, g] : const_cast<std::decay_t<decltype(net)>&>(net).param_entries())
        ckpt.tensors.emplace_back(prefix + "." + name, p->template cast<float>());
      for (auto& [name, p] : const_cast<std::decay_t<decltype(net)>&>(net).buffer_entries())
        ckpt.tensors.emplace_back(prefix + ".buf." + name, p->template cast<float>());
    };
    add_net("gen", *gen_);
    add_net("disc", *disc_);
    auto add_adam = [&](const std::string& prefix, const Adam<T>& adam, auto& net) {
      auto entries = const_cast<std::decay_t<decltype(net)>&>(net).param_entries();
      auto& m = const_cast<Adam<T>&>(adam).first_moments();
      auto& v = const_cast<Adam<T>&>(adam).second_moments();
      for (size_t i = 0; i < m.size(); ++i) {
        ckpt.tensors.emplace_back(prefix + ".m." + std::get<0>(entries[i]),
                                  m[i].template cast<float>());
        ckpt.tensors.emplace_back(prefix + ".v." + std::get<0>(entries[i]),
                                  v[i].template cast<float>());
      }
      Tensor4<float> t(1, 1, 1, 1);
      t.data[0] = static_cast<float>(adam.step_count());
      ckpt.tensors.emplace_back(prefix + ".t", t);
    };
    add_adam("adam_g", adam_g_, *gen_);
    add_adam("adam_d", adam_d_, *disc_);
    return ckpt;
  }

  void restore(const Checkpoint& ckpt) {
    iteration_ = static_cast<long long>(ckpt.iteration);
    auto load_net = [&](const std::string& prefix, auto& net) {
      for (auto& [name, p, g] : net.param_entries()) copy_into(ckpt, prefix + "." + name, *p);
      for (auto& [name, p] : net.buffer_entries())
        copy_into(ckpt, prefix + ".buf." + name, *p);
    };
    load_net("gen", *gen_);
    load_net("disc", *disc_);
    auto load_adam = [&](const std::string& prefix, Adam<T>& adam, auto& net) {
      auto entries = net.param_entries();
      std::vector<Tensor4<T>> m, v;
      for (auto& [name, p, g] : entries) {
        Tensor4<T> mt(p->n, p->c, p->h, p->w), vt(p->n, p->c, p->h, p->w);
        copy_into(ckpt, prefix + ".m." + name, mt);
        copy_into(ckpt, prefix + ".v." + name, vt);
        m.push_back(std::move(mt));
        v.push_back(std::move(vt));
      }
      const Tensor4<float>* t = ckpt.find(prefix + ".t");
      if (!t) throw std::runtime_error("checkpoint missing " + prefix + ".t");
      adam.restore(static_cast<long long>(t->data[0]), std::move(m), std::move(v));
    };
    load_adam("adam_g", adam_g_, *gen_);
    load_adam("adam_d", adam_d_, *disc_);
    restore_rng(ckpt.config_text, "dropout_rng=", dropout_rng_);
    restore_rng(ckpt.config_text, "pad_rng=", pad_rng_);
  }

 private:
  static void restore_rng(const std::string& text, const std::string& key, Rng& rng) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
      if (line.rfind(key, 0) == 0) {
        std::istringstream state(line.substr(key.size()));
        state >> rng;
        return;
      }
  }

  template <typename U>
  static void copy_into(const Checkpoint& ckpt, const std::string& name, Tensor4<U>& dst) {
    const Tensor4<float>* src = ckpt.find(name);
    if (!src) throw std::runtime_error("checkpoint missing tensor " + name);
    if (src->size() != dst.size())
      throw std::runtime_error("checkpoint tensor size mismatch for " + name);
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] = static_cast<U>(src->data[i]);
  }

  // Pads condition and candidate with shared top/bottom columns. When
  // padding is disabled the tensors pass through untouched.
  std::tuple<Tensor4<T>, Tensor4<T>, gan::PadContext, gan::PadContext> pad_pair(
      const Tensor4<T>& a, const Tensor4<T>& b) {
    if (!pad_spec_.enabled) {
      gan::PadContext none;
      none.side_width = 0;
      none.in_h = a.h;
      none.in_w = a.w;
      for (int n = 0; n < a.n; ++n) {
        none.top_cols.push_back(0);
        none.bottom_cols.push_back(0);
      }
      return {a, b, none, none};
    }
    auto [top, bottom] = gan::sample_pad_columns(a.n, a.w, pad_rng_);
    auto [pa, ctx_a] = gan::continuity_pad_with(a, pad_spec_, top, bottom);
    auto [pb, ctx_b] = gan::continuity_pad_with(b, pad_spec_, top, bottom);
    return {std::move(pa), std::move(pb), std::move(ctx_a), std::move(ctx_b)};
  }

  TrainConfig cfg_;
  std::vector<std::string> class_names_;
  std::unique_ptr<nn::Generator<T>> gen_;
  std::unique_ptr<nn::Discriminator<T>> disc_;
  Adam<T> adam_g_, adam_d_;
  Rng dropout_rng_, pad_rng_;
  gan::PadSpec pad_spec_;
  long long iteration_ = 0;
};

// Fit orchestration over the three baseline variants. The shuffled sample
// order is a function of (seed, epoch) only, so conditioned / independent
// / specific runs at the same seed consume identical data streams.
template <typename T>
struct FitResult {
  // (name, trainer); one entry, or one per class for variant = specific.
  std::vector<std::pair<std::string, std::unique_ptr<GanTrainer<T>>>> trainers;
  LossHistory history;
};

template <typename T>
FitResult<T> fit(const std::vector<data::PairSample>& pairs,
                 const std::vector<std::string>& class_names, TrainConfig cfg) {
  if (pairs.empty()) throw std::invalid_argument("fit: empty dataset");
  cfg.validate();
  cfg.k_classes = static_cast<int>(class_names.size());

  FitResult<T> result;
  if (cfg.variant == Variant::specific) {
    for (size_t c = 0; c < class_names.size(); ++c) {
      TrainConfig sub = cfg;
      result.trainers.emplace_back(class_names[c],
                                   std::make_unique<GanTrainer<T>>(sub, class_names));
    }
  } else {
    result.trainers.emplace_back(variant_name(cfg.variant),
                                 std::make_unique<GanTrainer<T>>(cfg, class_names));
  }

  long long done = 0;
  for (uint64_t epoch = 0; done < cfg.iterations; ++epoch) {
    std::vector<size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, 100 + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (size_t idx : order) {
      if (done >= cfg.iterations) break;
      const auto& sample = pairs[idx];
      GanTrainer<T>& trainer = cfg.variant == Variant::specific
                                   ? *result.trainers[sample.class_id].second
                                   : *result.trainers[0].second;
      result.history.push_back(trainer.train_step(sample));
      ++done;
    }
  }
  return result;
}

// Parse the key=value config echo stored in a checkpoint back into a
// TrainConfig plus the class-name table.
inline TrainConfig config_from_echo(const std::string& text,
                                    std::vector<std::string>* class_names) {
  TrainConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "lr") cfg.lr = std::stod(val);
    else if (key == "beta1") cfg.beta1 = std::stod(val);
    else if (key == "beta2") cfg.beta2 = std::stod(val);
    else if (key == "batch_size") cfg.batch_size = std::stoi(val);
    else if (key == "iterations") cfg.iterations = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "pad") cfg.pad_enabled = val == "on";
    else if (key == "variant") cfg.variant = variant_from_name(val);
    else if (key == "lambda") cfg.lambda = std::stof(val);
    else if (key == "image_width") cfg.image_width = std::stoi(val);
    else if (key == "base_channels") cfg.base_channels = std::stoi(val);
    else if (key == "depth") cfg.depth = std::stoi(val);
    else if (key == "k_classes") cfg.k_classes = std::stoi(val);
    else if (key == "classes" && class_names) {
      class_names->clear();
      std::istringstream cs(val);
      std::string name;
      while (std::getline(cs, name, ','))
        if (!name.empty()) class_names->push_back(name);
    }
  }
  return cfg;
}

template <typename T>
std::unique_ptr<GanTrainer<T>> trainer_from_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::string> class_names;
  TrainConfig cfg = config_from_echo(ckpt.config_text, &class_names);
  auto trainer = std::make_unique<GanTrainer<T>>(cfg, class_names);
  trainer->restore(ckpt);
  return trainer;
}

// --- Classifier training --------------------------------------------------

struct ClassifierTrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double lr = 2e-3;
  uint64_t seed = 0;
};

template <typename T>
struct TrainedClassifier {
  std::unique_ptr<nn::Classifier<T>> net;
  std::vector<std::string> class_names;
};

template <typename T>
TrainedClassifier<T> fit_classifier(const std::vector<data::LabeledSnapshot>& samples,
                                    const std::vector<std::string>& class_names,
                                    const ClassifierTrainConfig& cfg,
                                    int base_channels = 16, int feature_dim = 32) {
  if (class_names.size() < 2)
    throw std::invalid_argument("fit_classifier: need >= 2 classes");
  if (samples.empty()) throw std::invalid_argument("fit_classifier: empty dataset");
  const int k = static_cast<int>(class_names.size());

  nn::ClassifierSpec spec;
  spec.input_width = samples[0].image.width;
  spec.input_height = samples[0].image.height;
  spec.image_channels = samples[0].image.channels;
  spec.k_classes = k;
  spec.base_channels = base_channels;
  spec.feature_dim = feature_dim;
  auto net = std::make_unique<nn::Classifier<T>>(spec);
  Rng init_rng(derive_seed(cfg.seed, 11));
  net->init(init_rng);
  Adam<T> adam(AdamConfig<T>{static_cast<T>(cfg.lr), T(0.9), T(0.999), T(1e-8)});
  Rng fwd_rng(derive_seed(cfg.seed, 12));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(samples.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, 200 + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t bs = std::min<size_t>(cfg.batch_size, order.size() - start);
      Tensor4<T> x(static_cast<int>(bs), spec.image_channels, spec.input_height,
                   spec.input_width);
      std::vector<int> labels(bs);
      for (size_t b = 0; b < bs; ++b) {
        const auto& s = samples[order[start + b]];
        Tensor4<T> one = nn::image_to_tensor<T>(s.image);
        std::copy(one.data.begin(), one.data.end(), x.data.begin() + b * one.size());
        labels[b] = s.class_id;
      }
      net->zero_grads();
      Tensor4<T> logits = net->forward(x, nn::Mode::train, fwd_rng);
      // softmax cross-entropy
      Tensor4<T> grad(logits.n, logits.c, 1, 1);
      for (int n = 0; n < logits.n; ++n) {
        T mx = logits.at(n, 0, 0, 0);
        for (int c = 1; c < k; ++c) mx = std::max(mx, logits.at(n, c, 0, 0));
        T denom = T(0);
        for (int c = 0; c < k; ++c) denom += std::exp(logits.at(n, c, 0, 0) - mx);
        for (int c = 0; c < k; ++c) {
          T p = std::exp(logits.at(n, c, 0, 0) - mx) / denom;
          grad.at(n, c, 0, 0) = (p - (c == labels[n] ? T(1) : T(0))) / T(logits.n);
        }
      }
      net->backward(grad);
      auto entries = net->param_entries();
      adam.step(entries);
    }
  }
  return {std::move(net), class_names};
}

// Classifier checkpoints share the container format with GAN checkpoints;
// the config block carries the architecture and the training target
// ("odi" for whole panoramas, "snapshot" for perspective views).
template <typename T>
Checkpoint classifier_to_checkpoint(TrainedClassifier<T>& clf, const std::string& target) {
  Checkpoint ckpt;
  const nn::ClassifierSpec& spec = clf.net->spec();
  std::ostringstream os;
  os << "type=classifier\ntarget=" << target << "\ninput_width=" << spec.input_width
     << "\ninput_height=" << spec.input_height << "\nimage_channels=" << spec.image_channels
     << "\nk_classes=" << spec.k_classes << "\nbase_channels=" << spec.base_channels
     << "\nfeature_dim=" << spec.feature_dim << "\nclasses=";
  for (size_t i = 0; i < clf.class_names.size(); ++i)
    os << (i ? "," : "") << clf.class_names[i];
  os << "\n";
  ckpt.config_text = os.str();
  for (auto& [name, p, g] : clf.net->param_entries())
    ckpt.tensors.emplace_back("clf." + name, p->template cast<float>());
  for (auto& [name, p] : clf.net->buffer_entries())
    ckpt.tensors.emplace_back("clf.buf." + name, p->template cast<float>());
  return ckpt;
}

// Returns the classifier plus its recorded target kind.
template <typename T>
std::pair<TrainedClassifier<T>, std::string> classifier_from_checkpoint(const Checkpoint& ckpt) {
  nn::ClassifierSpec spec;
  std::vector<std::string> class_names;
  std::string target, type;
  std::istringstream is(ckpt.config_text);
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "type") type = val;
    else if (key == "target") target = val;
    else if (key == "input_width") spec.input_width = std::stoi(val);
    else if (key == "input_height") spec.input_height = std::stoi(val);
    else if (key == "image_channels") spec.image_channels = std::stoi(val);
    else if (key == "k_classes") spec.k_classes = std::stoi(val);
    else if (key == "base_channels") spec.base_channels = std::stoi(val);
    else if (key == "feature_dim") spec.feature_dim = std::stoi(val);
    else if (key == "classes") {
      std::istringstream cs(val);
      std::string name;
      while (std::getline(cs, name, ','))
        if (!name.empty()) class_names.push_back(name);
    }
  }
  if (type != "classifier")
    throw std::runtime_error("checkpoint does not hold a classifier");
  TrainedClassifier<T> clf;
  clf.net = std::make_unique<nn::Classifier<T>>(spec);
  clf.class_names = std::move(class_names);
  auto copy_from = [&](const std::string& name, auto& dst) {
    const Tensor4<float>* src = ckpt.find(name);
    if (!src) throw std::runtime_error("checkpoint missing tensor " + name);
    if (src->size() != dst.size())
      throw std::runtime_error("checkpoint tensor size mismatch for " + name);
    for (size_t i = 0; i < dst.data.size(); ++i)
      dst.data[i] = static_cast<T>(src->data[i]);
  };
  for (auto& [name, p, g] : clf.net->param_entries()) copy_from("clf." + name, *p);
  for (auto& [name, p] : clf.net->buffer_entries()) copy_from("clf.buf." + name, *p);
  return {std::move(clf), std::move(target)};
}

}  // namespace odigen::train
