// Acceptance suite: one self-contained check per release criterion, each
// printing a single PASS/FAIL line. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "odigen/evalkit.hpp"
#include "odigen/geometry.hpp"
#include "odigen/layers.hpp"
#include "odigen/losses.hpp"
#include "odigen/padding.hpp"
#include "odigen/png_io.hpp"
#include "odigen/trainer.hpp"

using namespace odigen;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> check;  // fills a detail string
};

bool expect(bool ok, std::string& detail, const std::string& msg) {
  if (!ok && detail.empty()) detail = msg;
  return ok;
}

// --------------------------------------------------------------------------
// shared fixtures for the training-based criteria

struct TrainedModels {
  std::vector<data::PairSample> train_pairs, test_pairs;
  std::vector<std::string> class_names;
  data::OdiCorpus train_corpus, test_corpus;
  // per seed {0,1,2}
  std::vector<std::unique_ptr<train::GanTrainer<float>>> conditioned, pad_off, independent;
  std::vector<train::LossHistory> conditioned_history;
  double train_seconds = 0;  // the three conditioned runs only
};

train::TrainConfig smoke_config(uint64_t seed) {
  train::TrainConfig cfg;
  cfg.image_width = 64;
  cfg.depth = 5;
  cfg.base_channels = 32;
  cfg.iterations = 200;
  cfg.batch_size = 1;
  cfg.seed = seed;
  return cfg;
}

TrainedModels& models() {
  static TrainedModels m = [] {
    TrainedModels t;
    data::OdiCorpus corpus = data::make_synth_corpus(3, 20, 64, 32, 7);
    auto [train_set, test_set] = data::split(corpus, 0.8, 17);
    t.train_corpus = train_set;
    t.test_corpus = test_set;
    t.class_names = corpus.class_names;
    geom::CameraPose pose{0.0, 0.0};
    geom::SnapshotGeometry g = data::default_geometry(64);
    t.train_pairs = data::make_pairs(train_set, pose, g);
    t.test_pairs = data::make_pairs(test_set, pose, g);

    auto t0 = std::chrono::steady_clock::now();
    for (uint64_t seed = 0; seed < 3; ++seed) {
      train::TrainConfig cfg = smoke_config(seed);
      auto r = train::fit<float>(t.train_pairs, t.class_names, cfg);
      t.conditioned_history.push_back(r.history);
      t.conditioned.push_back(std::move(r.trainers[0].second));
    }
    t.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (uint64_t seed = 0; seed < 3; ++seed) {
      train::TrainConfig cfg = smoke_config(seed);
      cfg.pad_enabled = false;
      t.pad_off.push_back(std::move(train::fit<float>(t.train_pairs, t.class_names, cfg)
                                        .trainers[0].second));
      cfg = smoke_config(seed);
      cfg.variant = train::Variant::independent;
      t.independent.push_back(std::move(train::fit<float>(t.train_pairs, t.class_names, cfg)
                                            .trainers[0].second));
    }
    return t;
  }();
  return m;
}

// --------------------------------------------------------------------------

bool c1_geometry(std::string& d) {
  auto angles = geom::view_angles({400, 300, 100.0});
  bool ok = expect(std::abs(angles[0] - 2.2142974356) < 1e-9 &&
                       std::abs(angles[1] - 1.9655874464) < 1e-9,
                   d, "view angles off");
  Rng rng(1);
  double worst_basis = 0, worst_round = 0;
  for (int i = 0; i < 10000; ++i) {
    geom::CameraPose pose{uniform<double>(rng, -geom::kPi, geom::kPi * 0.999999),
                          uniform<double>(rng, -geom::kPi / 2, geom::kPi / 2)};
    geom::Basis3 b = geom::camera_basis(pose);
    worst_basis = std::max({worst_basis, std::abs(b.x_n.norm() - 1.0),
                            std::abs(b.y_n.norm() - 1.0), std::abs(b.z_n.norm() - 1.0),
                            std::abs(b.x_n.dot(b.y_n)), std::abs(b.x_n.dot(b.z_n)),
                            std::abs(b.y_n.dot(b.z_n))});

    const int w = 4096, h = 2048;
    double u = uniform<double>(rng, 0.0, w);
    double v = uniform<double>(rng, 1.0, h - 1.0);
    auto [u2, v2] = geom::equirect_from_dir(geom::dir_from_equirect(u, v, w, h), w, h);
    double du = std::abs(u - u2);
    du = std::min(du, w - du);  // seam wrap
    worst_round = std::max({worst_round, du, std::abs(v - v2)});
  }
  ok &= expect(worst_basis < 1e-12, d, "basis orthonormality " + std::to_string(worst_basis));
  ok &= expect(worst_round < 1e-9, d, "pixel round trip " + std::to_string(worst_round));
  return ok;
}

Image smooth_snapshot(int w, int h, uint64_t seed) {
  Rng rng(seed);
  Image img(w, h, 3);
  for (int c = 0; c < 3; ++c) {
    // At most 3/4 of a cycle across the image: the embed/extract round trip
    // resamples the snapshot at roughly 2.2x coarser angular resolution, and
    // double bilinear interpolation of higher-frequency content cannot meet
    // the 35 dB bar regardless of canvas size.
    double fx = uniform<double>(rng, 0.25, 0.75), fy = uniform<double>(rng, 0.25, 0.75);
    double px = uniform<double>(rng, 0.0, 6.28), py = uniform<double>(rng, 0.0, 6.28);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.at(c, y, x) = static_cast<float>(
            0.5 + 0.25 * std::sin(2 * geom::kPi * fx * x / w + px) *
                      std::cos(2 * geom::kPi * fy * y / h + py));
  }
  return img;
}

bool c2_resampling(std::string& d) {
  geom::SnapshotGeometry g = data::default_geometry(64);
  geom::CameraPose pose{0.3, -0.2};
  double worst_psnr = 1e9;
  for (uint64_t s = 0; s < 20; ++s) {
    Image snap = smooth_snapshot(g.w1, g.h1, 100 + s);
    EmbeddedPair pair = geom::embed_snapshot(snap, pose, g, 64, 32);
    Image back = geom::extract_snapshot(pair.canvas, pose, g);
    // Masked-region PSNR: extract the embedded mask through the same
    // sampler and keep only pixels whose bilinear support lies entirely
    // inside the mask; a partially supported pixel blends canvas fill.
    Image mask_img(64, 32, 1);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 64; ++x) mask_img.at(0, y, x) = pair.mask.at(y, x);
    Image mask_back = geom::extract_snapshot(mask_img, pose, g);
    double se = 0;
    long n = 0;
    for (int y = 0; y < g.h1; ++y)
      for (int x = 0; x < g.w1; ++x) {
        if (mask_back.at(0, y, x) < 0.999999f) continue;
        for (int c = 0; c < 3; ++c) {
          double e = snap.at(c, y, x) - back.at(c, y, x);
          se += e * e;
          ++n;
        }
      }
    if (n < 3 * g.w1 * g.h1 / 2) return expect(false, d, "masked region too small");
    worst_psnr = std::min(worst_psnr, 10.0 * std::log10(static_cast<double>(n) / se));
  }
  bool ok = expect(worst_psnr >= 35.0, d,
                   "round-trip PSNR " + std::to_string(worst_psnr) + " dB");

  // scalar brute-force oracle for extract on 32x16 panoramas
  double worst_px = 0;
  for (uint64_t s = 0; s < 3; ++s) {
    Image odi = smooth_snapshot(32, 16, 200 + s);  // any smooth 2:1 image
    geom::SnapshotGeometry sg = data::default_geometry(32);
    geom::CameraPose p{0.5 * (static_cast<double>(s) - 1.0), 0.15};
    Image got = geom::extract_snapshot(odi, p, sg);
    // independent reimplementation, straight from the projection formulas
    double st = std::sin(p.theta_c), ct = std::cos(p.theta_c);
    double sp = std::sin(p.phi_c), cp = std::cos(p.phi_c);
    double xn[3] = {-st, -ct, 0.0};
    double yn[3] = {-sp * ct, sp * st, cp};
    double zn[3] = {xn[1] * yn[2] - xn[2] * yn[1], xn[2] * yn[0] - xn[0] * yn[2],
                    xn[0] * yn[1] - xn[1] * yn[0]};
    for (int b = 0; b < sg.h1; ++b)
      for (int a = 0; a < sg.w1; ++a) {
        double da = a - (sg.w1 - 1) / 2.0, db = (sg.h1 - 1) / 2.0 - b;
        double P[3];
        for (int i = 0; i < 3; ++i) P[i] = sg.l * zn[i] + da * xn[i] + db * yn[i];
        double n = std::sqrt(P[0] * P[0] + P[1] * P[1] + P[2] * P[2]);
        double theta = std::atan2(P[1], -P[0]);
        double phi = std::asin(-P[2] / n);
        double u = (theta + geom::kPi) * 32 / (2 * geom::kPi);
        double v = (phi + geom::kPi / 2) * 16 / geom::kPi;
        for (int c = 0; c < 3; ++c) {
          // bilinear with longitude wrap, pixel centers at half-integers
          double px2 = u - 0.5, py2 = v - 0.5;
          int x0 = static_cast<int>(std::floor(px2)), y0 = static_cast<int>(std::floor(py2));
          double ax = px2 - x0, ay = py2 - y0;
          auto wx = [&](int xi) { return ((xi % 32) + 32) % 32; };
          auto cy = [&](int yi) { return std::min(std::max(yi, 0), 15); };
          double v00 = odi.at(c, cy(y0), wx(x0)), v01 = odi.at(c, cy(y0), wx(x0 + 1));
          double v10 = odi.at(c, cy(y0 + 1), wx(x0)), v11 = odi.at(c, cy(y0 + 1), wx(x0 + 1));
          double want = (1 - ay) * ((1 - ax) * v00 + ax * v01) +
                        ay * ((1 - ax) * v10 + ax * v11);
          worst_px = std::max(worst_px, std::abs(want - got.at(c, b, a)));
        }
      }
  }
  ok &= expect(worst_px < 1e-6, d, "extract oracle deviation " + std::to_string(worst_px));
  return ok;
}

bool c3_padding(std::string& d) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    int w = uniform_int(rng, 10, 64), h = uniform_int(rng, 4, 24);
    int c = uniform_int(rng, 1, 3), n = uniform_int(rng, 1, 2);
    gan::PadSpec spec = gan::PadSpec::for_width(w);
    if (spec.side_width < 1) spec.side_width = 1;
    if (spec.side_width > w) continue;
    Tensor4<double> img(n, c, h, w);
    for (double& v : img.data) v = uniform<double>(rng, 0.0, 1.0);
    auto [p, ctx] = gan::continuity_pad(img, spec, rng);
    int sw = spec.side_width;
    if (!expect(p.h == h + 2 && p.w == w + 2 * sw, d, "padded shape wrong")) return false;
    for (int ni = 0; ni < n; ++ni)
      for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < sw; ++x)
            if (p.at(ni, ci, y + 1, x) != img.at(ni, ci, y, w - sw + x) ||
                p.at(ni, ci, y + 1, w + sw + x) != img.at(ni, ci, y, x))
              return expect(false, d, "wrap region not bit-equal");
        for (int x = 0; x < p.w; ++x)
          if (p.at(ni, ci, 0, x) != p.at(ni, ci, 0, 0) ||
              p.at(ni, ci, p.h - 1, x) != p.at(ni, ci, p.h - 1, 0))
            return expect(false, d, "added row not constant");
      }
  }
  return true;
}

bool c4_gradients(std::string& d) {
  using namespace odigen::nn;
  double worst = 0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Tensor4<double> x(2, 4, 8, 8);
    Rng xr(400 + seed);
    for (double& v : x.data) {
      v = gaussian<double>(xr, 0.0, 1.0);
      if (std::abs(v) < 1e-3) v = 0.1;  // keep kinks off the stencil
    }
    auto boost = [](Layer<double>& l, uint64_t s) {
      Rng r(s);
      l.init(r);
      for (auto& [name, p, g] : l.param_entries())
        for (double& v : p->data) v *= 10.0;
    };
    std::vector<std::unique_ptr<Layer<double>>> layers;
    layers.push_back(std::make_unique<Conv<double>>(4, 3));
    layers.push_back(std::make_unique<Deconv<double>>(4, 3));
    layers.push_back(std::make_unique<BatchNorm<double>>(4));
    layers.push_back(std::make_unique<FullyConnected<double>>(4 * 8 * 8, 5));
    layers.push_back(std::make_unique<LeakyReLU<double>>(0.2));
    layers.push_back(std::make_unique<ReLU<double>>());
    layers.push_back(std::make_unique<Tanh<double>>());
    layers.push_back(std::make_unique<Sigmoid<double>>());
    layers.push_back(std::make_unique<Dropout<double>>(0.5, true));
    {
      auto att = std::make_unique<ChannelAttention<double>>(std::make_unique<Conv<double>>(4, 3),
                                                            3, 2);
      att->set_label({0.0, 1.0});
      layers.push_back(std::move(att));
    }
    {
      auto att = std::make_unique<ChannelAttention<double>>(
          std::make_unique<Deconv<double>>(4, 3), 3, 2);
      att->set_label({1.0, 0.0});
      layers.push_back(std::move(att));
    }
    for (auto& layer : layers) {
      boost(*layer, seed);
      worst = std::max(worst, grad_check(*layer, x, 1e-5, Mode::train, seed));
    }
  }
  return expect(worst < 1e-4, d, "worst relative error " + std::to_string(worst));
}

bool c5_losses(std::string& d) {
  Tensor4<double> half(1, 1, 2, 2, 0.5);
  auto l = gan::loss_d(half, half);
  bool ok = expect(std::abs(l.value - 2.0 * std::log(2.0)) < 1e-9, d, "loss_d(0.5,0.5)");
  Tensor4<double> target(1, 3, 4, 4, 0.7), same = target;
  auto g = gan::loss_g(half, target, same, gan::LossWeights<double>{100.0});
  ok &= expect(g.l1_term == 0.0, d, "l1 term nonzero for identical images");
  Tensor4<double> other(1, 3, 4, 4, 0.1);
  auto g0 = gan::loss_g(half, target, other, gan::LossWeights<double>{0.0});
  ok &= expect(g0.total == g0.gan_term, d, "lambda=0 total != gan term");
  return ok;
}

bool c6_metrics(std::string& d) {
  Rng rng(6);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    int w = uniform_int(rng, 4, 48), h = uniform_int(rng, 2, 24);
    Image img(w, h, 3);
    for (float& v : img.pixels) v = static_cast<float>(uniform<double>(rng, 0.0, 1.0));
    eval::ContinuityReport rep = eval::continuity_metrics(img);
    auto row_std = [&](int row) {
      double acc = 0;
      for (int c = 0; c < 3; ++c) {
        double mean = 0;
        for (int x = 0; x < w; ++x) mean += img.at(c, row, x) * 255.0;
        mean /= w;
        double var = 0;
        for (int x = 0; x < w; ++x) {
          double e = img.at(c, row, x) * 255.0 - mean;
          var += e * e;
        }
        acc += std::sqrt(var / w);
      }
      return acc / 3;
    };
    double lr = 0;
    for (int c = 0; c < 3; ++c) {
      double ss = 0;
      for (int y = 0; y < h; ++y) {
        double e = (img.at(c, y, 0) - img.at(c, y, w - 1)) * 255.0;
        ss += e * e;
      }
      lr += std::sqrt(ss / h);
    }
    worst = std::max({worst, std::abs(rep.sigma_top - row_std(0)),
                      std::abs(rep.sigma_bottom - row_std(h - 1)),
                      std::abs(rep.sigma_lr - lr / 3)});
  }
  bool ok = expect(worst < 1e-9, d, "continuity oracle deviation " + std::to_string(worst));

  Eigen::MatrixXd a(40, 2);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = gaussian<double>(rng, 0.0, 1.0);
  ok &= expect(eval::fid(a, a).value <= 1e-6, d, "fid(A,A) too large");
  Eigen::MatrixXd shifted = a;
  shifted.col(0).array() += 3.0;
  shifted.col(1).array() += 4.0;
  ok &= expect(std::abs(eval::fid(a, shifted).value - 25.0) < 0.25, d, "mean-shift fid");

  // design with exactly diagonal sample covariance
  Eigen::MatrixXd p(4, 2), q(4, 2);
  double s0[4] = {1, 1, -1, -1}, s1[4] = {1, -1, 1, -1};
  for (int i = 0; i < 4; ++i) {
    p(i, 0) = 1.0 + 0.6 * s0[i];
    p(i, 1) = -2.0 + 0.9 * s1[i];
    q(i, 0) = 1.4 + 0.2 * s0[i];
    q(i, 1) = -1.1 + 1.3 * s1[i];
  }
  auto sd = [](double amp) { return amp * std::sqrt(4.0 / 3.0); };
  double expected = 0.4 * 0.4 + 0.9 * 0.9 + std::pow(sd(0.6) - sd(0.2), 2) +
                    std::pow(sd(0.9) - sd(1.3), 2);
  double got = eval::fid(p, q).value;
  ok &= expect(std::abs(got - expected) < 0.01 * expected, d, "diagonal closed form");
  return ok;
}

bool c7_smoke_training(std::string& d) {
  TrainedModels& m = models();
  bool ok = true;
  for (int seed = 0; seed < 3; ++seed) {
    const train::LossHistory& h = m.conditioned_history[seed];
    double first = 0, last = 0;
    for (int i = 0; i < 20; ++i) {
      first += h[i].g_l1;
      last += h[h.size() - 20 + i].g_l1;
    }
    ok &= expect(last <= 0.5 * first, d,
                 "seed " + std::to_string(seed) + ": L1 " + std::to_string(first / 20) + " -> " +
                     std::to_string(last / 20));
  }
  ok &= expect(m.train_seconds < 600.0, d,
               "training took " + std::to_string(m.train_seconds) + " s");
  if (ok)
    d = "train time " + std::to_string(m.train_seconds) + " s for 3 seeds";
  return ok;
}

bool c8_padding_ablation(std::string& d) {
  TrainedModels& m = models();
  auto mean_sigma_lr = [&](std::vector<std::unique_ptr<train::GanTrainer<float>>>& ts) {
    double acc = 0;
    int count = 0;
    for (int seed = 0; seed < 3; ++seed)
      for (size_t i = 0; i < m.test_pairs.size(); ++i)
        for (int r = 0; r < 2; ++r) {
          Image odi = train::generate(
              ts[seed]->generator(), m.test_pairs[i].x,
              train::one_hot<float>(m.test_pairs[i].class_id, 3), derive_seed(50, i * 7 + r));
          acc += eval::continuity_metrics(odi).sigma_lr;
          ++count;
        }
    return acc / count;
  };
  double with_pad = mean_sigma_lr(m.conditioned);
  double without = mean_sigma_lr(m.pad_off);
  d = "sigma_LR pad-on " + std::to_string(with_pad) + " vs pad-off " + std::to_string(without);
  return with_pad < without;
}

bool c9_conditioning(std::string& d) {
  TrainedModels& m = models();
  // desk-scale ODI classifier on the real panoramas
  std::vector<data::LabeledSnapshot> train_odis, test_odis;
  for (const auto& item : m.train_corpus.items) train_odis.push_back({item.image, item.class_id});
  for (const auto& item : m.test_corpus.items) test_odis.push_back({item.image, item.class_id});
  train::ClassifierTrainConfig ccfg;
  ccfg.epochs = 25;
  ccfg.seed = 5;
  auto trained = train::fit_classifier<float>(train_odis, m.class_names, ccfg, 8, 16);
  eval::NetClassifier<float> clf(std::move(trained));
  int hits = 0;
  for (const auto& s : test_odis) hits += clf.classify(s.image, s.class_id).first == s.class_id;
  double acc = static_cast<double>(hits) / test_odis.size();
  if (!expect(acc >= 0.90, d, "classifier accuracy " + std::to_string(acc))) return false;

  double cond = 0, indep = 0;
  for (int seed = 0; seed < 3; ++seed) {
    cond += eval::recognition_rate_odi(m.conditioned[seed]->generator(), m.test_pairs,
                                       m.class_names, clf, 5, 90)
                .macro_average;
    indep += eval::recognition_rate_odi(m.independent[seed]->generator(), m.test_pairs,
                                        m.class_names, clf, 5, 90)
                 .macro_average;
  }
  cond /= 3;
  indep /= 3;
  bool ok = expect(cond >= indep, d,
                   "conditioned " + std::to_string(cond) + " < independent " +
                       std::to_string(indep));

  // flipping the conditioning label must change the output everywhere
  for (size_t i = 0; i < m.test_pairs.size(); ++i) {
    const auto& pair = m.test_pairs[i];
    Image a = train::generate(m.conditioned[0]->generator(), pair.x,
                              train::one_hot<float>(pair.class_id, 3), 60 + i);
    Image b = train::generate(m.conditioned[0]->generator(), pair.x,
                              train::one_hot<float>((pair.class_id + 1) % 3, 3), 60 + i);
    float diff = 0;
    for (size_t j = 0; j < a.pixels.size(); ++j)
      diff = std::max(diff, std::abs(a.pixels[j] - b.pixels[j]));
    ok &= expect(diff > 0.0f, d, "label flip left pair " + std::to_string(i) + " unchanged");
  }
  if (ok)
    d = "recognition conditioned " + std::to_string(cond) + " vs independent " +
        std::to_string(indep) + ", classifier acc " + std::to_string(acc);
  return ok;
}

bool c10_determinism(std::string& d) {
  data::OdiCorpus corpus = data::make_synth_corpus(2, 4, 64, 32, 31);
  auto pairs = data::make_pairs(corpus, geom::CameraPose{0.0, 0.0}, data::default_geometry(64));
  train::TrainConfig cfg;
  cfg.image_width = 64;
  cfg.depth = 4;
  cfg.base_channels = 8;
  cfg.iterations = 10;
  cfg.seed = 3;

  auto r1 = train::fit<float>(pairs, corpus.class_names, cfg);
  auto r2 = train::fit<float>(pairs, corpus.class_names, cfg);
  for (size_t i = 0; i < r1.history.size(); ++i)
    if (r1.history[i].d != r2.history[i].d || r1.history[i].g_gan != r2.history[i].g_gan ||
        r1.history[i].g_l1 != r2.history[i].g_l1)
      return expect(false, d, "loss histories differ at step " + std::to_string(i));

  auto& g1 = r1.trainers[0].second->generator();
  auto& g2 = r2.trainers[0].second->generator();
  Image a = train::generate(g1, pairs[0].x, train::one_hot<float>(0, 2), 5);
  Image b = train::generate(g2, pairs[0].x, train::one_hot<float>(0, 2), 5);
  if (a.pixels != b.pixels) return expect(false, d, "generated images differ across runs");

  fs::path tmp = fs::temp_directory_path() / "odigen_acceptance_c10";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  write_png(a, (tmp / "a.png").string());
  write_png(b, (tmp / "b.png").string());
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  };
  bool png_same = slurp(tmp / "a.png") == slurp(tmp / "b.png");

  train::save_checkpoint(r1.trainers[0].second->to_checkpoint(), (tmp / "m.ckpt").string());
  auto restored = train::trainer_from_checkpoint<float>(
      train::load_checkpoint((tmp / "m.ckpt").string()));
  Image c = train::generate(restored->generator(), pairs[0].x, train::one_hot<float>(0, 2), 5);
  fs::remove_all(tmp);
  if (!png_same) return expect(false, d, "PNG bytes differ across runs");
  if (c.pixels != a.pixels)
    return expect(false, d, "generation differs after checkpoint round trip");
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"geometry exactness (view angles, basis, round trips)", c1_geometry},
      {"resampling consistency (embed/extract PSNR, extract oracle)", c2_resampling},
      {"continuity padding bit-exactness", c3_padding},
      {"finite-difference gradient checks for every layer kind", c4_gradients},
      {"loss unit values", c5_losses},
      {"metric oracles (continuity, FID)", c6_metrics},
      {"smoke training convergence and runtime", c7_smoke_training},
      {"padding ablation lowers seam discontinuity", c8_padding_ablation},
      {"class conditioning helps recognition; labels matter", c9_conditioning},
      {"determinism and checkpoint persistence", c10_determinism},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2zu. %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), secs, detail.empty() ? "" : " -- ",
                detail.c_str());
    failures += !ok;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
