#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "odigen/dataset.hpp"
#include "odigen/geometry.hpp"
#include "odigen/image.hpp"
#include "odigen/network.hpp"
#include "odigen/trainer.hpp"

namespace odigen::eval {

// --- Continuity metrics ---------------------------------------------------

// Seam statistics on the 0-255 value scale, averaged over color channels:
// population std of the top and bottom rows, and the RMS left/right
// column difference. Lower is better.
struct ContinuityReport {
  double sigma_top = 0, sigma_bottom = 0, sigma_lr = 0;
};

inline ContinuityReport continuity_metrics(const Image& odi) {
  ContinuityReport rep;
  auto row_std = [&](int row) {
    double acc = 0;
    for (int c = 0; c < odi.channels; ++c) {
      double mean = 0;
      for (int x = 0; x < odi.width; ++x) mean += odi.at(c, row, x) * 255.0;
      mean /= odi.width;
      double var = 0;
      for (int x = 0; x < odi.width; ++x) {
        double d = odi.at(c, row, x) * 255.0 - mean;
        var += d * d;
      }
      acc += std::sqrt(var / odi.width);
    }
    return acc / odi.channels;
  };
  rep.sigma_top = row_std(0);
  rep.sigma_bottom = row_std(odi.height - 1);
  double acc = 0;
  for (int c = 0; c < odi.channels; ++c) {
    double ss = 0;
    for (int y = 0; y < odi.height; ++y) {
      double d = (odi.at(c, y, 0) - odi.at(c, y, odi.width - 1)) * 255.0;
      ss += d * d;
    }
    acc += std::sqrt(ss / odi.height);
  }
  rep.sigma_lr = acc / odi.channels;
  return rep;
}

// --- Modified FID ---------------------------------------------------------

struct FIDResult {
  double value = 0;
  int feature_dim = 0;
  int n_real = 0, n_gen = 0;
  bool full_rank = true;  // false when sample counts <= feature dim
};

// Frechet distance between Gaussian fits of two feature sets (rows =
// samples). The matrix square root comes from the eigendecomposition of
// S_g^{1/2} S_r S_g^{1/2}; eigenvalues below -1e-6 raise, small negatives
// clamp to zero.
inline FIDResult fid(const Eigen::MatrixXd& features_real, const Eigen::MatrixXd& features_gen) {
  if (features_real.cols() != features_gen.cols())
    throw std::invalid_argument("fid: feature dimension mismatch");
  const int n = static_cast<int>(features_real.rows());
  const int m = static_cast<int>(features_gen.rows());
  const int d = static_cast<int>(features_real.cols());
  if (n < 2 || m < 2) throw std::invalid_argument("fid: need >= 2 samples per set");

  Eigen::VectorXd mu_r = features_real.colwise().mean();
  Eigen::VectorXd mu_g = features_gen.colwise().mean();
  Eigen::MatrixXd cr = features_real.rowwise() - mu_r.transpose();
  Eigen::MatrixXd cg = features_gen.rowwise() - mu_g.transpose();
  Eigen::MatrixXd sig_r = cr.transpose() * cr / (n - 1);
  Eigen::MatrixXd sig_g = cg.transpose() * cg / (m - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_g(sig_g);
  Eigen::VectorXd eg = es_g.eigenvalues();
  for (int i = 0; i < d; ++i) {
    if (eg[i] < -1e-6) throw std::runtime_error("fid: covariance not PSD");
    eg[i] = std::sqrt(std::max(eg[i], 0.0));
  }
  Eigen::MatrixXd sqrt_g = es_g.eigenvectors() * eg.asDiagonal() * es_g.eigenvectors().transpose();

  Eigen::MatrixXd middle = sqrt_g * sig_r * sqrt_g;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(middle);
  double tr_sqrt = 0;
  for (int i = 0; i < d; ++i) {
    double ev = es_m.eigenvalues()[i];
    if (ev < -1e-6) throw std::runtime_error("fid: cross term not PSD");
    tr_sqrt += std::sqrt(std::max(ev, 0.0));
  }

  FIDResult res;
  res.value = (mu_r - mu_g).squaredNorm() + sig_r.trace() + sig_g.trace() - 2.0 * tr_sqrt;
  res.feature_dim = d;
  res.n_real = n;
  res.n_gen = m;
  res.full_rank = n > d && m > d;
  return res;
}

// --- Classification -------------------------------------------------------

// Pluggable scene-recognition backbone. The ground-truth label travels
// with every call so the "ideal recognition" variant can pass it through.
class SceneClassifier {
 public:
  virtual ~SceneClassifier() = default;
  virtual std::pair<int, std::vector<double>> classify(const Image& img, int true_label) = 0;
  virtual std::vector<double> features(const Image& img) = 0;
  virtual int num_classes() const = 0;
};

class IdealClassifier : public SceneClassifier {
 public:
  explicit IdealClassifier(int k) : k_(k) {}
  std::pair<int, std::vector<double>> classify(const Image&, int true_label) override {
    std::vector<double> probs(k_, 0.0);
    probs.at(true_label) = 1.0;
    return {true_label, probs};
  }
  std::vector<double> features(const Image&) override {
    throw std::logic_error("IdealClassifier has no feature embedding");
  }
  int num_classes() const override { return k_; }

 private:
  int k_;
};

template <typename T>
class NetClassifier : public SceneClassifier {
 public:
  explicit NetClassifier(train::TrainedClassifier<T> trained)
      : trained_(std::move(trained)) {}

  std::pair<int, std::vector<double>> classify(const Image& img, int /*true_label*/) override {
    Tensor4<T> logits = run(img);
    const int k = trained_.net->spec().k_classes;
    double mx = logits.data[0];
    for (int c = 1; c < k; ++c) mx = std::max(mx, static_cast<double>(logits.data[c]));
    std::vector<double> probs(k);
    double denom = 0;
    for (int c = 0; c < k; ++c) {
      probs[c] = std::exp(static_cast<double>(logits.data[c]) - mx);
      denom += probs[c];
    }
    int best = 0;
    for (int c = 0; c < k; ++c) {
      probs[c] /= denom;
      // ties break toward the lowest class id
      if (probs[c] > probs[best]) best = c;
    }
    return {best, probs};
  }

  std::vector<double> features(const Image& img) override {
    run(img);
    const Tensor4<T>& f = trained_.net->features();
    return std::vector<double>(f.data.begin(), f.data.end());
  }

  int num_classes() const override { return trained_.net->spec().k_classes; }
  const std::vector<std::string>& class_names() const { return trained_.class_names; }
  train::TrainedClassifier<T>& trained() { return trained_; }

 private:
  Tensor4<T> run(const Image& img) {
    Rng rng(0);  // eval path draws no randomness
    Tensor4<T> x = nn::image_to_tensor<T>(img);
    return trained_.net->forward(x, nn::Mode::eval, rng);
  }
  train::TrainedClassifier<T> trained_;
};

// --- Recognition-rate protocols -------------------------------------------

struct RecognitionReport {
  std::map<std::string, double> per_class;  // keyed by class name
  double macro_average = 0;
  int repetitions = 0;
  std::string method;  // "odi" or "views"
};

inline nlohmann::json to_json(const RecognitionReport& rep) {
  nlohmann::json j;
  j["method"] = rep.method;
  j["repetitions"] = rep.repetitions;
  j["macro_average"] = rep.macro_average;
  j["per_class"] = rep.per_class;
  return j;
}

inline nlohmann::json to_json(const ContinuityReport& rep) {
  return {{"sigma_top", rep.sigma_top},
          {"sigma_bottom", rep.sigma_bottom},
          {"sigma_lr", rep.sigma_lr}};
}

inline nlohmann::json to_json(const FIDResult& res) {
  return {{"fid", res.value},
          {"feature_dim", res.feature_dim},
          {"n_real", res.n_real},
          {"n_gen", res.n_gen},
          {"full_rank", res.full_rank}};
}

namespace detail {
inline RecognitionReport finalize(std::map<std::string, std::pair<int, int>>& counts,
                                  int repetitions, const std::string& method) {
  RecognitionReport rep;
  rep.repetitions = repetitions;
  rep.method = method;
  double acc = 0;
  for (auto& [name, hits_total] : counts) {
    double rate = hits_total.second ? static_cast<double>(hits_total.first) / hits_total.second
                                    : 0.0;
    rep.per_class[name] = rate;
    acc += rate;
  }
  rep.macro_average = counts.empty() ? 0.0 : acc / counts.size();
  return rep;
}
}  // namespace detail

// Generate `repetitions` ODIs per test pair and classify each whole
// panorama. Conditioning labels come from the ground-truth class.
template <typename T>
RecognitionReport recognition_rate_odi(nn::Generator<T>& gen,
                                       const std::vector<data::PairSample>& test_pairs,
                                       const std::vector<std::string>& class_names,
                                       SceneClassifier& odi_classifier, int repetitions = 5,
                                       uint64_t seed = 0) {
  if (test_pairs.empty()) throw std::invalid_argument("recognition_rate_odi: empty test set");
  const int k = static_cast<int>(class_names.size());
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& name : class_names) counts[name] = {0, 0};
  for (size_t i = 0; i < test_pairs.size(); ++i) {
    const auto& pair = test_pairs[i];
    for (int r = 0; r < repetitions; ++r) {
      Image odi = train::generate(gen, pair.x, train::one_hot<T>(pair.class_id, k),
                                  derive_seed(seed, i * 131 + r));
      auto [pred, probs] = odi_classifier.classify(odi, pair.class_id);
      auto& [hits, total] = counts[class_names[pair.class_id]];
      hits += pred == pair.class_id;
      ++total;
    }
  }
  return detail::finalize(counts, repetitions, "odi");
}

// Extract snapshots from each generated ODI in `n_dirs` evenly spaced
// horizontal directions and classify the views; correctness pools over
// views x repetitions within each class.
template <typename T>
RecognitionReport recognition_rate_views(nn::Generator<T>& gen,
                                         const std::vector<data::PairSample>& test_pairs,
                                         const std::vector<std::string>& class_names,
                                         SceneClassifier& snapshot_classifier,
                                         const geom::SnapshotGeometry& view_geom,
                                         int n_dirs = 10, int repetitions = 5,
                                         uint64_t seed = 0) {
  if (test_pairs.empty())
    throw std::invalid_argument("recognition_rate_views: empty test set");
  const int k = static_cast<int>(class_names.size());
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& name : class_names) counts[name] = {0, 0};
  for (size_t i = 0; i < test_pairs.size(); ++i) {
    const auto& pair = test_pairs[i];
    for (int r = 0; r < repetitions; ++r) {
      Image odi = train::generate(gen, pair.x, train::one_hot<T>(pair.class_id, k),
                                  derive_seed(seed, i * 131 + r));
      for (int dir = 0; dir < n_dirs; ++dir) {
        double theta = 2.0 * geom::kPi * dir / n_dirs;
        if (theta >= geom::kPi) theta -= 2.0 * geom::kPi;
        Image view = geom::extract_snapshot(odi, {theta, 0.0}, view_geom);
        auto [pred, probs] = snapshot_classifier.classify(view, pair.class_id);
        auto& [hits, total] = counts[class_names[pair.class_id]];
        hits += pred == pair.class_id;
        ++total;
      }
    }
  }
  return detail::finalize(counts, repetitions, "views");
}

// Feature matrix for FID: one row per image from the classifier backbone.
inline Eigen::MatrixXd feature_matrix(SceneClassifier& clf, const std::vector<Image>& images) {
  if (images.empty()) throw std::invalid_argument("feature_matrix: no images");
  std::vector<double> first = clf.features(images[0]);
  Eigen::MatrixXd out(static_cast<int>(images.size()), static_cast<int>(first.size()));
  for (size_t i = 0; i < images.size(); ++i) {
    std::vector<double> f = i == 0 ? first : clf.features(images[i]);
    for (size_t j = 0; j < f.size(); ++j) out(static_cast<int>(i), static_cast<int>(j)) = f[j];
  }
  return out;
}

}  // namespace odigen::eval
