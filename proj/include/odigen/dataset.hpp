#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "odigen/geometry.hpp"
#include "odigen/image.hpp"
#include "odigen/png_io.hpp"
#include "odigen/rng.hpp"

namespace odigen::data {

namespace fs = std::filesystem;

struct OdiCorpus {
  struct Item {
    Image image;
    int class_id = 0;
    std::string source;
  };
  std::vector<Item> items;
  std::vector<std::string> class_names;

  std::vector<size_t> indices_of_class(int class_id) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < items.size(); ++i)
      if (items[i].class_id == class_id) out.push_back(i);
    return out;
  }
};

struct LoadReport {
  std::vector<std::string> rejected_files;  // non-2:1 or unreadable
  std::vector<std::string> skipped_classes;
};

// Corpus layout: <root>/<class_name>/*.png, class ids assigned in
// alphabetical class-name order, files loaded in name order.
inline OdiCorpus load_corpus(const std::string& root, LoadReport* report = nullptr,
                             int min_class_size = 1) {
  if (!fs::is_directory(root)) throw std::invalid_argument("load_corpus: no such dir " + root);
  std::vector<std::string> class_dirs;
  for (auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_dirs.push_back(e.path().filename().string());
  std::sort(class_dirs.begin(), class_dirs.end());

  OdiCorpus corpus;
  for (const auto& cls : class_dirs) {
    std::vector<std::string> files;
    for (auto& e : fs::directory_iterator(fs::path(root) / cls))
      if (e.is_regular_file() && e.path().extension() == ".png")
        files.push_back(e.path().string());
    std::sort(files.begin(), files.end());

    std::vector<OdiCorpus::Item> loaded;
    for (const auto& f : files) {
      try {
        Image img = read_png(f);
        if (!img.is_equirect()) {
          if (report) report->rejected_files.push_back(f);
          continue;
        }
        loaded.push_back({std::move(img), 0, f});
      } catch (const std::exception&) {
        if (report) report->rejected_files.push_back(f);
      }
    }
    if (loaded.empty() || static_cast<int>(loaded.size()) < min_class_size) {
      if (report) report->skipped_classes.push_back(cls);
      continue;
    }
    int id = static_cast<int>(corpus.class_names.size());
    corpus.class_names.push_back(cls);
    for (auto& item : loaded) {
      item.class_id = id;
      corpus.items.push_back(std::move(item));
    }
  }
  return corpus;
}

// Exact area-average resample; only downscaling is supported.
inline Image downsample_image(const Image& src, int dst_w, int dst_h) {
  if (dst_w > src.width || dst_h > src.height)
    throw std::invalid_argument("downsample: upscaling requested");
  Image dst(dst_w, dst_h, src.channels);
  double sx = static_cast<double>(src.width) / dst_w;
  double sy = static_cast<double>(src.height) / dst_h;
  for (int c = 0; c < src.channels; ++c)
    for (int y = 0; y < dst_h; ++y) {
      double y0 = y * sy, y1 = (y + 1) * sy;
      for (int x = 0; x < dst_w; ++x) {
        double x0 = x * sx, x1 = (x + 1) * sx;
        double acc = 0.0;
        for (int yy = static_cast<int>(std::floor(y0)); yy < static_cast<int>(std::ceil(y1));
             ++yy) {
          double hy = std::min<double>(y1, yy + 1) - std::max<double>(y0, yy);
          if (hy <= 0) continue;
          for (int xx = static_cast<int>(std::floor(x0)); xx < static_cast<int>(std::ceil(x1));
               ++xx) {
            double hx = std::min<double>(x1, xx + 1) - std::max<double>(x0, xx);
            if (hx <= 0) continue;
            acc += hx * hy * src.at(c, std::min(yy, src.height - 1), std::min(xx, src.width - 1));
          }
        }
        dst.at(c, y, x) = static_cast<float>(acc / (sx * sy));
      }
    }
  return dst;
}

inline OdiCorpus downsample(const OdiCorpus& corpus, int target_width = 512) {
  OdiCorpus out;
  out.class_names = corpus.class_names;
  for (const auto& item : corpus.items)
    out.items.push_back(
        {downsample_image(item.image, target_width, target_width / 2), item.class_id,
         item.source});
  return out;
}

namespace detail {
// Small HSV->RGB helper for class-distinct base colors.
inline void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  h = h - std::floor(h);
  double i = std::floor(h * 6.0);
  double f = h * 6.0 - i;
  double p = v * (1 - s), q = v * (1 - f * s), t = v * (1 - (1 - f) * s);
  switch (static_cast<int>(i) % 6) {
    case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
    case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
    case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
    case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
    case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
    default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
  }
}
}  // namespace detail

// Deterministic band-limited panorama with exact wrap continuity: all
// horizontal structure is built from integer-cycle sinusoids of the angle
// 2*pi*u/(width-1), so column 0 equals column width-1 bit for bit.
// Classes differ in base hue, horizontal frequency and horizon height.
inline Image synth_panorama(int class_id, uint64_t seed, int width, int height) {
  if (width != 2 * height) throw std::invalid_argument("synth_panorama: width != 2*height");
  Rng rng(derive_seed(seed, 0x5c1eULL + static_cast<uint64_t>(class_id)));

  double sky_rgb[3], ground_rgb[3];
  double hue = 0.61803398875 * class_id;
  detail::hsv_to_rgb(hue, 0.55, 0.85, sky_rgb);
  detail::hsv_to_rgb(hue + 0.35, 0.5, 0.45, ground_rgb);
  int freq = (class_id % 5) + 1;
  double horizon = 0.40 + 0.06 * (class_id % 4) + uniform<double>(rng, -0.01, 0.01);
  double phase = uniform<double>(rng, 0.0, 2.0 * geom::kPi);
  double phase2 = uniform<double>(rng, 0.0, 2.0 * geom::kPi);
  // Modest per-image amplitudes: most of the signal is the deterministic
  // class structure, so a conditional model can fit a class quickly while
  // images within a class remain distinct.
  double amp = uniform<double>(rng, 0.02, 0.045);
  double amp2 = uniform<double>(rng, 0.01, 0.02);
  double ripple = uniform<double>(rng, 0.005, 0.015);

  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    double fy = static_cast<double>(y) / (height - 1);
    // Smooth sky-to-ground transition around the per-image horizon.
    double blend = 1.0 / (1.0 + std::exp(-(fy - horizon) * 14.0));
    for (int x = 0; x < width; ++x) {
      double psi = 2.0 * geom::kPi * x / (width - 1);
      double wave = amp * std::sin(freq * psi + phase) +
                    amp2 * std::sin((freq + 2) * psi + phase2) * std::cos(3.0 * fy);
      double bumps = ripple * std::sin(2.0 * psi + phase) * std::sin(5.0 * fy + phase2);
      for (int c = 0; c < 3; ++c) {
        double base = sky_rgb[c] * (1.0 - blend) + ground_rgb[c] * blend;
        double v = base + wave + bumps - 0.15 * fy * fy;
        img.at(c, y, x) = static_cast<float>(std::clamp(v, 0.02, 0.98));
      }
    }
  }
  return img;
}

inline OdiCorpus make_synth_corpus(int classes, int per_class, int width, int height,
                                   uint64_t seed) {
  OdiCorpus corpus;
  for (int c = 0; c < classes; ++c) {
    std::ostringstream name;
    name << "class" << (c < 10 ? "0" : "") << c;
    corpus.class_names.push_back(name.str());
  }
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i)
      corpus.items.push_back({synth_panorama(c, derive_seed(seed, i), width, height), c,
                              corpus.class_names[c] + "/" + std::to_string(i)});
  return corpus;
}

struct PairSample {
  EmbeddedPair x;
  Image y;
  int class_id = 0;
  std::string source;
};

// Snapshot geometry proportional to the reference (W1=400, H1=300, L=100
// at width 512), which preserves the view angles at any resolution.
inline geom::SnapshotGeometry default_geometry(int odi_width) {
  geom::SnapshotGeometry g;
  g.w1 = static_cast<int>(std::lround(400.0 * odi_width / 512.0));
  g.h1 = static_cast<int>(std::lround(300.0 * odi_width / 512.0));
  g.l = 100.0 * odi_width / 512.0;
  return g;
}

inline std::vector<PairSample> make_pairs(const OdiCorpus& corpus,
                                          const geom::CameraPose& pose,
                                          const geom::SnapshotGeometry& g) {
  std::vector<PairSample> out;
  for (const auto& item : corpus.items) {
    Image snap = geom::extract_snapshot(item.image, pose, g);
    EmbeddedPair pair =
        geom::embed_snapshot(snap, pose, g, item.image.width, item.image.height);
    out.push_back({std::move(pair), item.image, item.class_id, item.source});
  }
  return out;
}

// Stratified split; fractional counts round toward train. Classes with a
// single image go wholly to train.
inline std::pair<OdiCorpus, OdiCorpus> split(const OdiCorpus& corpus, double train_fraction,
                                             uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: fraction out of (0,1)");
  OdiCorpus train, test;
  train.class_names = test.class_names = corpus.class_names;
  for (int c = 0; c < static_cast<int>(corpus.class_names.size()); ++c) {
    auto idx = corpus.indices_of_class(c);
    Rng rng(derive_seed(seed, 1000 + c));
    std::shuffle(idx.begin(), idx.end(), rng);
    size_t n_train =
        std::min(idx.size(), static_cast<size_t>(std::ceil(train_fraction * idx.size())));
    if (idx.size() < 2) n_train = idx.size();
    for (size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? train : test).items.push_back(corpus.items[idx[i]]);
  }
  return {std::move(train), std::move(test)};
}

inline OdiCorpus cap_per_class(const OdiCorpus& corpus, int max_n, uint64_t seed) {
  if (max_n < 1) throw std::invalid_argument("cap_per_class: max_n < 1");
  OdiCorpus out;
  out.class_names = corpus.class_names;
  for (int c = 0; c < static_cast<int>(corpus.class_names.size()); ++c) {
    auto idx = corpus.indices_of_class(c);
    Rng rng(derive_seed(seed, 2000 + c));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(idx.size(), static_cast<size_t>(max_n)));
    std::sort(idx.begin(), idx.end());  // keep original ordering among survivors
    for (size_t i : idx) out.items.push_back(corpus.items[i]);
  }
  return out;
}

struct LabeledSnapshot {
  Image image;
  int class_id = 0;
};

inline std::vector<LabeledSnapshot> classifier_views(
    const OdiCorpus& corpus, const geom::SnapshotGeometry& g,
    const std::vector<double>& longitudes_deg = {0, 60, 120, 180, 240, 300}) {
  std::vector<LabeledSnapshot> out;
  for (const auto& item : corpus.items)
    for (double lon : longitudes_deg) {
      double theta = lon * geom::kPi / 180.0;
      while (theta >= geom::kPi) theta -= 2.0 * geom::kPi;
      geom::CameraPose pose{theta, 0.0};
      out.push_back({geom::extract_snapshot(item.image, pose, g), item.class_id});
    }
  return out;
}

// --- Pair cache on disk: PNG triples plus a manifest ---------------------

inline void save_pair_cache(const std::vector<PairSample>& pairs,
                            const std::vector<std::string>& class_names,
                            const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw std::runtime_error("save_pair_cache: cannot write manifest");
  for (size_t i = 0; i < pairs.size(); ++i) {
    std::ostringstream id;
    id << "pair" << std::setw(5) << std::setfill('0') << i;
    write_png(pairs[i].x.canvas, (fs::path(dir) / (id.str() + "_canvas.png")).string());
    write_mask_png(pairs[i].x.mask, (fs::path(dir) / (id.str() + "_mask.png")).string());
    write_png(pairs[i].y, (fs::path(dir) / (id.str() + "_target.png")).string());
    manifest << id.str() << " " << class_names[pairs[i].class_id] << "\n";
  }
}

inline std::pair<std::vector<PairSample>, std::vector<std::string>> load_pair_cache(
    const std::string& dir) {
  std::ifstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw std::runtime_error("load_pair_cache: cannot read manifest in " + dir);
  std::vector<std::pair<std::string, std::string>> rows;
  std::vector<std::string> class_names;
  std::string id, cls;
  while (manifest >> id >> cls) {
    rows.emplace_back(id, cls);
    if (std::find(class_names.begin(), class_names.end(), cls) == class_names.end())
      class_names.push_back(cls);
  }
  std::sort(class_names.begin(), class_names.end());
  std::vector<PairSample> pairs;
  for (auto& [rid, rcls] : rows) {
    PairSample s;
    s.x.canvas = read_png((fs::path(dir) / (rid + "_canvas.png")).string());
    s.x.mask = read_mask_png((fs::path(dir) / (rid + "_mask.png")).string());
    s.y = read_png((fs::path(dir) / (rid + "_target.png")).string());
    s.class_id = static_cast<int>(
        std::find(class_names.begin(), class_names.end(), rcls) - class_names.begin());
    s.source = rid;
    pairs.push_back(std::move(s));
  }
  return {std::move(pairs), std::move(class_names)};
}

}  // namespace odigen::data
