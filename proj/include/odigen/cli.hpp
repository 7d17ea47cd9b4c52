#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "odigen/dataset.hpp"
#include "odigen/evalkit.hpp"
#include "odigen/geometry.hpp"
#include "odigen/png_io.hpp"
#include "odigen/trainer.hpp"

// Command-line front end. Exit codes: 0 success, 2 usage error,
// 3 invalid arguments or inputs, 4 runtime failure (I/O, bad files,
// training divergence).
namespace odigen::cli {

namespace fs = std::filesystem;

namespace detail {

inline std::string numbered_path(const std::string& path, int rep, int reps) {
  if (reps <= 1) return path;
  fs::path p(path);
  fs::path stem = p.stem();
  return (p.parent_path() / (stem.string() + "_r" + std::to_string(rep) + p.extension().string()))
      .string();
}

// "ideal:<class-name>" or "classifier:<checkpoint path>"
inline int pick_class(const std::string& class_from, const Image& snapshot,
                      const std::vector<std::string>& class_names) {
  if (class_from.empty()) return 0;
  auto colon = class_from.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("--class-from must be ideal:<name> or classifier:<checkpoint>");
  std::string kind = class_from.substr(0, colon), arg = class_from.substr(colon + 1);
  if (kind == "ideal") {
    for (size_t i = 0; i < class_names.size(); ++i)
      if (class_names[i] == arg) return static_cast<int>(i);
    throw std::invalid_argument("unknown class name: " + arg);
  }
  if (kind == "classifier") {
    auto [clf, target] = train::classifier_from_checkpoint<float>(train::load_checkpoint(arg));
    eval::NetClassifier<float> net(std::move(clf));
    return net.classify(snapshot, 0).first;
  }
  throw std::invalid_argument("unknown --class-from kind: " + kind);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

inline void emit_json(const nlohmann::json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text(out, j.dump(2) + "\n");
  }
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
  CLI::App app{"360-degree panorama generation from a single snapshot"};
  app.require_subcommand(1);
  // key=value config file; keys are scoped per subcommand, either dotted
  // ("train.lr=1e-4") or under a "[train]" section. Command-line flags win.
  app.set_config("--config", "", "read options from a key=value config file");

  // --- synth-data ---------------------------------------------------------
  auto* synth = app.add_subcommand("synth-data", "write a synthetic panorama corpus");
  std::string synth_out;
  int synth_classes = 3, synth_per_class = 10, synth_width = 64;
  uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output corpus directory")->required();
  synth->add_option("--classes", synth_classes, "number of classes")->check(CLI::PositiveNumber);
  synth->add_option("--per-class", synth_per_class, "panoramas per class")
      ->check(CLI::PositiveNumber);
  synth->add_option("--width", synth_width, "panorama width (height = width/2)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "master seed");
  synth->callback([&] {
    data::OdiCorpus corpus = data::make_synth_corpus(synth_classes, synth_per_class, synth_width,
                                                     synth_width / 2, synth_seed);
    for (const auto& item : corpus.items) {
      fs::path dir = fs::path(synth_out) / corpus.class_names[item.class_id];
      fs::create_directories(dir);
      std::ostringstream name;
      name << "img" << std::setw(4) << std::setfill('0')
           << (&item - corpus.items.data()) % synth_per_class << ".png";
      write_png(item.image, (dir / name.str()).string());
    }
    std::cout << "wrote " << corpus.items.size() << " panoramas in "
              << corpus.class_names.size() << " classes to " << synth_out << "\n";
  });

  // --- prepare ------------------------------------------------------------
  auto* prep = app.add_subcommand("prepare", "build train/test snapshot-panorama pair caches");
  std::string prep_data, prep_out;
  int prep_width = 512, prep_min_class = 1, prep_cap = 0;
  double prep_frac = 0.8, prep_lon = 0.0, prep_lat = 0.0;
  uint64_t prep_seed = 0;
  prep->add_option("--data", prep_data, "corpus root (class subdirectories of PNGs)")->required();
  prep->add_option("--out", prep_out, "output directory")->required();
  prep->add_option("--width", prep_width, "working panorama width")->check(CLI::PositiveNumber);
  prep->add_option("--min-class-size", prep_min_class, "drop classes smaller than this");
  prep->add_option("--cap", prep_cap, "cap images per class (0 = no cap)");
  prep->add_option("--train-frac", prep_frac, "train fraction of each class");
  prep->add_option("--split-seed", prep_seed, "split shuffle seed");
  prep->add_option("--lon", prep_lon, "camera longitude, degrees");
  prep->add_option("--lat", prep_lat, "camera latitude, degrees");
  prep->callback([&] {
    data::LoadReport report;
    data::OdiCorpus corpus = data::load_corpus(prep_data, &report, prep_min_class);
    if (corpus.items.empty()) throw std::invalid_argument("no usable panoramas in " + prep_data);
    corpus = data::downsample(corpus, prep_width);
    if (prep_cap > 0) corpus = data::cap_per_class(corpus, prep_cap, prep_seed);
    auto [train_set, test_set] = data::split(corpus, prep_frac, prep_seed);
    geom::CameraPose pose{prep_lon * geom::kPi / 180.0, prep_lat * geom::kPi / 180.0};
    pose.validate();
    geom::SnapshotGeometry g = data::default_geometry(prep_width);
    auto train_pairs = data::make_pairs(train_set, pose, g);
    auto test_pairs = data::make_pairs(test_set, pose, g);
    data::save_pair_cache(train_pairs, corpus.class_names, (fs::path(prep_out) / "train").string());
    data::save_pair_cache(test_pairs, corpus.class_names, (fs::path(prep_out) / "test").string());
    std::cout << "classes: " << corpus.class_names.size() << "\ntrain pairs: "
              << train_pairs.size() << "\ntest pairs: " << test_pairs.size()
              << "\nrejected files: " << report.rejected_files.size()
              << "\nskipped classes: " << report.skipped_classes.size() << "\n";
  });

  // --- train --------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "train the panorama generator");
  std::string tr_data, tr_out, tr_variant = "conditioned";
  train::TrainConfig tr_cfg;
  tr->add_option("--data", tr_data, "pair cache directory (from prepare)")->required();
  tr->add_option("--out", tr_out, "output directory")->required();
  tr->add_option("--variant", tr_variant, "conditioned | independent | specific")
      ->check(CLI::IsMember({"conditioned", "independent", "specific"}));
  tr->add_option("--iters", tr_cfg.iterations, "training iterations");
  tr->add_option("--seed", tr_cfg.seed, "master seed");
  tr->add_option("--lr", tr_cfg.lr, "Adam learning rate");
  tr->add_option("--lambda", tr_cfg.lambda, "L1 loss weight");
  tr->add_option("--base-channels", tr_cfg.base_channels, "first-layer channel count");
  tr->add_option("--depth", tr_cfg.depth, "encoder depth");
  tr->add_flag("--pad,!--no-pad", tr_cfg.pad_enabled, "continuity padding");
  tr->callback([&] {
    auto [pairs, class_names] = data::load_pair_cache(tr_data);
    if (pairs.empty()) throw std::invalid_argument("empty pair cache: " + tr_data);
    tr_cfg.variant = train::variant_from_name(tr_variant);
    tr_cfg.image_width = pairs[0].x.canvas.width;
    tr_cfg.k_classes = static_cast<int>(class_names.size());
    tr_cfg.validate();
    fs::create_directories(tr_out);
    detail::write_text((fs::path(tr_out) / "config.txt").string(), tr_cfg.echo(class_names));
    auto result = train::fit<float>(pairs, class_names, tr_cfg);
    std::ostringstream hist;
    hist << "iter,d,g_gan,g_l1\n";
    for (size_t i = 0; i < result.history.size(); ++i)
      hist << i << "," << result.history[i].d << "," << result.history[i].g_gan << ","
           << result.history[i].g_l1 << "\n";
    detail::write_text((fs::path(tr_out) / "history.csv").string(), hist.str());
    for (auto& [name, trainer] : result.trainers) {
      std::string path = (fs::path(tr_out) / (name + ".ckpt")).string();
      train::save_checkpoint(trainer->to_checkpoint(), path);
      std::cout << "saved " << path << " after " << trainer->iteration() << " iterations\n";
    }
  });

  // --- train-classifier ---------------------------------------------------
  auto* tc = app.add_subcommand("train-classifier", "train a scene classifier");
  std::string tc_data, tc_out, tc_target = "odi";
  int tc_width = 64, tc_base = 16, tc_features = 32;
  train::ClassifierTrainConfig tc_cfg;
  tc->add_option("--data", tc_data, "corpus root (class subdirectories of PNGs)")->required();
  tc->add_option("--out", tc_out, "output checkpoint file")->required();
  tc->add_option("--target", tc_target, "odi = whole panoramas, snapshot = perspective views")
      ->check(CLI::IsMember({"odi", "snapshot"}));
  tc->add_option("--width", tc_width, "working panorama width")->check(CLI::PositiveNumber);
  tc->add_option("--epochs", tc_cfg.epochs, "training epochs");
  tc->add_option("--batch", tc_cfg.batch_size, "batch size");
  tc->add_option("--lr", tc_cfg.lr, "Adam learning rate");
  tc->add_option("--seed", tc_cfg.seed, "master seed");
  tc->add_option("--base-channels", tc_base, "first-layer channel count");
  tc->add_option("--feature-dim", tc_features, "embedding width");
  tc->callback([&] {
    data::OdiCorpus corpus = data::load_corpus(tc_data);
    if (corpus.items.empty()) throw std::invalid_argument("no usable panoramas in " + tc_data);
    corpus = data::downsample(corpus, tc_width);
    std::vector<data::LabeledSnapshot> samples;
    if (tc_target == "odi") {
      for (const auto& item : corpus.items) samples.push_back({item.image, item.class_id});
    } else {
      samples = data::classifier_views(corpus, data::default_geometry(tc_width));
    }
    auto trained = train::fit_classifier<float>(samples, corpus.class_names, tc_cfg, tc_base,
                                                tc_features);
    if (fs::path(tc_out).has_parent_path())
      fs::create_directories(fs::path(tc_out).parent_path());
    train::save_checkpoint(train::classifier_to_checkpoint(trained, tc_target), tc_out);
    std::cout << "saved classifier (" << tc_target << ", " << samples.size() << " samples) to "
              << tc_out << "\n";
  });

  // --- generate -----------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "generate panoramas from one snapshot");
  std::string gen_ckpt, gen_input, gen_out, gen_class_from;
  int gen_reps = 1;
  uint64_t gen_seed = 0;
  double gen_lon = 0.0, gen_lat = 0.0;
  gen->add_option("--checkpoint", gen_ckpt, "generator checkpoint")->required();
  gen->add_option("--input", gen_input, "input snapshot PNG")->required();
  gen->add_option("--out", gen_out, "output panorama PNG")->required();
  gen->add_option("--class-from", gen_class_from,
                  "ideal:<class name> or classifier:<checkpoint>");
  gen->add_option("--reps", gen_reps, "number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "noise seed");
  gen->add_option("--lon", gen_lon, "camera longitude, degrees");
  gen->add_option("--lat", gen_lat, "camera latitude, degrees");
  gen->callback([&] {
    auto trainer = train::trainer_from_checkpoint<float>(train::load_checkpoint(gen_ckpt));
    const train::TrainConfig& cfg = trainer->config();
    geom::SnapshotGeometry g = data::default_geometry(cfg.image_width);
    Image snap = read_png(gen_input);
    if (snap.width != g.w1 || snap.height != g.h1)
      throw std::invalid_argument("input snapshot must be " + std::to_string(g.w1) + "x" +
                                  std::to_string(g.h1) + " for this checkpoint");
    geom::CameraPose pose{gen_lon * geom::kPi / 180.0, gen_lat * geom::kPi / 180.0};
    pose.validate();
    EmbeddedPair pair = geom::embed_snapshot(snap, pose, g, cfg.image_width, cfg.image_width / 2);
    int class_id = detail::pick_class(gen_class_from, snap, trainer->class_names());
    auto label = train::one_hot<float>(class_id, cfg.k_classes);
    for (int r = 0; r < gen_reps; ++r) {
      Image odi =
          train::generate(trainer->generator(), pair, label, derive_seed(gen_seed, r));
      write_png(odi, detail::numbered_path(gen_out, r, gen_reps));
    }
    std::cout << "generated " << gen_reps << " panorama(s) as class "
              << trainer->class_names().at(class_id) << "\n";
  });

  // --- reproject ----------------------------------------------------------
  auto* rep = app.add_subcommand("reproject", "extract a perspective view from a panorama");
  std::string rep_input, rep_out;
  double rep_lon = 0.0, rep_lat = 0.0;
  rep->add_option("--input", rep_input, "equirectangular PNG")->required();
  rep->add_option("--out", rep_out, "output snapshot PNG")->required();
  rep->add_option("--lon", rep_lon, "view longitude, degrees");
  rep->add_option("--lat", rep_lat, "view latitude, degrees");
  rep->callback([&] {
    Image odi = read_png(rep_input);
    if (!odi.is_equirect())
      throw std::invalid_argument("input is not a 2:1 equirectangular image");
    geom::CameraPose pose{rep_lon * geom::kPi / 180.0, rep_lat * geom::kPi / 180.0};
    pose.validate();
    Image snap = geom::extract_snapshot(odi, pose, data::default_geometry(odi.width));
    write_png(snap, rep_out);
    std::cout << "wrote " << snap.width << "x" << snap.height << " view to " << rep_out << "\n";
  });

  // --- evaluate -----------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "evaluate a generator on a test pair cache");
  std::string ev_method, ev_data, ev_ckpt, ev_clf, ev_out;
  int ev_reps = 5, ev_dirs = 10;
  uint64_t ev_seed = 0;
  bool ev_ideal = false;
  ev->add_option("--method", ev_method, "continuity | fid | odi | views")
      ->required()
      ->check(CLI::IsMember({"continuity", "fid", "odi", "views"}));
  ev->add_option("--data", ev_data, "test pair cache directory")->required();
  ev->add_option("--checkpoint", ev_ckpt, "generator checkpoint")->required();
  ev->add_option("--classifier", ev_clf, "classifier checkpoint (fid, odi, views)");
  ev->add_flag("--ideal", ev_ideal, "use the ideal classifier (odi, views)");
  ev->add_option("--reps", ev_reps, "generated panoramas per test pair")
      ->check(CLI::PositiveNumber);
  ev->add_option("--dirs", ev_dirs, "view directions (views method)")->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_seed, "noise seed");
  ev->add_option("--out", ev_out, "JSON report path (default: stdout)");
  ev->callback([&] {
    auto [pairs, class_names] = data::load_pair_cache(ev_data);
    if (pairs.empty()) throw std::invalid_argument("empty pair cache: " + ev_data);
    auto trainer = train::trainer_from_checkpoint<float>(train::load_checkpoint(ev_ckpt));
    nn::Generator<float>& g = trainer->generator();
    const int k = static_cast<int>(class_names.size());

    auto need_classifier = [&]() -> std::unique_ptr<eval::SceneClassifier> {
      if (ev_ideal) return std::make_unique<eval::IdealClassifier>(k);
      if (ev_clf.empty())
        throw std::invalid_argument("--classifier or --ideal required for method " + ev_method);
      auto [clf, target] =
          train::classifier_from_checkpoint<float>(train::load_checkpoint(ev_clf));
      return std::make_unique<eval::NetClassifier<float>>(std::move(clf));
    };

    nlohmann::json j;
    j["method"] = ev_method;
    if (ev_method == "continuity") {
      eval::ContinuityReport mean;
      int count = 0;
      for (size_t i = 0; i < pairs.size(); ++i)
        for (int r = 0; r < ev_reps; ++r) {
          Image odi = train::generate(g, pairs[i].x, train::one_hot<float>(pairs[i].class_id, k),
                                      derive_seed(ev_seed, i * 131 + r));
          eval::ContinuityReport rep = eval::continuity_metrics(odi);
          mean.sigma_top += rep.sigma_top;
          mean.sigma_bottom += rep.sigma_bottom;
          mean.sigma_lr += rep.sigma_lr;
          ++count;
        }
      mean.sigma_top /= count;
      mean.sigma_bottom /= count;
      mean.sigma_lr /= count;
      j["n_images"] = count;
      j.update(eval::to_json(mean));
    } else if (ev_method == "fid") {
      auto clf = need_classifier();
      std::vector<Image> real, generated;
      for (size_t i = 0; i < pairs.size(); ++i) {
        real.push_back(pairs[i].y);
        for (int r = 0; r < ev_reps; ++r)
          generated.push_back(train::generate(g, pairs[i].x,
                                              train::one_hot<float>(pairs[i].class_id, k),
                                              derive_seed(ev_seed, i * 131 + r)));
      }
      j.update(eval::to_json(eval::fid(eval::feature_matrix(*clf, real),
                                       eval::feature_matrix(*clf, generated))));
    } else if (ev_method == "odi") {
      auto clf = need_classifier();
      j = eval::to_json(
          eval::recognition_rate_odi(g, pairs, class_names, *clf, ev_reps, ev_seed));
    } else {
      auto clf = need_classifier();
      geom::SnapshotGeometry vg = data::default_geometry(pairs[0].y.width);
      j = eval::to_json(eval::recognition_rate_views(g, pairs, class_names, *clf, vg, ev_dirs,
                                                     ev_reps, ev_seed));
    }
    detail::emit_json(j, ev_out);
  });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

inline int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace odigen::cli
