#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "odigen/dataset.hpp"

using namespace odigen;
using namespace odigen::data;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  TempDir(const char* tag) {
    path = fs::temp_directory_path() / (std::string("odigen_test_") + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("synth_panorama: determinism, wrap continuity, value range") {
  Image a = synth_panorama(2, 7, 64, 32);
  Image b = synth_panorama(2, 7, 64, 32);
  CHECK(a.pixels == b.pixels);
  Image c = synth_panorama(2, 8, 64, 32);
  CHECK(a.pixels != c.pixels);

  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < 32; ++y)
      CHECK(a.at(ch, y, 0) == a.at(ch, y, 63));

  CHECK(a.values_valid());
  for (float v : a.pixels) {
    CHECK(v >= 0.02f);
    CHECK(v <= 0.98f);
  }
  CHECK_THROWS_AS(synth_panorama(0, 0, 64, 31), std::invalid_argument);
}

TEST_CASE("synth_panorama: classes are visually distinct") {
  // mean RGB separates classes well beyond noise
  double means[4][3] = {};
  for (int cls = 0; cls < 4; ++cls) {
    Image img = synth_panorama(cls, 1, 64, 32);
    for (int ch = 0; ch < 3; ++ch) {
      double acc = 0;
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) acc += img.at(ch, y, x);
      means[cls][ch] = acc / (64.0 * 32.0);
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double d = 0;
      for (int ch = 0; ch < 3; ++ch)
        d += std::abs(means[i][ch] - means[j][ch]);
      CHECK(d > 0.05);
    }
}

TEST_CASE("make_synth_corpus: names, counts, labels") {
  OdiCorpus corpus = make_synth_corpus(3, 4, 64, 32, 5);
  CHECK(corpus.class_names == std::vector<std::string>{"class00", "class01", "class02"});
  CHECK(corpus.items.size() == 12);
  for (int c = 0; c < 3; ++c) CHECK(corpus.indices_of_class(c).size() == 4);
  for (const auto& item : corpus.items) CHECK(item.image.is_equirect());
}

TEST_CASE("downsample_image: checkerboard averages to one half") {
  Image src(8, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) src.at(0, y, x) = static_cast<float>((x + y) % 2);
  Image dst = downsample_image(src, 4, 4);
  for (float v : dst.pixels) CHECK(v == doctest::Approx(0.5f));

  Image flat(6, 6, 3, 0.37f);
  Image down = downsample_image(flat, 4, 4);  // non-integer ratio
  for (float v : down.pixels) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));

  CHECK_THROWS_AS(downsample_image(src, 16, 16), std::invalid_argument);
}

TEST_CASE("downsample corpus to target width") {
  OdiCorpus corpus = make_synth_corpus(1, 2, 128, 64, 1);
  OdiCorpus small = downsample(corpus, 64);
  CHECK(small.items.size() == 2);
  for (const auto& item : small.items) {
    CHECK(item.image.width == 64);
    CHECK(item.image.height == 32);
  }
}

TEST_CASE("load_corpus: alphabetical ids, rejects, min class size") {
  TempDir tmp("corpus");
  Image pano = synth_panorama(0, 1, 64, 32);
  Image square(32, 32, 3, 0.5f);  // not 2:1 -> rejected
  fs::create_directories(tmp.path / "beach");
  fs::create_directories(tmp.path / "alley");
  fs::create_directories(tmp.path / "tiny");
  write_png(pano, (tmp.path / "beach" / "b1.png").string());
  write_png(pano, (tmp.path / "beach" / "b2.png").string());
  write_png(square, (tmp.path / "beach" / "bad.png").string());
  write_png(pano, (tmp.path / "alley" / "a1.png").string());
  write_png(pano, (tmp.path / "alley" / "a2.png").string());
  write_png(pano, (tmp.path / "tiny" / "t1.png").string());

  LoadReport report;
  OdiCorpus corpus = load_corpus(tmp.path.string(), &report, 2);
  CHECK(corpus.class_names == std::vector<std::string>{"alley", "beach"});
  CHECK(corpus.items.size() == 4);
  CHECK(report.rejected_files.size() == 1);
  CHECK(report.skipped_classes == std::vector<std::string>{"tiny"});
  CHECK(corpus.items[0].class_id == 0);
  CHECK(corpus.items[2].class_id == 1);

  CHECK_THROWS_AS(load_corpus((tmp.path / "nope").string()), std::invalid_argument);
}

TEST_CASE("default_geometry scales with resolution") {
  auto g = default_geometry(512);
  CHECK(g.w1 == 400);
  CHECK(g.h1 == 300);
  CHECK(g.l == doctest::Approx(100.0));
  auto h = default_geometry(256);
  CHECK(h.w1 == 200);
  CHECK(h.h1 == 150);
  CHECK(h.l == doctest::Approx(50.0));
}

TEST_CASE("make_pairs: shapes, blank fill, target identity") {
  OdiCorpus corpus = make_synth_corpus(2, 2, 64, 32, 3);
  geom::CameraPose pose{0.0, 0.0};
  auto g = default_geometry(64);
  auto pairs = make_pairs(corpus, pose, g);
  CHECK(pairs.size() == 4);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    CHECK(p.x.canvas.width == 64);
    CHECK(p.x.canvas.height == 32);
    CHECK(p.y.pixels == corpus.items[i].image.pixels);
    CHECK(p.class_id == corpus.items[i].class_id);
    size_t set = p.x.mask.count_set();
    CHECK(set > 0);
    CHECK(set < static_cast<size_t>(64 * 32));
    // outside the mask the canvas carries the neutral fill
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 64; ++x)
        if (p.x.mask.at(y, x) < 0.5f)
          for (int c = 0; c < 3; ++c) CHECK(p.x.canvas.at(c, y, x) == geom::kBlankFill);
    // inside, it agrees with the panorama closely (resampling round trip)
    CHECK(psnr(p.x.canvas, p.y, &p.x.mask) > 30.0);
  }
}

TEST_CASE("split: stratified arithmetic, disjoint, singletons to train") {
  OdiCorpus corpus = make_synth_corpus(2, 10, 64, 32, 9);
  auto [tr, te] = split(corpus, 0.8, 11);
  CHECK(tr.items.size() == 16);
  CHECK(te.items.size() == 4);
  for (int c = 0; c < 2; ++c) {
    CHECK(tr.indices_of_class(c).size() == 8);
    CHECK(te.indices_of_class(c).size() == 2);
  }
  std::set<std::string> seen;
  for (const auto& i : tr.items) seen.insert(i.source);
  for (const auto& i : te.items) CHECK(seen.count(i.source) == 0);

  // determinism
  auto [tr2, te2] = split(corpus, 0.8, 11);
  for (size_t i = 0; i < tr.items.size(); ++i) CHECK(tr.items[i].source == tr2.items[i].source);

  OdiCorpus single = make_synth_corpus(1, 1, 64, 32, 2);
  auto [str, ste] = split(single, 0.5, 3);
  CHECK(str.items.size() == 1);
  CHECK(ste.items.empty());

  CHECK_THROWS_AS(split(corpus, 1.0, 0), std::invalid_argument);
}

TEST_CASE("cap_per_class limits every class") {
  OdiCorpus corpus = make_synth_corpus(3, 5, 64, 32, 13);
  OdiCorpus capped = cap_per_class(corpus, 2, 17);
  for (int c = 0; c < 3; ++c) CHECK(capped.indices_of_class(c).size() == 2);
  OdiCorpus loose = cap_per_class(corpus, 50, 17);
  CHECK(loose.items.size() == corpus.items.size());
  CHECK_THROWS_AS(cap_per_class(corpus, 0, 0), std::invalid_argument);
}

TEST_CASE("classifier_views: six longitudes per panorama") {
  OdiCorpus corpus = make_synth_corpus(2, 3, 64, 32, 19);
  auto g = default_geometry(64);
  auto views = classifier_views(corpus, g);
  CHECK(views.size() == 6 * corpus.items.size());
  for (size_t i = 0; i < views.size(); ++i) {
    CHECK(views[i].class_id == corpus.items[i / 6].class_id);
    CHECK(views[i].image.width == g.w1);
    CHECK(views[i].image.height == g.h1);
  }
}

TEST_CASE("pair cache round trip") {
  TempDir tmp("cache");
  OdiCorpus corpus = make_synth_corpus(2, 2, 64, 32, 23);
  auto pairs = make_pairs(corpus, geom::CameraPose{0.0, 0.0}, default_geometry(64));
  save_pair_cache(pairs, corpus.class_names, tmp.path.string());

  auto [loaded, names] = load_pair_cache(tmp.path.string());
  CHECK(names == corpus.class_names);
  CHECK(loaded.size() == pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(loaded[i].class_id == pairs[i].class_id);
    CHECK(loaded[i].x.mask.values == pairs[i].x.mask.values);
    // 8-bit PNG quantization bounds the pixel error
    for (size_t j = 0; j < pairs[i].y.pixels.size(); ++j) {
      CHECK(std::abs(loaded[i].y.pixels[j] - pairs[i].y.pixels[j]) <= 0.5f / 255.0f + 1e-6f);
      CHECK(std::abs(loaded[i].x.canvas.pixels[j] - pairs[i].x.canvas.pixels[j]) <=
            0.5f / 255.0f + 1e-6f);
    }
  }

  CHECK_THROWS_AS(load_pair_cache((tmp.path / "missing").string()), std::runtime_error);
}
