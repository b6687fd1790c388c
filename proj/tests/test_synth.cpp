#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "mi2gan/synth/dataset.hpp"
#include "support/test_oracles.hpp"

using namespace mi2gan;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("mi2gan_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("gen_scene is a pure function of seed and spec") {
  SceneSpec spec;
  Scene s1 = gen_scene(99, spec);
  Scene s2 = gen_scene(99, spec);
  REQUIRE(bitwise_equal(s1.content, s2.content));
  REQUIRE(bitwise_equal(s1.mask, s2.mask));
  Scene s3 = gen_scene(100, spec);
  REQUIRE_FALSE(bitwise_equal(s1.mask, s3.mask));
}

TEST_CASE("ellipse raster area matches pi*a*b within 8%") {
  Ellipse e{32.0, 32.0, 8.0, 6.0, 0.0, 1.0};
  Tensor<float> mask = rasterize_ellipse(64, 64, e);
  int64_t count = 0;
  for (int64_t i = 0; i < mask.numel(); ++i) count += mask[i] == 1.0f;
  const double expected = 3.141592653589793 * 8.0 * 6.0;  // ~150.8
  REQUIRE(std::abs(static_cast<double>(count) - expected) <= 0.08 * expected);

  // rotated ellipse keeps its area
  Ellipse er{32.0, 32.0, 8.0, 6.0, 1.1, 1.0};
  Tensor<float> mr = rasterize_ellipse(64, 64, er);
  int64_t count_r = 0;
  for (int64_t i = 0; i < mr.numel(); ++i) count_r += mr[i] == 1.0f;
  REQUIRE(std::abs(static_cast<double>(count_r) - expected) <= 0.08 * expected);
}

TEST_CASE("scene respects intensity bounds and mask/ellipse identity") {
  SceneSpec spec;
  spec.num_blobs = 1;
  spec.intensity_min = 1.0;
  spec.intensity_max = 1.0;
  for (uint64_t seed : {1ull, 17ull, 345ull}) {
    Scene s = gen_scene(seed, spec);
    float mx = -1.0f, mn = 2.0f;
    for (int64_t i = 0; i < s.content.numel(); ++i) {
      mx = std::max(mx, s.content[i]);
      mn = std::min(mn, s.content[i]);
    }
    REQUIRE(mx == 1.0f);  // blob intensity forced to 1
    REQUIRE(mn == 0.0f);  // clipped background floor
    // mask == union of ellipse interiors, background below the ceiling
    for (int64_t y = 0; y < spec.canvas_h; ++y)
      for (int64_t x = 0; x < spec.canvas_w; ++x) {
        bool inside = false;
        for (const auto& e : s.blobs)
          inside = inside || inside_ellipse(e, static_cast<double>(x), static_cast<double>(y));
        REQUIRE(s.mask[y * spec.canvas_w + x] == (inside ? 1.0f : 0.0f));
        if (!inside) REQUIRE(s.content[y * spec.canvas_w + x] <= kBackgroundMax);
      }
  }
}

TEST_CASE("invalid scene specs are rejected with diagnostics") {
  SceneSpec s;
  s.axis_max = 40.0;  // exceeds 64 canvas
  REQUIRE_THROWS_WITH(validate_scene_spec(s), Catch::Matchers::ContainsSubstring("exceeds canvas"));
  SceneSpec s2;
  s2.axis_min = 1.0;
  REQUIRE_THROWS_AS(validate_scene_spec(s2), ValueError);
  SceneSpec s3;
  s3.num_blobs = 0;
  REQUIRE_THROWS_AS(validate_scene_spec(s3), ValueError);
}

TEST_CASE("identity style renders 2c-1 per channel") {
  SceneSpec spec;
  Scene s = gen_scene(5, spec);
  Tensor<float> img = render_domain(s.content, default_style_a());
  const int64_t hw = spec.canvas_h * spec.canvas_w;
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t i = 0; i < hw; ++i)
      REQUIRE(img[c * hw + i] == Catch::Approx(2.0f * s.content[i] - 1.0f).margin(1e-6));
}

TEST_CASE("gamma 2 maps content 0.5 to pre-affine 0.25") {
  Tensor<float> content = Tensor<float>::full({4, 4}, 0.5f);
  DomainStyle style;
  style.gamma = 2.0;
  Tensor<float> img = render_domain(content, style);
  // affine(0.25) = -0.5
  for (int64_t i = 0; i < img.numel(); ++i) REQUIRE(img[i] == Catch::Approx(-0.5f).margin(1e-7));
}

TEST_CASE("default style pair is distinguishable but mask-invariant") {
  SceneSpec spec;
  for (uint64_t seed : {2ull, 3ull, 4ull}) {
    Scene s = gen_scene(seed, spec);
    Tensor<float> img_a = render_domain(s.content, default_style_a());
    Tensor<float> img_b = render_domain(s.content, default_style_b());
    // masks are untouched by rendering by construction; check the interior
    // mean intensity difference is well away from zero
    const int64_t hw = spec.canvas_h * spec.canvas_w;
    double diff = 0.0;
    int64_t count = 0;
    for (int64_t i = 0; i < hw; ++i) {
      if (s.mask[i] != 1.0f) continue;
      for (int64_t c = 0; c < 3; ++c)
        diff += std::abs(static_cast<double>(img_a[c * hw + i]) -
                         static_cast<double>(img_b[c * hw + i]));
      ++count;
    }
    diff /= static_cast<double>(3 * count);
    REQUIRE(diff >= 0.05);
    // range invariant
    for (int64_t i = 0; i < img_b.numel(); ++i) {
      REQUIRE(img_b[i] >= -1.0f);
      REQUIRE(img_b[i] <= 1.0f);
    }
  }
}

TEST_CASE("style inversion recovers rendered content") {
  SceneSpec spec;
  Scene s = gen_scene(21, spec);
  for (const DomainStyle& style : {default_style_a(), default_style_b()}) {
    Tensor<float> img = render_domain(s.content, style);
    Tensor<float> rec = invert_style(img, style);
    REQUIRE(max_abs_diff(rec, s.content) < 1e-5);
  }
}

TEST_CASE("make_dataset writes the documented layout and is rerunnable") {
  const std::string dir1 = temp_dir("ds1");
  const std::string dir2 = temp_dir("ds2");
  SceneSpec spec;
  DatasetManifest m1 = make_dataset(10, 77, default_style_a(), default_style_b(), spec, dir1);
  DatasetManifest m2 = make_dataset(10, 77, default_style_a(), default_style_b(), spec, dir2);

  REQUIRE(m1.samples.size() == 20);
  int64_t train_a = 0, val_a = 0, train_b = 0, val_b = 0;
  for (const auto& s : m1.samples) {
    if (s.domain == "A") (s.split == "train" ? train_a : val_a)++;
    else (s.split == "train" ? train_b : val_b)++;
  }
  REQUIRE(train_a == 8);
  REQUIRE(val_a == 2);
  REQUIRE(train_b == 8);
  REQUIRE(val_b == 2);

  // domains use disjoint scene seeds (A even, B odd)
  for (const auto& s : m1.samples) {
    REQUIRE((s.seed % 2 == 0) == (s.domain == "A"));
  }

  // rerun with the same seed reproduces content (timestamps aside)
  REQUIRE(slurp(dir1 + "/manifest.json") == slurp(dir2 + "/manifest.json"));
  REQUIRE(slurp(dir1 + "/a_0000.png") == slurp(dir2 + "/a_0000.png"));
  REQUIRE(slurp(dir1 + "/b_0007_mask.png") == slurp(dir2 + "/b_0007_mask.png"));

  // PNG round trip obeys the 8-bit quantization bound
  DatasetManifest loaded = load_manifest(dir1 + "/manifest.json");
  Scene s0 = gen_scene(loaded.samples[0].seed, spec);
  Tensor<float> original = render_domain(s0.content, default_style_a());
  Tensor<float> reloaded = read_image(dir1 + "/" + loaded.samples[0].image);
  REQUIRE(max_abs_diff(original, reloaded) <= 1.0 / 127.5);

  // masks load back as exact binaries
  Tensor<float> mask = read_mask_png(dir1 + "/" + loaded.samples[0].mask);
  REQUIRE(bitwise_equal(mask, s0.mask));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("load_split returns batched tensors in range") {
  const std::string dir = temp_dir("ds3");
  SceneSpec spec;
  make_dataset(5, 13, default_style_a(), default_style_b(), spec, dir);
  DatasetManifest m = load_manifest(dir + "/manifest.json");
  DomainData data = load_split(m, "A", "train");
  REQUIRE(data.count == 4);
  REQUIRE(data.images.shape() == std::vector<int64_t>{4, 3, 64, 64});
  REQUIRE(data.masks.shape() == std::vector<int64_t>{4, 1, 64, 64});
  for (int64_t i = 0; i < data.images.numel(); ++i) {
    REQUIRE(data.images[i] >= -1.0f);
    REQUIRE(data.images[i] <= 1.0f);
  }
  for (int64_t i = 0; i < data.masks.numel(); ++i) {
    REQUIRE((data.masks[i] == 0.0f || data.masks[i] == 1.0f));
  }
  fs::remove_all(dir);
}

TEST_CASE("load_folder handles ordering, constants, and bad files") {
  const std::string dir = temp_dir("folder");
  // three valid files, written out of lexicographic order
  Tensor<float> white = Tensor<float>::full({3, 8, 8}, 1.0f);
  Tensor<float> gray = Tensor<float>::full({3, 128, 128}, 0.25f);
  write_image_png(dir + "/c.png", white);
  write_image_png(dir + "/a.png", white);
  write_image_png(dir + "/b.png", gray);
  {
    std::ofstream bad(dir + "/broken.png");
    bad << "not a png";
  }

  FolderLoad out = load_folder(dir, 64, 64);
  REQUIRE(out.images.size() == 3);
  REQUIRE(out.skipped == 1);
  REQUIRE(out.paths[0] == dir + "/a.png");

  // all-white 8-bit decodes to exactly 1.0 after scaling
  for (int64_t i = 0; i < out.images[0].numel(); ++i) REQUIRE(out.images[0][i] == 1.0f);
  // resampling a constant image stays constant
  for (int64_t i = 0; i < out.images[1].numel(); ++i)
    REQUIRE(out.images[1][i] == Catch::Approx(0.25f).margin(1.0 / 127.5));

  // explicit shuffle seed reorders deterministically
  FolderLoad s1 = load_folder(dir, 64, 64, 5u);
  FolderLoad s2 = load_folder(dir, 64, 64, 5u);
  REQUIRE(s1.paths == s2.paths);

  const std::string empty = temp_dir("empty");
  REQUIRE_THROWS_AS(load_folder(empty, 64, 64), IoError);
  fs::remove_all(dir);
  fs::remove_all(empty);
}
