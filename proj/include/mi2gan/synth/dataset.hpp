#ifndef MI2GAN_SYNTH_DATASET_HPP
#define MI2GAN_SYNTH_DATASET_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "mi2gan/core/image.hpp"
#include "mi2gan/core/log.hpp"
#include "mi2gan/synth/style.hpp"

namespace mi2gan {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline json style_to_json(const DomainStyle& s) {
  return json{{"channel_map", s.channel_map},
              {"gamma", s.gamma},
              {"texture_amp", s.texture_amp},
              {"texture_period", s.texture_period},
              {"bg_tint", s.bg_tint}};
}

inline DomainStyle style_from_json(const json& j) {
  DomainStyle s;
  j.at("channel_map").get_to(s.channel_map);
  j.at("gamma").get_to(s.gamma);
  j.at("texture_amp").get_to(s.texture_amp);
  j.at("texture_period").get_to(s.texture_period);
  j.at("bg_tint").get_to(s.bg_tint);
  return s;
}

inline json scene_spec_to_json(const SceneSpec& s) {
  return json{{"num_blobs", s.num_blobs},       {"axis_min", s.axis_min},
              {"axis_max", s.axis_max},         {"intensity_min", s.intensity_min},
              {"intensity_max", s.intensity_max}, {"canvas_h", s.canvas_h},
              {"canvas_w", s.canvas_w}};
}

inline SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec s;
  j.at("num_blobs").get_to(s.num_blobs);
  j.at("axis_min").get_to(s.axis_min);
  j.at("axis_max").get_to(s.axis_max);
  j.at("intensity_min").get_to(s.intensity_min);
  j.at("intensity_max").get_to(s.intensity_max);
  j.at("canvas_h").get_to(s.canvas_h);
  j.at("canvas_w").get_to(s.canvas_w);
  return s;
}

struct SampleRecord {
  std::string image;  // path relative to the manifest directory
  std::string mask;
  std::string domain;  // "A" or "B"
  uint64_t seed = 0;
  std::string split;  // "train" or "val"
};

struct DatasetManifest {
  std::vector<SampleRecord> samples;
  SceneSpec spec;
  DomainStyle style_a, style_b;
  int version = 1;
  std::string root;  // directory containing the manifest (set on load/write)
};

inline json manifest_to_json(const DatasetManifest& m) {
  json samples = json::array();
  for (const auto& s : m.samples) {
    samples.push_back(json{{"image", s.image},
                           {"mask", s.mask},
                           {"domain", s.domain},
                           {"seed", s.seed},
                           {"split", s.split}});
  }
  return json{{"samples", samples},
              {"spec", scene_spec_to_json(m.spec)},
              {"styles", json{{"A", style_to_json(m.style_a)}, {"B", style_to_json(m.style_b)}}},
              {"version", m.version}};
}

inline DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  for (const auto& js : j.at("samples")) {
    SampleRecord s;
    js.at("image").get_to(s.image);
    js.at("mask").get_to(s.mask);
    js.at("domain").get_to(s.domain);
    js.at("seed").get_to(s.seed);
    js.at("split").get_to(s.split);
    m.samples.push_back(std::move(s));
  }
  m.spec = scene_spec_from_json(j.at("spec"));
  m.style_a = style_from_json(j.at("styles").at("A"));
  m.style_b = style_from_json(j.at("styles").at("B"));
  j.at("version").get_to(m.version);
  return m;
}

// Scene seed for sample i of a domain. Domains get provably disjoint seed
// sets (A even, B odd) so the two sides are unpaired by construction.
inline uint64_t scene_seed_for(uint64_t dataset_seed, char domain, int64_t index) {
  const uint64_t tag = domain == 'A' ? 1u : 2u;
  const uint64_t mixed = mix_seed(mix_seed(dataset_seed, tag), static_cast<uint64_t>(index));
  return (mixed << 1) | (domain == 'A' ? 0u : 1u);
}

// Writes PNG images, PNG masks and a JSON manifest with an 80/20 train/val
// split per domain. On I/O failure, partial outputs are removed before the
// error propagates.
inline DatasetManifest make_dataset(int64_t n_per_domain, uint64_t seed,
                                    const DomainStyle& style_a, const DomainStyle& style_b,
                                    const SceneSpec& spec, const std::string& out_dir) {
  check(n_per_domain > 0, "make_dataset: n_per_domain must be positive");
  validate_scene_spec(spec);
  validate_style(style_a);
  validate_style(style_b);

  fs::create_directories(out_dir);
  std::vector<std::string> written;
  DatasetManifest manifest;
  manifest.spec = spec;
  manifest.style_a = style_a;
  manifest.style_b = style_b;
  manifest.root = out_dir;

  const int64_t train_n = (n_per_domain * 8) / 10;
  try {
    for (char domain : {'A', 'B'}) {
      const DomainStyle& style = domain == 'A' ? style_a : style_b;
      const char tag = domain == 'A' ? 'a' : 'b';
      for (int64_t i = 0; i < n_per_domain; ++i) {
        const uint64_t scene_seed = scene_seed_for(seed, domain, i);
        Scene scene = gen_scene(scene_seed, spec);
        Tensor<float> img = render_domain(scene.content, style);

        char name[64];
        std::snprintf(name, sizeof(name), "%c_%04lld.png", tag, static_cast<long long>(i));
        char mask_name[64];
        std::snprintf(mask_name, sizeof(mask_name), "%c_%04lld_mask.png", tag,
                      static_cast<long long>(i));
        const std::string img_path = (fs::path(out_dir) / name).string();
        const std::string mask_path = (fs::path(out_dir) / mask_name).string();
        write_image_png(img_path, img);
        written.push_back(img_path);
        write_mask_png(mask_path, scene.mask);
        written.push_back(mask_path);

        SampleRecord rec;
        rec.image = name;
        rec.mask = mask_name;
        rec.domain = std::string(1, domain);
        rec.seed = scene_seed;
        rec.split = i < train_n ? "train" : "val";
        manifest.samples.push_back(std::move(rec));
      }
    }
    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot open manifest for writing: " + manifest_path);
    out << manifest_to_json(manifest).dump(2) << "\n";
    if (!out.good()) throw IoError("failed writing manifest: " + manifest_path);
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw;
  }
  return manifest;
}

inline DatasetManifest load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest: " + manifest_path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("malformed manifest " + manifest_path + ": " + e.what());
  }
  DatasetManifest m = manifest_from_json(j);
  m.root = fs::path(manifest_path).parent_path().string();
  return m;
}

// One domain's split loaded into batched tensors.
struct DomainData {
  Tensor<float> images;  // (n, 3, h, w)
  Tensor<float> masks;   // (n, 1, h, w)
  std::vector<uint64_t> seeds;
  int64_t count = 0;
};

inline DomainData load_split(const DatasetManifest& m, const std::string& domain,
                             const std::string& split) {
  std::vector<const SampleRecord*> recs;
  for (const auto& s : m.samples) {
    if (s.domain == domain && s.split == split) recs.push_back(&s);
  }
  check(!recs.empty(), "dataset has no samples for domain " + domain + " split " + split);
  const int64_t h = m.spec.canvas_h, w = m.spec.canvas_w;
  DomainData data;
  data.count = static_cast<int64_t>(recs.size());
  data.images = Tensor<float>({data.count, 3, h, w});
  data.masks = Tensor<float>({data.count, 1, h, w});
  for (int64_t i = 0; i < data.count; ++i) {
    const auto* rec = recs[static_cast<size_t>(i)];
    Tensor<float> img = read_image((fs::path(m.root) / rec->image).string(), h, w);
    Tensor<float> mask = read_mask_png((fs::path(m.root) / rec->mask).string());
    check(mask.dim(0) == h && mask.dim(1) == w, "mask size mismatch in " + rec->mask);
    std::copy(img.data(), img.data() + img.numel(), data.images.data() + i * 3 * h * w);
    std::copy(mask.data(), mask.data() + mask.numel(), data.masks.data() + i * h * w);
    data.seeds.push_back(rec->seed);
  }
  return data;
}

// Gathers selected samples into a contiguous batch.
template <typename T>
Tensor<T> gather_batch_t(const Tensor<T>& pool, const std::vector<int64_t>& idx) {
  const auto& s = pool.shape();
  const int64_t item = s[1] * s[2] * s[3];
  Tensor<T> batch = Tensor<T>::uninitialized({static_cast<int64_t>(idx.size()), s[1], s[2], s[3]});
  for (size_t i = 0; i < idx.size(); ++i) {
    check(idx[i] >= 0 && idx[i] < s[0], "gather_batch: index out of range");
    std::copy(pool.data() + idx[i] * item, pool.data() + (idx[i] + 1) * item,
              batch.data() + static_cast<int64_t>(i) * item);
  }
  return batch;
}

inline Tensor<float> gather_batch(const Tensor<float>& pool, const std::vector<int64_t>& idx) {
  return gather_batch_t(pool, idx);
}

struct FolderLoad {
  std::vector<Tensor<float>> images;
  std::vector<std::string> paths;
  int64_t skipped = 0;
};

// Loads every decodable PNG/JPEG under a directory, resized to (h, w) and
// scaled to [-1, 1]. Iteration order is lexicographic by filename; a shuffle
// seed reorders deterministically when given. Undecodable files are skipped
// with a warning and counted.
inline FolderLoad load_folder(const std::string& dir, int64_t h, int64_t w,
                              std::optional<uint64_t> shuffle_seed = std::nullopt) {
  check(fs::is_directory(dir), "load_folder: not a directory: " + dir);
  std::vector<std::string> candidates;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      candidates.push_back(entry.path().string());
    }
  }
  std::sort(candidates.begin(), candidates.end());
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    shuffle(candidates, rng);
  }
  FolderLoad out;
  for (const auto& path : candidates) {
    try {
      out.images.push_back(read_image(path, h, w));
      out.paths.push_back(path);
    } catch (const IoError&) {
      log_warn("load_folder: skipping undecodable file " + path);
      ++out.skipped;
    }
  }
  if (out.images.empty()) {
    throw IoError("load_folder: no decodable PNG/JPEG images in " + dir);
  }
  return out;
}

}  // namespace mi2gan

#endif
