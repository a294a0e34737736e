// dataset.hpp
//
// Dataset generation and the manifest format. A dataset directory holds one
// degraded image and one label per item (both grid CSV files) plus
// manifest.json recording paths, split assignment, the seed and the full
// generation config. Labels are stored for every split; the trainer only
// reads them for the labeled split, evaluation uses the test split's.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "topo/grid.hpp"
#include "topo/kspace.hpp"
#include "topo/phantom.hpp"
#include "topo/rng.hpp"

namespace topo {

enum class Split { labeled, unlabeled, test };

inline std::string split_name(Split s) {
  switch (s) {
    case Split::labeled: return "labeled";
    case Split::unlabeled: return "unlabeled";
    default: return "test";
  }
}

inline Split split_from_name(const std::string& name) {
  if (name == "labeled") return Split::labeled;
  if (name == "unlabeled") return Split::unlabeled;
  if (name == "test") return Split::test;
  throw std::runtime_error("unknown split name: " + name);
}

struct ManifestItem {
  std::string image_path;  // relative to the manifest directory
  std::string label_path;
  Split split = Split::labeled;
};

struct SynthConfig {
  int height = 64;
  int width = 64;
  int n_labeled = 5;
  int n_unlabeled = 50;
  int n_test = 50;
  std::uint64_t seed = 0;
  // annulus geometry ranges (uniform draws), as fractions of min(h, w)
  double r_inner_lo = 0.08;
  double r_inner_hi = 0.14;
  double thickness_lo = 0.055;
  double thickness_hi = 0.10;
  double center_jitter = 0.0625;
  AnnulusStyle style;
  // degradation; per-item seeds are derived from `seed`
  bool degrade = true;
  int band = 8;
  double p_remove = 0.75;
};

struct DatasetManifest {
  std::vector<ManifestItem> items;
  std::uint64_t seed = 0;
  SynthConfig config;
  std::string base_dir;  // directory the relative paths resolve against
};

inline nlohmann::json synth_config_to_json(const SynthConfig& c) {
  return nlohmann::json{{"height", c.height},
                        {"width", c.width},
                        {"n_labeled", c.n_labeled},
                        {"n_unlabeled", c.n_unlabeled},
                        {"n_test", c.n_test},
                        {"seed", c.seed},
                        {"r_inner_lo", c.r_inner_lo},
                        {"r_inner_hi", c.r_inner_hi},
                        {"thickness_lo", c.thickness_lo},
                        {"thickness_hi", c.thickness_hi},
                        {"center_jitter", c.center_jitter},
                        {"ring_intensity", c.style.ring_intensity},
                        {"interior_intensity", c.style.interior_intensity},
                        {"exterior_intensity", c.style.exterior_intensity},
                        {"noise_sigma", c.style.noise_sigma},
                        {"degrade", c.degrade},
                        {"band", c.band},
                        {"p_remove", c.p_remove}};
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.height = j.value("height", c.height);
  c.width = j.value("width", c.width);
  c.n_labeled = j.value("n_labeled", c.n_labeled);
  c.n_unlabeled = j.value("n_unlabeled", c.n_unlabeled);
  c.n_test = j.value("n_test", c.n_test);
  c.seed = j.value("seed", c.seed);
  c.r_inner_lo = j.value("r_inner_lo", c.r_inner_lo);
  c.r_inner_hi = j.value("r_inner_hi", c.r_inner_hi);
  c.thickness_lo = j.value("thickness_lo", c.thickness_lo);
  c.thickness_hi = j.value("thickness_hi", c.thickness_hi);
  c.center_jitter = j.value("center_jitter", c.center_jitter);
  c.style.ring_intensity = j.value("ring_intensity", c.style.ring_intensity);
  c.style.interior_intensity = j.value("interior_intensity", c.style.interior_intensity);
  c.style.exterior_intensity = j.value("exterior_intensity", c.style.exterior_intensity);
  c.style.noise_sigma = j.value("noise_sigma", c.style.noise_sigma);
  c.degrade = j.value("degrade", c.degrade);
  c.band = j.value("band", c.band);
  c.p_remove = j.value("p_remove", c.p_remove);
  return c;
}

inline void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : manifest.items)
    items.push_back({{"image_path", item.image_path},
                     {"label_path", item.label_path},
                     {"split", split_name(item.split)}});
  const nlohmann::json j{
      {"seed", manifest.seed}, {"config", synth_config_to_json(manifest.config)}, {"items", items}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed manifest " + path + ": " + e.what());
  }
  DatasetManifest manifest;
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.config = synth_config_from_json(j.at("config"));
  for (const auto& item : j.at("items"))
    manifest.items.push_back({item.at("image_path").get<std::string>(),
                              item.at("label_path").get<std::string>(),
                              split_from_name(item.at("split").get<std::string>())});
  manifest.base_dir = std::filesystem::path(path).parent_path().string();
  return manifest;
}

/// Draws one annulus phantom from the config's geometry ranges. Retries a
/// few times if a degenerate draw fails the oracle check.
inline Phantom draw_phantom(const SynthConfig& cfg, Rng& rng, std::uint64_t noise_seed) {
  const double scale = std::min(cfg.height, cfg.width);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double jitter = scale * cfg.center_jitter;
    const double ci = cfg.height / 2.0 + rng.uniform(-jitter, jitter);
    const double cj = cfg.width / 2.0 + rng.uniform(-jitter, jitter);
    const double r_inner = scale * rng.uniform(cfg.r_inner_lo, cfg.r_inner_hi);
    const double r_outer = r_inner + scale * rng.uniform(cfg.thickness_lo, cfg.thickness_hi);
    try {
      return make_annulus(cfg.height, cfg.width, ci, cj, r_inner, r_outer, noise_seed, cfg.style);
    } catch (const std::exception&) {
      continue;  // degenerate geometry; redraw
    }
  }
  throw std::runtime_error("draw_phantom: geometry ranges keep producing degenerate annuli");
}

/// Generates n_labeled + n_unlabeled + n_test phantoms into out_dir, writes
/// manifest.json and returns the manifest. Deterministic per seed.
inline DatasetManifest generate_dataset(const SynthConfig& cfg, const std::string& out_dir) {
  if (cfg.n_labeled < 0 || cfg.n_unlabeled < 0 || cfg.n_test < 0)
    throw std::invalid_argument("generate_dataset: negative split count");
  const int total = cfg.n_labeled + cfg.n_unlabeled + cfg.n_test;
  if (total <= 0) throw std::invalid_argument("generate_dataset: empty dataset");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create dataset directory " + out_dir + ": " + ec.message());

  DatasetManifest manifest;
  manifest.seed = cfg.seed;
  manifest.config = cfg;
  manifest.base_dir = out_dir;

  Rng geometry_rng(mix_seed(cfg.seed, 1));
  char name[64];
  for (int idx = 0; idx < total; ++idx) {
    const Split split = idx < cfg.n_labeled              ? Split::labeled
                        : idx < cfg.n_labeled + cfg.n_unlabeled ? Split::unlabeled
                                                                : Split::test;
    Phantom phantom = draw_phantom(cfg, geometry_rng, mix_seed(cfg.seed, 1000 + idx));
    ProbabilityGrid image = phantom.image;
    if (cfg.degrade)
      image = degrade_kspace(image, DegradeConfig{cfg.band, cfg.p_remove, mix_seed(cfg.seed, 2000 + idx)});

    std::snprintf(name, sizeof(name), "image_%04d.csv", idx);
    const std::string image_rel = name;
    std::snprintf(name, sizeof(name), "label_%04d.csv", idx);
    const std::string label_rel = name;
    save_grid_csv((std::filesystem::path(out_dir) / image_rel).string(), image);
    save_grid_csv((std::filesystem::path(out_dir) / label_rel).string(), grid_from_mask(phantom.label));
    manifest.items.push_back({image_rel, label_rel, split});
  }

  save_manifest(manifest, (std::filesystem::path(out_dir) / "manifest.json").string());
  return manifest;
}

}  // namespace topo
