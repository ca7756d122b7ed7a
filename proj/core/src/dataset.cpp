#include "nirattack/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "nirattack/error.hpp"
#include "nirattack/mesh.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t DatasetManifest::train_count() const {
  return static_cast<std::size_t>(std::count_if(scenes.begin(), scenes.end(), [](auto& s) { return s.train; }));
}

std::size_t DatasetManifest::test_count() const { return scenes.size() - train_count(); }

std::string DatasetManifest::to_json() const {
  json list = json::array();
  for (const auto& s : scenes)
    list.push_back({{"id", s.id},
                    {"mesh", s.mesh},
                    {"pose", s.pose},
                    {"segmap", s.segmap.generic_string()},
                    {"split", s.train ? "train" : "test"}});
  return json{{"scheme", scheme},
              {"seed", seed},
              {"train", train_count()},
              {"test", test_count()},
              {"scenes", list}}
      .dump(1);
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    DatasetManifest m;
    m.scheme = j.at("scheme").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("scenes")) {
      const std::string split = s.at("split").get<std::string>();
      if (split != "train" && split != "test") throw DatasetError("manifest: bad split '" + split + "'");
      m.scenes.push_back({s.at("id").get<std::string>(), s.at("mesh").get<std::string>(),
                          s.at("pose").get<std::size_t>(), fs::path(s.at("segmap").get<std::string>()),
                          split == "train"});
    }
    return m;
  } catch (const json::exception& e) {
    throw DatasetError(std::string("invalid manifest: ") + e.what());
  }
}

std::vector<bool> split_assignment(std::size_t count, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
    throw ConfigError("train fraction must lie in [0,1]");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(count)));
  std::vector<bool> train(count, false);
  for (std::size_t i = 0; i < n_train; ++i) train[order[i]] = true;
  return train;
}

DatasetManifest gen_dataset(const DatasetParams& params, const SegmentScheme& scheme) {
  params.pose_bounds.validate();
  if (params.poses_per_mesh == 0) throw ConfigError("poses_per_mesh must be >= 1");
  const auto mesh_files = list_mesh_files(params.mesh_dir);
  if (mesh_files.empty()) throw DatasetError("no .lmesh files in " + params.mesh_dir.string());

  fs::create_directories(params.out_dir / "segmaps");
  DatasetManifest manifest;
  manifest.scheme = scheme.id();
  manifest.seed = params.seed;

  for (std::size_t m = 0; m < mesh_files.size(); ++m) {
    const LabeledMesh mesh = load_mesh(mesh_files[m], scheme);
    const std::string stem = mesh_files[m].stem().string();
    for (std::size_t p = 0; p < params.poses_per_mesh; ++p) {
      std::optional<std::pair<SegMap, CameraPose>> rendered;
      for (int attempt = 0; attempt < std::max(1, params.max_resample); ++attempt) {
        const CameraPose cam =
            sample_camera(derive_seed(params.seed, {0xda7a, m, p, static_cast<std::uint64_t>(attempt)}),
                          params.pose_bounds);
        SegMap sm = render_segmap(mesh, cam);
        if (sm.covered_pixels() > 0) {
          rendered.emplace(std::move(sm), cam);
          break;
        }
      }
      if (!rendered)
        throw DatasetError(mesh_files[m].string() + " pose " + std::to_string(p) + ": empty silhouette after " +
                           std::to_string(params.max_resample) + " attempts");
      char pose_tag[16];
      std::snprintf(pose_tag, sizeof pose_tag, "_p%03zu", p);
      const std::string id = stem + pose_tag;
      const fs::path rel = fs::path("segmaps") / (id + ".png");
      save_segmap(params.out_dir / rel, rendered->first, rendered->second);
      manifest.scenes.push_back({id, mesh_files[m].filename().string(), p, rel, true});
    }
  }

  const std::uint64_t split_seed = derive_seed(params.seed, {0x5b1});
  if (params.split_mode == SplitMode::kPair) {
    const auto train = split_assignment(manifest.scenes.size(), params.train_fraction, split_seed);
    for (std::size_t i = 0; i < manifest.scenes.size(); ++i) manifest.scenes[i].train = train[i];
  } else {
    const auto train = split_assignment(mesh_files.size(), params.train_fraction, split_seed);
    for (std::size_t i = 0; i < manifest.scenes.size(); ++i)
      manifest.scenes[i].train = train[i / params.poses_per_mesh];
  }

  std::ofstream out(params.out_dir / "manifest.json");
  if (!out) throw DatasetError("cannot write manifest in " + params.out_dir.string());
  out << manifest.to_json() << '\n';
  return manifest;
}

DatasetManifest load_manifest(const fs::path& dataset_dir) {
  std::ifstream in(dataset_dir / "manifest.json");
  if (!in) throw DatasetError("no manifest.json in " + dataset_dir.string() + " (run gen-dataset first)");
  std::stringstream ss;
  ss << in.rdbuf();
  return DatasetManifest::from_json(ss.str());
}

std::vector<LoadedScene> load_split(const fs::path& dataset_dir, const DatasetManifest& manifest,
                                    bool train, int k) {
  std::vector<LoadedScene> out;
  for (const auto& s : manifest.scenes) {
    if (s.train != train) continue;
    StoredSegMap stored = load_segmap(dataset_dir / s.segmap);
    stored.segmap.validate(k);
    out.push_back({s.id, std::make_shared<const SegMap>(std::move(stored.segmap)), stored.camera});
  }
  return out;
}

SegMapSceneSource::SegMapSceneSource(std::vector<std::shared_ptr<const SegMap>> segmaps,
                                     BackgroundPool backgrounds, Augmentation augmentation)
    : segmaps_(std::move(segmaps)), backgrounds_(std::move(backgrounds)), augmentation_(augmentation) {
  if (segmaps_.empty()) throw DatasetError("scene source has no segment maps");
  if (backgrounds_.empty()) throw DatasetError("scene source has no backgrounds");
}

std::vector<Scene> SegMapSceneSource::batch(std::size_t count, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<std::size_t> picks;
  if (count <= segmaps_.size()) {
    std::vector<std::size_t> idx(segmaps_.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
      picks.push_back(idx[i]);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) picks.push_back(uniform_index(rng, segmaps_.size()));
  }
  std::vector<Scene> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const auto& sm = segmaps_[picks[j]];
    NirImage bg = sample_background(derive_seed(seed, {0xb9, j}), backgrounds_, sm->width(), sm->height());
    if (augmentation_.enabled()) bg = augment(bg, augmentation_, derive_seed(seed, {0xa6, j}));
    out.push_back({sm, std::move(bg)});
  }
  return out;
}

BaselineKind parse_baseline_kind(const std::string& name) {
  if (name == "all_black") return BaselineKind::kAllBlack;
  if (name == "all_white") return BaselineKind::kAllWhite;
  if (name == "random") return BaselineKind::kRandom;
  throw ConfigError("unknown baseline kind '" + name + "' (expected all_black, all_white or random)");
}

std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kAllBlack: return "all_black";
    case BaselineKind::kAllWhite: return "all_white";
    case BaselineKind::kRandom: return "random";
  }
  return "unknown";
}

BinaryPattern make_baseline(BaselineKind kind, std::shared_ptr<const SegmentScheme> scheme,
                            std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(scheme->k());
  switch (kind) {
    case BaselineKind::kAllBlack:
      return BinaryPattern(std::vector<std::uint8_t>(k, 0), scheme);
    case BaselineKind::kAllWhite: {
      std::vector<std::uint8_t> bits(k, 1);
      if (scheme->head()) bits[*scheme->head()] = 0;
      return BinaryPattern::constrained(std::move(bits), scheme);
    }
    case BaselineKind::kRandom:
      return new_random(seed, scheme);
  }
  throw ConfigError("unknown baseline kind");
}

}  // namespace nirattack
