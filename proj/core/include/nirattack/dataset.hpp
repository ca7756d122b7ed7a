#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "nirattack/camera.hpp"
#include "nirattack/compositor.hpp"
#include "nirattack/ga.hpp"
#include "nirattack/pattern.hpp"
#include "nirattack/render.hpp"
#include "nirattack/scheme.hpp"

namespace nirattack {

enum class SplitMode {
  kPair,  // split over (mesh, pose) pairs
  kMesh,  // every pose of a mesh lands in the same split
};

struct DatasetParams {
  std::filesystem::path mesh_dir;
  std::filesystem::path out_dir;
  PoseBounds pose_bounds;
  std::size_t poses_per_mesh = 25;
  double train_fraction = 0.8;
  SplitMode split_mode = SplitMode::kPair;
  std::uint64_t seed = 0;
  /// Renders with an empty silhouette are re-sampled this many times.
  int max_resample = 10;
};

struct SceneEntry {
  std::string id;
  std::string mesh;
  std::size_t pose = 0;
  std::filesystem::path segmap;  // relative to the dataset directory
  bool train = true;
};

struct DatasetManifest {
  std::string scheme;
  std::uint64_t seed = 0;
  std::vector<SceneEntry> scenes;

  std::size_t train_count() const;
  std::size_t test_count() const;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

/// Renders |meshes| x poses_per_mesh segment maps into `out_dir/segmaps/`
/// and writes `out_dir/manifest.json`. Deterministic per seed.
/// Throws DatasetError on missing inputs or a mesh that keeps rendering
/// empty after max_resample attempts.
DatasetManifest gen_dataset(const DatasetParams& params, const SegmentScheme& scheme);

/// Assigns `count` items to train/test; true = train. Exactly
/// round(train_fraction * count) items are train.
std::vector<bool> split_assignment(std::size_t count, double train_fraction, std::uint64_t seed);

DatasetManifest load_manifest(const std::filesystem::path& dataset_dir);

/// Loaded segment map with its ground-truth context.
struct LoadedScene {
  std::string id;
  std::shared_ptr<const SegMap> segmap;
  CameraPose camera;
};

/// Loads the train (or test) segment maps of a dataset.
std::vector<LoadedScene> load_split(const std::filesystem::path& dataset_dir,
                                    const DatasetManifest& manifest, bool train, int k);

/// Draws `count` segment maps (without replacement when count <= pool size)
/// and pairs each with a random background.
class SegMapSceneSource final : public SceneSource {
 public:
  SegMapSceneSource(std::vector<std::shared_ptr<const SegMap>> segmaps, BackgroundPool backgrounds,
                    Augmentation augmentation = {});

  std::vector<Scene> batch(std::size_t count, std::uint64_t seed) const override;

 private:
  std::vector<std::shared_ptr<const SegMap>> segmaps_;
  BackgroundPool backgrounds_;
  Augmentation augmentation_;
};

enum class BaselineKind { kAllBlack, kAllWhite, kRandom };

BaselineKind parse_baseline_kind(const std::string& name);
std::string baseline_name(BaselineKind kind);

/// all_black: every bit 0. all_white: every free bit 1 except the head.
/// random: uniform free bits.
BinaryPattern make_baseline(BaselineKind kind, std::shared_ptr<const SegmentScheme> scheme,
                            std::uint64_t seed);

}  // namespace nirattack
