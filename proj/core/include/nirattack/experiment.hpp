#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nirattack/dataset.hpp"
#include "nirattack/detector.hpp"
#include "nirattack/ga.hpp"
#include "nirattack/metrics.hpp"

namespace nirattack {

/// Everything one experiment needs. Relative paths in the config file are
/// resolved against the file's directory.
///
///     {
///       "scheme": "schemes/mannequin31_1black.json",
///       "mesh_dir": "assets/meshes",
///       "background_dir": "assets/backgrounds",
///       "dataset_dir": "runs/dataset",
///       "out": "runs/exp",
///       "seed": 0,
///       "render": {"width": 416, "height": 416, "focal": 500},
///       "pose_bounds": {"azimuth_deg": [0, 360], "elevation_deg": [-10, 20],
///                       "distance_m": [3, 5]},
///       "poses_per_mesh": 25,
///       "split": {"train": 0.8, "test": 0.2, "mode": "pair"},
///       "search": {"N": 1000, "B": 300, "p_cross": 0.5, "p_mut": 0.01,
///                  "generations": 100, "elitism": 1},
///       "detector": "http://127.0.0.1:8000",
///       "no_attack_intensity": 128,
///       "repeats": 1,
///       "checkpoint_every": 1,
///       "augmentation": {"blur_sigma": 0, "jitter": 0}
///     }
struct ExperimentConfig {
  std::filesystem::path scheme_file;
  std::filesystem::path mesh_dir;
  std::filesystem::path background_dir;
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  PoseBounds pose_bounds;
  std::size_t poses_per_mesh = 25;
  double train_fraction = 0.8;
  double test_fraction = 0.2;
  SplitMode split_mode = SplitMode::kPair;
  SearchConfig search;
  std::string detector = "synthetic:bias=2,seed=0";
  std::uint8_t no_attack_intensity = 128;
  std::size_t repeats = 1;
  std::size_t checkpoint_every = 1;
  Augmentation augmentation;

  /// Throws ConfigError on inconsistent values. With `check_paths`,
  /// referenced inputs must exist.
  void validate(bool check_paths) const;

  /// Resolved config with absolute paths.
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text, const std::filesystem::path& base_dir);
  static ExperimentConfig load(const std::filesystem::path& path);

  DatasetParams dataset_params() const;
};

/// Runs the search and writes the run directory:
///   config.json, history.csv, best_pattern.json, checkpoints/gen_<g>.json
/// `resume_from` continues from a checkpoint file.
SearchResult search_to_directory(const SearchConfig& search, std::shared_ptr<const SegmentScheme> scheme,
                                 const SceneSource& source, const DetectorClient& client,
                                 const std::filesystem::path& run_dir, std::size_t checkpoint_every = 1,
                                 const std::optional<std::filesystem::path>& resume_from = std::nullopt,
                                 const std::string& context_json = "{}");

/// Test-split evaluation. Every condition sees the same scene/background
/// pairs of a repeat; "no_attack" renders the silhouette at a constant
/// intensity, every other condition composites its pattern.
std::vector<EvalRecord> evaluate_conditions(const std::vector<LoadedScene>& test_scenes,
                                            const BackgroundPool& backgrounds,
                                            const std::vector<std::pair<std::string, BinaryPattern>>& patterns,
                                            const DetectorClient& client, std::uint8_t no_attack_intensity,
                                            std::uint64_t seed, int repeat, std::size_t max_in_flight = 8,
                                            bool include_no_attack = true);

/// Reads records.jsonl from `dir` and writes report.json and report.txt.
std::vector<ConditionSummary> write_report(const std::filesystem::path& dir, const std::string& model_id);

/// Dataset (generated if its manifest is missing), search on the train
/// split per repeat, evaluation of no-attack, the three baselines and the
/// searched pattern on the test split, then the report.
std::vector<ConditionSummary> run_experiment(const ExperimentConfig& config);

}  // namespace nirattack
