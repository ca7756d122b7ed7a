#include "nirattack/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "nirattack/compositor.hpp"
#include "nirattack/error.hpp"
#include "nirattack/parallel.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

Range range_from(const json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto& r = j.at(key);
  return {r.at(0).get<double>(), r.at(1).get<double>()};
}

}  // namespace

void ExperimentConfig::validate(bool check_paths) const {
  pose_bounds.validate();
  search.validate();
  if (poses_per_mesh == 0) throw ConfigError("poses_per_mesh must be >= 1");
  if (!(train_fraction >= 0 && test_fraction >= 0) || std::abs(train_fraction + test_fraction - 1.0) > 1e-9)
    throw ConfigError("split fractions must be non-negative and sum to 1");
  if (repeats == 0) throw ConfigError("repeats must be >= 1");
  if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be >= 1");
  if (check_paths) {
    if (!fs::is_regular_file(scheme_file)) throw ConfigError("scheme file not found: " + scheme_file.string());
    if (!fs::is_directory(mesh_dir)) throw ConfigError("mesh directory not found: " + mesh_dir.string());
    if (!fs::is_directory(background_dir))
      throw ConfigError("background directory not found: " + background_dir.string());
  }
}

std::string ExperimentConfig::to_json() const {
  json j{{"scheme", scheme_file.string()},
         {"mesh_dir", mesh_dir.string()},
         {"background_dir", background_dir.string()},
         {"dataset_dir", dataset_dir.string()},
         {"out", out_dir.string()},
         {"seed", seed},
         {"render", {{"width", pose_bounds.width}, {"height", pose_bounds.height}, {"focal", pose_bounds.focal}}},
         {"pose_bounds",
          {{"azimuth_deg", {pose_bounds.azimuth_deg.lo, pose_bounds.azimuth_deg.hi}},
           {"elevation_deg", {pose_bounds.elevation_deg.lo, pose_bounds.elevation_deg.hi}},
           {"distance_m", {pose_bounds.distance_m.lo, pose_bounds.distance_m.hi}}}},
         {"poses_per_mesh", poses_per_mesh},
         {"split",
          {{"train", train_fraction}, {"test", test_fraction}, {"mode", split_mode == SplitMode::kPair ? "pair" : "mesh"}}},
         {"search", json::parse(search.to_json())},
         {"detector", detector},
         {"no_attack_intensity", no_attack_intensity},
         {"repeats", repeats},
         {"checkpoint_every", checkpoint_every},
         {"augmentation", {{"blur_sigma", augmentation.blur_sigma}, {"jitter", augmentation.jitter}}}};
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    auto path_of = [&](const char* key, const fs::path& fallback) -> fs::path {
      if (!j.contains(key)) return fallback;
      fs::path p = j.at(key).get<std::string>();
      return p.is_absolute() ? p : (base_dir / p).lexically_normal();
    };
    c.scheme_file = path_of("scheme", {});
    c.mesh_dir = path_of("mesh_dir", {});
    c.background_dir = path_of("background_dir", {});
    c.out_dir = path_of("out", base_dir / "out");
    c.dataset_dir = path_of("dataset_dir", c.out_dir / "dataset");
    c.seed = j.value("seed", c.seed);
    if (j.contains("render")) {
      const auto& r = j["render"];
      c.pose_bounds.width = r.value("width", c.pose_bounds.width);
      c.pose_bounds.height = r.value("height", c.pose_bounds.height);
      c.pose_bounds.focal = r.value("focal", c.pose_bounds.focal);
    }
    if (j.contains("pose_bounds")) {
      const auto& b = j["pose_bounds"];
      c.pose_bounds.azimuth_deg = range_from(b, "azimuth_deg", c.pose_bounds.azimuth_deg);
      c.pose_bounds.elevation_deg = range_from(b, "elevation_deg", c.pose_bounds.elevation_deg);
      c.pose_bounds.distance_m = range_from(b, "distance_m", c.pose_bounds.distance_m);
    }
    c.poses_per_mesh = j.value("poses_per_mesh", c.poses_per_mesh);
    if (j.contains("split")) {
      const auto& s = j["split"];
      c.train_fraction = s.value("train", c.train_fraction);
      c.test_fraction = s.value("test", 1.0 - c.train_fraction);
      const std::string mode = s.value("mode", std::string("pair"));
      if (mode == "pair")
        c.split_mode = SplitMode::kPair;
      else if (mode == "mesh")
        c.split_mode = SplitMode::kMesh;
      else
        throw ConfigError("split.mode must be 'pair' or 'mesh'");
    }
    if (j.contains("search")) c.search = SearchConfig::from_json(j["search"].dump());
    c.detector = j.value("detector", c.detector);
    const int intensity = j.value("no_attack_intensity", static_cast<int>(c.no_attack_intensity));
    if (intensity < 0 || intensity > 255) throw ConfigError("no_attack_intensity must lie in [0,255]");
    c.no_attack_intensity = static_cast<std::uint8_t>(intensity);
    c.repeats = j.value("repeats", c.repeats);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    if (j.contains("augmentation")) {
      c.augmentation.blur_sigma = j["augmentation"].value("blur_sigma", 0.0);
      c.augmentation.jitter = j["augmentation"].value("jitter", 0.0);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
  c.validate(false);
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), fs::absolute(path).parent_path());
}

DatasetParams ExperimentConfig::dataset_params() const {
  DatasetParams p;
  p.mesh_dir = mesh_dir;
  p.out_dir = dataset_dir;
  p.pose_bounds = pose_bounds;
  p.poses_per_mesh = poses_per_mesh;
  p.train_fraction = train_fraction;
  p.split_mode = split_mode;
  p.seed = seed;
  return p;
}

SearchResult search_to_directory(const SearchConfig& search, std::shared_ptr<const SegmentScheme> scheme,
                                 const SceneSource& source, const DetectorClient& client, const fs::path& run_dir,
                                 std::size_t checkpoint_every, const std::optional<fs::path>& resume_from,
                                 const std::string& context_json) {
  fs::create_directories(run_dir / "checkpoints");
  json cfg = json::parse(search.to_json());
  cfg["scheme"] = scheme->id();
  cfg["context"] = json::parse(context_json);
  write_text(run_dir / "config.json", cfg.dump(2) + "\n");

  std::optional<Checkpoint> resume;
  if (resume_from) {
    std::ifstream in(*resume_from);
    if (!in) throw ConfigError("cannot open checkpoint " + resume_from->string());
    std::stringstream ss;
    ss << in.rdbuf();
    resume = Checkpoint::from_json(ss.str(), scheme);
  }

  auto on_generation = [&](const PopulationState& state, const std::vector<GenerationStats>& history) {
    const auto& s = history.back();
    spdlog::info("generation {}: c_min={:.4f} c_mean={:.4f} c_max={:.4f} best={:.4f}", s.generation, s.c_min,
                 s.c_mean, s.c_max, state.best_fitness);
    write_text(run_dir / "history.csv", format_history_csv(history));
    if (state.generation % checkpoint_every == 0 || state.generation == search.generations) {
      char name[32];
      std::snprintf(name, sizeof name, "gen_%zu.json", state.generation);
      write_text(run_dir / "checkpoints" / name, Checkpoint{state, history}.to_json() + "\n");
    }
  };

  SearchResult result = run_search(search, scheme, source, client, on_generation, std::move(resume));
  write_text(run_dir / "history.csv", format_history_csv(result.history));
  save_pattern(run_dir / "best_pattern.json", result.best);
  return result;
}

std::vector<EvalRecord> evaluate_conditions(const std::vector<LoadedScene>& test_scenes,
                                            const BackgroundPool& backgrounds,
                                            const std::vector<std::pair<std::string, BinaryPattern>>& patterns,
                                            const DetectorClient& client, std::uint8_t no_attack_intensity,
                                            std::uint64_t seed, int repeat, std::size_t max_in_flight,
                                            bool include_no_attack) {
  if (test_scenes.empty()) throw DatasetError("test split is empty");
  const std::size_t n_cond = patterns.size() + (include_no_attack ? 1 : 0);
  const std::size_t n_scene = test_scenes.size();
  std::vector<EvalRecord> records(n_cond * n_scene);

  parallel_for(records.size(), max_in_flight, [&](std::size_t item) {
    const std::size_t c = item / n_scene, i = item % n_scene;
    const LoadedScene& sc = test_scenes[i];
    const NirImage bg = sample_background(derive_seed(seed, {0xe7a1, static_cast<std::uint64_t>(repeat), i}),
                                          backgrounds, sc.segmap->width(), sc.segmap->height());
    EvalRecord& rec = records[item];
    rec.scene_id = sc.id;
    rec.repeat = repeat;
    const auto& box = sc.segmap->silhouette_box();
    if (!box) throw DatasetError("scene " + sc.id + " has an empty silhouette");
    rec.ground_truth = to_detection_box(*box);
    NirImage img;
    if (include_no_attack && c == 0) {
      rec.condition = "no_attack";
      img = synthesize_plain(*sc.segmap, no_attack_intensity, bg);
    } else {
      const auto& [name, pattern] = patterns[c - (include_no_attack ? 1 : 0)];
      rec.condition = name;
      img = synthesize_attack(*sc.segmap, pattern, bg);
    }
    rec.detections = client.detect(img, *sc.segmap);
  });
  return records;
}

std::vector<ConditionSummary> write_report(const fs::path& dir, const std::string& model_id) {
  const auto records = read_records(dir / "records.jsonl");
  const auto rows = summarize_conditions(records);
  write_text(dir / "report.json", report_json(rows, model_id) + "\n");
  write_text(dir / "report.txt", report_text(rows, model_id));
  return rows;
}

std::vector<ConditionSummary> run_experiment(const ExperimentConfig& config) {
  config.validate(true);
  auto scheme = std::make_shared<const SegmentScheme>(load_scheme(config.scheme_file));
  if (!fs::exists(config.dataset_dir / "manifest.json")) gen_dataset(config.dataset_params(), *scheme);
  const DatasetManifest manifest = load_manifest(config.dataset_dir);
  if (manifest.scheme != scheme->id())
    throw DatasetError("dataset was generated for scheme '" + manifest.scheme + "'");

  const auto train = load_split(config.dataset_dir, manifest, true, scheme->k());
  const auto test = load_split(config.dataset_dir, manifest, false, scheme->k());
  if (train.empty() || test.empty()) throw DatasetError("train and test splits must both be non-empty");
  BackgroundPool backgrounds = BackgroundPool::load_directory(config.background_dir);
  if (backgrounds.empty()) throw DatasetError("no backgrounds in " + config.background_dir.string());

  std::vector<std::shared_ptr<const SegMap>> train_maps;
  for (const auto& s : train) train_maps.push_back(s.segmap);
  SegMapSceneSource source(std::move(train_maps), backgrounds, config.augmentation);
  const auto client = make_detector(config.detector, static_cast<std::size_t>(scheme->k()));

  fs::create_directories(config.out_dir);
  write_text(config.out_dir / "config.json", config.to_json() + "\n");
  fs::remove(config.out_dir / "records.jsonl");

  for (std::size_t r = 0; r < config.repeats; ++r) {
    SearchConfig search = config.search;
    search.seed = config.search.seed + r;
    char run_name[32];
    std::snprintf(run_name, sizeof run_name, "search_r%zu", r);
    const SearchResult result = search_to_directory(search, scheme, source, *client, config.out_dir / run_name,
                                                    config.checkpoint_every, std::nullopt,
                                                    json{{"detector", config.detector}}.dump());

    std::vector<std::pair<std::string, BinaryPattern>> patterns;
    for (auto kind : {BaselineKind::kAllBlack, BaselineKind::kAllWhite, BaselineKind::kRandom})
      patterns.emplace_back(baseline_name(kind), make_baseline(kind, scheme, derive_seed(config.seed, {0xba5e, r})));
    patterns.emplace_back("searched", result.best);

    const auto records = evaluate_conditions(test, backgrounds, patterns, *client, config.no_attack_intensity,
                                             config.seed, static_cast<int>(r), config.search.max_in_flight);
    write_records(config.out_dir / "records.jsonl", records, /*append=*/true);
  }
  return write_report(config.out_dir, client->model_id());
}

}  // namespace nirattack
