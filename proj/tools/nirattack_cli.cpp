// nirattack: command-line front end for dataset generation, search,
// evaluation and reporting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nirattack/compositor.hpp"
#include "nirattack/dataset.hpp"
#include "nirattack/detector.hpp"
#include "nirattack/error.hpp"
#include "nirattack/experiment.hpp"
#include "nirattack/log.hpp"
#include "nirattack/mannequin.hpp"
#include "nirattack/metrics.hpp"
#include "nirattack/png_io.hpp"
#include "nirattack/render.hpp"
#include "nirattack/rng.hpp"

namespace fs = std::filesystem;
using namespace nirattack;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string detector;
  std::string log_level = "info";
};

int exit_code(Error::Stage stage) {
  switch (stage) {
    case Error::Stage::kConfig: return 2;
    case Error::Stage::kDataset: return 3;
    case Error::Stage::kTransport: return 4;
    case Error::Stage::kMetric: return 5;
    case Error::Stage::kGeneric: break;
  }
  return 1;
}

ExperimentConfig load_config(const GlobalOptions& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  ExperimentConfig c = ExperimentConfig::load(g.config);
  if (g.seed) {
    c.seed = *g.seed;
    c.search.seed = *g.seed;
  }
  if (!g.out.empty()) c.out_dir = fs::absolute(g.out);
  if (!g.detector.empty()) c.detector = g.detector;
  c.validate(true);
  return c;
}

std::shared_ptr<const SegmentScheme> load_scheme_ptr(const ExperimentConfig& c) {
  return std::make_shared<const SegmentScheme>(load_scheme(c.scheme_file));
}

DatasetManifest require_dataset(const ExperimentConfig& c, const SegmentScheme& scheme) {
  if (!fs::exists(c.dataset_dir / "manifest.json"))
    throw DatasetError("no dataset at " + c.dataset_dir.string() + "; run gen-dataset first");
  DatasetManifest m = load_manifest(c.dataset_dir);
  if (m.scheme != scheme.id()) throw DatasetError("dataset was generated for scheme '" + m.scheme + "'");
  return m;
}

BackgroundPool require_backgrounds(const ExperimentConfig& c) {
  BackgroundPool pool = BackgroundPool::load_directory(c.background_dir);
  if (pool.empty()) throw DatasetError("no backgrounds in " + c.background_dir.string());
  return pool;
}

int cmd_synth_assets(const std::string& dir, int meshes, int backgrounds, bool five_black, int bg_size,
                     std::uint64_t seed) {
  const fs::path root(dir);
  fs::create_directories(root / "meshes");
  fs::create_directories(root / "backgrounds");
  const SegmentScheme scheme = mannequin_scheme(five_black);
  save_scheme(root / "scheme.json", scheme);
  for (int m = 0; m < meshes; ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "mesh_%04d.lmesh", m);
    save_mesh(root / "meshes" / name, make_mannequin(derive_seed(seed, {0x3e5, static_cast<std::uint64_t>(m)}), scheme));
  }
  for (int b = 0; b < backgrounds; ++b) {
    char name[32];
    std::snprintf(name, sizeof name, "bg_%04d.png", b);
    save_png_image(root / "backgrounds" / name,
                   make_synthetic_background(derive_seed(seed, {0xb6d, static_cast<std::uint64_t>(b)}), bg_size,
                                             bg_size));
  }
  std::cout << "wrote " << meshes << " meshes, " << backgrounds << " backgrounds and scheme '" << scheme.id()
            << "' to " << root.string() << "\n";
  return 0;
}

int cmd_gen_dataset(const GlobalOptions& g) {
  const auto c = load_config(g);
  const auto scheme = load_scheme(c.scheme_file);
  const auto m = gen_dataset(c.dataset_params(), scheme);
  std::cout << "dataset " << c.dataset_dir.string() << ": " << m.scenes.size() << " segment maps, "
            << m.train_count() << " train / " << m.test_count() << " test\n";
  return 0;
}

int cmd_search(const GlobalOptions& g, const std::string& resume) {
  const auto c = load_config(g);
  const auto scheme = load_scheme_ptr(c);
  const auto manifest = require_dataset(c, *scheme);
  std::vector<std::shared_ptr<const SegMap>> maps;
  for (const auto& s : load_split(c.dataset_dir, manifest, true, scheme->k())) maps.push_back(s.segmap);
  if (maps.empty()) throw DatasetError("train split is empty");
  const SegMapSceneSource source(std::move(maps), require_backgrounds(c), c.augmentation);
  const auto client = make_detector(c.detector, static_cast<std::size_t>(scheme->k()));
  std::optional<fs::path> resume_from;
  if (!resume.empty()) resume_from = fs::path(resume);
  const fs::path run_dir = c.out_dir / "search";
  const auto result = search_to_directory(c.search, scheme, source, *client, run_dir, c.checkpoint_every,
                                          resume_from, "{\"detector\":\"" + c.detector + "\"}");
  std::cout << "best pattern " << result.best.to_string() << " c=" << result.best_fitness << " -> "
            << (run_dir / "best_pattern.json").string() << "\n";
  return 0;
}

int cmd_baseline(const GlobalOptions& g, const std::string& kind, const std::string& output) {
  const auto c = load_config(g);
  const auto scheme = load_scheme_ptr(c);
  const BaselineKind k = parse_baseline_kind(kind);
  const BinaryPattern p = make_baseline(k, scheme, derive_seed(c.seed, {0xba5e, 0}));
  const fs::path path = output.empty() ? c.out_dir / ("baseline_" + baseline_name(k) + ".json") : fs::path(output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_pattern(path, p);
  std::cout << baseline_name(k) << " " << p.to_string() << " -> " << path.string() << "\n";
  return 0;
}

int cmd_evaluate(const GlobalOptions& g, const std::vector<std::string>& specs, int repeat, bool append) {
  const auto c = load_config(g);
  const auto scheme = load_scheme_ptr(c);
  const auto manifest = require_dataset(c, *scheme);
  const auto test = load_split(c.dataset_dir, manifest, false, scheme->k());
  const auto backgrounds = require_backgrounds(c);
  const auto client = make_detector(c.detector, static_cast<std::size_t>(scheme->k()));

  std::vector<std::pair<std::string, BinaryPattern>> patterns;
  if (specs.empty()) {
    for (auto kind : {BaselineKind::kAllBlack, BaselineKind::kAllWhite, BaselineKind::kRandom})
      patterns.emplace_back(baseline_name(kind),
                            make_baseline(kind, scheme, derive_seed(c.seed, {0xba5e, static_cast<std::uint64_t>(repeat)})));
    const fs::path best = c.out_dir / "search" / "best_pattern.json";
    if (!fs::exists(best)) throw ConfigError("no searched pattern at " + best.string() + "; run search first");
    patterns.emplace_back("searched", load_pattern(best, scheme));
  } else {
    for (const auto& spec : specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--pattern expects NAME=FILE, got '" + spec + "'");
      patterns.emplace_back(spec.substr(0, eq), load_pattern(spec.substr(eq + 1), scheme));
    }
  }
  const auto records = evaluate_conditions(test, backgrounds, patterns, *client, c.no_attack_intensity, c.seed,
                                           repeat, c.search.max_in_flight);
  fs::create_directories(c.out_dir);
  write_records(c.out_dir / "records.jsonl", records, append);
  std::cout << records.size() << " records -> " << (c.out_dir / "records.jsonl").string() << "\n";
  return 0;
}

int cmd_report(const GlobalOptions& g, const std::string& model) {
  fs::path dir;
  if (!g.out.empty()) {
    dir = g.out;
  } else {
    dir = load_config(g).out_dir;
  }
  const auto rows = write_report(dir, model);
  std::cout << report_text(rows, model);
  return 0;
}

int cmd_render_preview(const GlobalOptions& g, const std::string& scene, const std::string& pattern_file,
                       const std::string& output) {
  const auto c = load_config(g);
  const auto scheme = load_scheme_ptr(c);
  const auto manifest = require_dataset(c, *scheme);
  const SceneEntry* entry = nullptr;
  for (const auto& s : manifest.scenes)
    if (s.id == scene) entry = &s;
  if (!entry) throw DatasetError("scene '" + scene + "' is not in the dataset");
  const StoredSegMap stored = load_segmap(c.dataset_dir / entry->segmap);
  stored.segmap.validate(scheme->k());
  const auto& sm = stored.segmap;

  NirImage img;
  if (pattern_file.empty()) {
    // Label map: segment s drawn at a distinct gray level, background black.
    std::vector<std::uint8_t> px(sm.labels().size());
    for (std::size_t i = 0; i < px.size(); ++i)
      px[i] = sm.labels()[i] == SegMap::kBackground
                  ? 0
                  : static_cast<std::uint8_t>(40 + (sm.labels()[i] * 215) / std::max(1, scheme->k() - 1));
    img = NirImage(sm.width(), sm.height(), std::move(px));
  } else {
    const auto backgrounds = require_backgrounds(c);
    const NirImage bg = sample_background(c.seed, backgrounds, sm.width(), sm.height());
    img = synthesize_attack(sm, load_pattern(pattern_file, scheme), bg);
  }
  save_png_image(output, img);
  std::cout << "preview of " << scene << " -> " << output << "\n";
  return 0;
}

int cmd_run(const GlobalOptions& g) {
  const auto c = load_config(g);
  run_experiment(c);
  std::ifstream in(c.out_dir / "report.txt");
  std::cout << in.rdbuf();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial NIR clothing pattern search"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment config file (JSON)");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--out", g.out, "Override the output directory");
  app.add_option("--detector", g.detector, "Detector spec: http://host:port or synthetic:...");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

  int exit = 0;
  std::function<int()> action;

  auto* synth = app.add_subcommand("synth-assets", "Write procedural mannequins, backgrounds and a scheme");
  std::string synth_dir;
  int n_meshes = 20, n_backgrounds = 20, bg_size = 416;
  bool five_black = false;
  std::uint64_t synth_seed = 0;
  synth->add_option("dir", synth_dir, "Target directory")->required();
  synth->add_option("--meshes", n_meshes, "Number of meshes")->check(CLI::PositiveNumber);
  synth->add_option("--backgrounds", n_backgrounds, "Number of backgrounds")->check(CLI::PositiveNumber);
  synth->add_option("--background-size", bg_size, "Background edge length in pixels")->check(CLI::PositiveNumber);
  synth->add_flag("--five-black", five_black, "Freeze head, hands and feet black");
  synth->callback([&] {
    action = [&] { return cmd_synth_assets(synth_dir, n_meshes, n_backgrounds, five_black, bg_size,
                                           g.seed.value_or(synth_seed)); };
  });

  auto* gen = app.add_subcommand("gen-dataset", "Render the segment-map dataset");
  gen->callback([&] { action = [&] { return cmd_gen_dataset(g); }; });

  auto* search = app.add_subcommand("search", "Run the genetic search on the train split");
  std::string resume;
  search->add_option("--resume", resume, "Checkpoint file to continue from");
  search->callback([&] { action = [&] { return cmd_search(g, resume); }; });

  auto* baseline = app.add_subcommand("baseline", "Write a baseline pattern");
  std::string kind, baseline_out;
  baseline->add_option("kind", kind, "all_black | all_white | random")->required();
  baseline->add_option("-o,--output", baseline_out, "Pattern file (default <out>/baseline_<kind>.json)");
  baseline->callback([&] { action = [&] { return cmd_baseline(g, kind, baseline_out); }; });

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate patterns on the test split");
  std::vector<std::string> pattern_specs;
  int repeat = 0;
  bool append = false;
  evaluate->add_option("--pattern", pattern_specs, "NAME=FILE (repeatable; default: baselines + searched)");
  evaluate->add_option("--repeat", repeat, "Repeat index")->check(CLI::NonNegativeNumber);
  evaluate->add_flag("--append", append, "Append to records.jsonl");
  evaluate->callback([&] { action = [&] { return cmd_evaluate(g, pattern_specs, repeat, append); }; });

  auto* report = app.add_subcommand("report", "Summarize records.jsonl into report.json and report.txt");
  std::string model = "unknown";
  report->add_option("--model", model, "Model id written into the report");
  report->callback([&] { action = [&] { return cmd_report(g, model); }; });

  auto* preview = app.add_subcommand("render-preview", "Write a PNG of one dataset scene");
  std::string scene, preview_pattern, preview_out;
  preview->add_option("--scene", scene, "Scene id from the manifest")->required();
  preview->add_option("--pattern", preview_pattern, "Composite this pattern (default: label map)");
  preview->add_option("-o,--output", preview_out, "PNG path")->required();
  preview->callback([&] { action = [&] { return cmd_render_preview(g, scene, preview_pattern, preview_out); }; });

  auto* run = app.add_subcommand("run", "Dataset, search, evaluation and report in one go");
  run->callback([&] { action = [&] { return cmd_run(g); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_log_level(g.log_level);
    exit = action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    exit = exit_code(e.stage());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    exit = 1;
  }
  return exit;
}
