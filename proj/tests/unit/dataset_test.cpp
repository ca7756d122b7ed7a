#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "experiment_fixture.hpp"
#include "nirattack/dataset.hpp"
#include "nirattack/error.hpp"
#include "nirattack/experiment.hpp"
#include "nirattack/mannequin.hpp"
#include "test_support.hpp"

namespace nirattack {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class DatasetTest : public ::testing::Test {
 protected:
  void SetUp() override { testing::write_assets(dir_.path(), scheme_, 4, 3); }

  DatasetParams params(const std::string& out, std::uint64_t seed = 7) const {
    auto p = testing::small_experiment(dir_.path(), seed, "").dataset_params();
    p.out_dir = dir_ / out;
    return p;
  }

  testing::TempDir dir_{"dataset"};
  SegmentScheme scheme_ = mannequin_scheme(false);
};

TEST_F(DatasetTest, FourMeshesFivePosesSplit) {
  const auto m = gen_dataset(params("d"), scheme_);
  ASSERT_EQ(m.scenes.size(), 20u);
  EXPECT_EQ(m.train_count(), 16u);
  EXPECT_EQ(m.test_count(), 4u);
  std::set<std::string> ids;
  for (const auto& s : m.scenes) {
    ids.insert(s.id);
    EXPECT_TRUE(fs::exists(dir_ / "d" / s.segmap));
  }
  EXPECT_EQ(ids.size(), 20u);
  const auto train = load_split(dir_ / "d", load_manifest(dir_ / "d"), true, scheme_.k());
  const auto test = load_split(dir_ / "d", load_manifest(dir_ / "d"), false, scheme_.k());
  EXPECT_EQ(train.size(), 16u);
  ASSERT_EQ(test.size(), 4u);
  for (const auto& s : test) {
    EXPECT_TRUE(s.segmap->silhouette_box().has_value());
    EXPECT_EQ(s.segmap->width(), 96);
  }
}

TEST_F(DatasetTest, ManifestAndMapsAreByteIdenticalPerSeed) {
  const auto a = gen_dataset(params("a"), scheme_);
  gen_dataset(params("b"), scheme_);
  gen_dataset(params("c", 8), scheme_);
  EXPECT_EQ(slurp(dir_ / "a" / "manifest.json"), slurp(dir_ / "b" / "manifest.json"));
  EXPECT_NE(slurp(dir_ / "a" / "manifest.json"), slurp(dir_ / "c" / "manifest.json"));
  for (const auto& s : a.scenes) EXPECT_EQ(slurp(dir_ / "a" / s.segmap), slurp(dir_ / "b" / s.segmap));
}

TEST_F(DatasetTest, MeshModeKeepsPosesTogether) {
  auto p = params("m");
  p.split_mode = SplitMode::kMesh;
  p.train_fraction = 0.75;
  const auto m = gen_dataset(p, scheme_);
  std::map<std::string, std::set<bool>> per_mesh;
  for (const auto& s : m.scenes) per_mesh[s.mesh].insert(s.train);
  ASSERT_EQ(per_mesh.size(), 4u);
  for (const auto& [mesh, splits] : per_mesh) EXPECT_EQ(splits.size(), 1u) << mesh;
  EXPECT_EQ(m.test_count(), 5u);
}

TEST_F(DatasetTest, MissingMeshDirIsDatasetError) {
  auto p = params("x");
  p.mesh_dir = dir_ / "nope";
  EXPECT_THROW(gen_dataset(p, scheme_), DatasetError);
}

TEST(SplitAssignment, ExactCountsAndDeterminism) {
  for (std::size_t n : {1u, 5u, 20u, 101u}) {
    const auto s = split_assignment(n, 0.8, 3);
    EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), true)),
              static_cast<std::size_t>(std::llround(0.8 * n)));
    EXPECT_EQ(s, split_assignment(n, 0.8, 3));
  }
}

TEST(SceneSource, WithoutReplacementWhenPoolSuffices) {
  std::vector<std::shared_ptr<const SegMap>> maps;
  for (int i = 0; i < 10; ++i)
    maps.push_back(std::make_shared<const SegMap>(4, 4, std::vector<std::uint8_t>(16, static_cast<std::uint8_t>(i))));
  const SegMapSceneSource src(maps, BackgroundPool({make_synthetic_background(0, 8, 8)}));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = src.batch(10, seed);
    std::set<const SegMap*> seen;
    for (const auto& s : b) {
      seen.insert(s.segmap.get());
      EXPECT_EQ(s.background.width(), 4);
    }
    EXPECT_EQ(seen.size(), 10u);
  }
  EXPECT_EQ(src.batch(25, 1).size(), 25u);
}

TEST(Baselines, Definitions) {
  const auto scheme = std::make_shared<const SegmentScheme>(mannequin_scheme(false));
  const auto black = make_baseline(BaselineKind::kAllBlack, scheme, 0);
  EXPECT_EQ(black.ones(), 0u);
  const auto white = make_baseline(BaselineKind::kAllWhite, scheme, 0);
  for (std::size_t s = 0; s < white.size(); ++s)
    EXPECT_EQ(white.bit(s), (scheme->is_forced(static_cast<SegmentId>(s)) || s == *scheme->head()) ? 0 : 1);
  EXPECT_EQ(make_baseline(BaselineKind::kRandom, scheme, 4), make_baseline(BaselineKind::kRandom, scheme, 4));
  EXPECT_EQ(parse_baseline_kind("all_white"), BaselineKind::kAllWhite);
  EXPECT_EQ(baseline_name(BaselineKind::kRandom), "random");
  EXPECT_THROW(parse_baseline_kind("gray"), ConfigError);
}

TEST_F(DatasetTest, ExperimentSearchedBeatsBaselinesAndNoAttackIsDetected) {
  // Bias 8 with |w| <= 0.5 keeps every no-attack logit positive.
  auto cfg = testing::small_experiment(dir_.path(), 3, "synthetic:bias=8,seed=3,scale=0.5");
  const auto rows = run_experiment(cfg);
  std::map<std::string, ConditionSummary> by;
  for (const auto& r : rows) by[r.condition] = r;
  ASSERT_EQ(by.size(), 5u);
  EXPECT_TRUE(by["no_attack"].is_detection_rate);
  EXPECT_EQ(by["no_attack"].rate_mean, 100.0);
  for (const char* b : {"all_black", "all_white", "random"}) EXPECT_LE(by["searched"].ac_mean, by[b].ac_mean) << b;
  for (const char* f : {"config.json", "records.jsonl", "report.json", "report.txt", "search_r0/history.csv",
                        "search_r0/best_pattern.json", "search_r0/config.json"})
    EXPECT_TRUE(fs::exists(cfg.out_dir / f)) << f;
}

TEST_F(DatasetTest, ConfigRoundTripResolvesRelativePaths) {
  const std::string text = R"({"scheme":"scheme.json","mesh_dir":"meshes","background_dir":"backgrounds",
    "dataset_dir":"ds","out":"o","seed":4,"search":{"N":10,"B":2,"generations":1},
    "render":{"width":64,"height":48,"focal":80},"repeats":2})";
  const auto c = ExperimentConfig::from_json(text, dir_.path());
  EXPECT_EQ(c.mesh_dir, dir_ / "meshes");
  EXPECT_EQ(c.search.population, 10u);
  EXPECT_EQ(c.pose_bounds.height, 48);
  EXPECT_EQ(c.repeats, 2u);
  c.validate(true);
  const auto again = ExperimentConfig::from_json(c.to_json(), "/");
  EXPECT_EQ(again.to_json(), c.to_json());
  EXPECT_THROW(ExperimentConfig::from_json(R"({"seed":"x"})", dir_.path()), ConfigError);
}

}  // namespace
}  // namespace nirattack
