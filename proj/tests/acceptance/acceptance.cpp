// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "experiment_fixture.hpp"
#include "metrics_oracle.hpp"
#include "nirattack/compositor.hpp"
#include "nirattack/dataset.hpp"
#include "nirattack/detector.hpp"
#include "nirattack/error.hpp"
#include "nirattack/experiment.hpp"
#include "nirattack/ga.hpp"
#include "nirattack/log.hpp"
#include "nirattack/mannequin.hpp"
#include "nirattack/metrics.hpp"
#include "nirattack/pattern.hpp"
#include "nirattack/render.hpp"
#include "nirattack/rng.hpp"
#include "scene_support.hpp"
#include "test_support.hpp"

namespace {

using namespace nirattack;
namespace fs = std::filesystem;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------- GA optimality

Outcome ga_optimality() {
  constexpr int kK = 13;
  const auto scheme = std::make_shared<const SegmentScheme>(SegmentScheme::uniform("grid13", kK, {0}));
  const LabeledMesh mesh = testing::grid_mesh(kK, 0.5, *scheme);

  PoseBounds bounds;
  bounds.azimuth_deg = {-20, 20};
  bounds.elevation_deg = {-10, 10};
  bounds.distance_m = {3, 4};
  bounds.width = bounds.height = 48;
  bounds.focal = 40;
  std::vector<std::shared_ptr<const SegMap>> maps;
  for (std::uint64_t p = 0; p < 16; ++p) {
    auto sm = std::make_shared<const SegMap>(render_segmap(mesh, sample_camera(p, bounds)));
    std::vector<bool> seen(kK, false);
    for (auto l : sm->labels())
      if (l < kK) seen[l] = true;
    if (std::count(seen.begin(), seen.end(), true) != kK)
      return {false, fmt("pose %llu hides a segment", static_cast<unsigned long long>(p))};
    maps.push_back(std::move(sm));
  }
  std::vector<NirImage> bgs;
  for (int b = 0; b < 8; ++b) bgs.push_back(make_synthetic_background(b, 48, 48));
  const SegMapSceneSource source(maps, BackgroundPool(std::move(bgs)));

  SearchConfig cfg;
  cfg.population = 200;
  cfg.batch = 2;
  cfg.generations = 50;
  cfg.elitism = 1;
  cfg.max_in_flight = 1;

  int hits = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t run = 0; run < 20; ++run) {
    const auto det = SyntheticDetector::random(1000 + run, kK, 0.0, 0.5);
    // Brute force over the 2^12 free-bit patterns on the closed form.
    std::uint32_t best_mask = 0;
    double best = 2.0;
    for (std::uint32_t m = 0; m < (1u << (kK - 1)); ++m) {
      double logit = det.bias();
      for (int s = 1; s < kK; ++s)
        if ((m >> (s - 1)) & 1u) logit += det.weights()[s];
      const double c = testing::logistic(logit);
      if (c < best) best = c, best_mask = m;
    }
    cfg.seed = run;
    const auto res = run_search(cfg, scheme, source, det);
    std::uint32_t got = 0;
    for (int s = 1; s < kK; ++s)
      if (res.best.bit(static_cast<std::size_t>(s))) got |= 1u << (s - 1);
    hits += got == best_mask ? 1 : 0;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {hits >= 19 && secs < 60.0, fmt("%d/20 runs hit the brute-force optimum, %.1f s", hits, secs)};
}

// ---------------------------------------------------------------- ranking

Outcome ranking_suite() {
  Rng rng(77);
  double worst_affine = 0.0, worst_sum = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 200);
    std::vector<double> c(n);
    for (auto& v : c) v = uniform01(rng);
    const auto f = rank_scores(c);
    const auto lo = std::min_element(c.begin(), c.end()) - c.begin();
    const auto hi = std::max_element(c.begin(), c.end()) - c.begin();
    if (f[lo] != 1.0 || f[hi] != 0.0) return {false, fmt("endpoint scores wrong in vector %d", t)};
    for (double v : f)
      if (!(v >= 0.0 && v <= 1.0)) return {false, fmt("score %g outside [0,1]", v)};
    const double a = 0.01 + uniform01(rng) * 10.0, b = uniform_real(rng, -5.0, 5.0);
    std::vector<double> mapped(n);
    for (std::size_t i = 0; i < n; ++i) mapped[i] = a * c[i] + b;
    const auto g = rank_scores(mapped);
    for (std::size_t i = 0; i < n; ++i) worst_affine = std::max(worst_affine, std::abs(f[i] - g[i]));
    const auto p = selection_probabilities(f);
    double sum = 0.0;
    for (double v : p) sum += v;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  const std::vector<double> equal(4, 0.42);
  const auto idx = select_indices(rank_scores(equal), 5, 10000);
  double worst_freq = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    worst_freq = std::max(worst_freq, std::abs(std::count(idx.begin(), idx.end(), i) / 1e4 - 0.25));
  const bool ok = worst_affine < 1e-12 && worst_sum < 1e-12 && worst_freq <= 0.02;
  return {ok, fmt("affine dev %.2e, |sum p - 1| %.2e, uniform freq dev %.4f", worst_affine, worst_sum, worst_freq)};
}

// ---------------------------------------------------------------- closure

bool valid(const BinaryPattern& p) {
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p.bit(s) > 1) return false;
    if (p.scheme().is_forced(static_cast<SegmentId>(s)) && p.bit(s)) return false;
  }
  return p.size() == static_cast<std::size_t>(p.scheme().k());
}

Outcome operator_closure() {
  const auto scheme = std::make_shared<const SegmentScheme>(mannequin_scheme(true));
  Rng rng(31);
  std::vector<BinaryPattern> pool{new_random(0, scheme), new_random(1, scheme)};
  for (int t = 0; t < 10000; ++t) {
    const auto op = uniform_index(rng, 3);
    const auto& a = pool[uniform_index(rng, pool.size())];
    const auto& b = pool[uniform_index(rng, pool.size())];
    std::vector<BinaryPattern> out;
    if (op == 0) {
      out.push_back(new_random(rng(), scheme));
    } else if (op == 1) {
      auto [x, y] = crossover(a, b, 1 + uniform_index(rng, a.size() - 1));
      out.push_back(std::move(x));
      out.push_back(std::move(y));
    } else {
      out.push_back(mutate(a, rng()));
    }
    for (auto& p : out) {
      if (!valid(p)) return {false, fmt("invalid pattern after %d applications", t)};
      pool.push_back(std::move(p));
    }
    if (pool.size() > 64) pool.erase(pool.begin(), pool.begin() + 32);
  }

  const testing::FixedMapSource source(testing::strip_segmap(scheme->k()));
  const auto det = SyntheticDetector::random(5, scheme->k(), 0.0);
  SearchConfig cfg;
  cfg.population = 60;
  cfg.batch = 2;
  cfg.generations = 50;
  cfg.p_mut = 0.5;
  cfg.seed = 3;
  std::size_t checked = 0;
  bool ok = true;
  run_search(cfg, scheme, source, det, [&](const PopulationState& st, const auto&) {
    for (const auto& p : st.patterns) {
      ok = ok && valid(p);
      ++checked;
    }
  });
  return {ok, fmt("1e4 operator applications valid, %zu patterns over 51 generations checked", checked)};
}

// ---------------------------------------------------------------- rasterizer

Outcome rasterizer_oracles() {
  const SegmentScheme scheme = SegmentScheme::uniform("r8", 8, {});
  std::vector<std::string> notes;
  bool ok = true;

  {  // analytic: unit square at z = 4, f = 200 -> 50 px side centred at (100, 100)
    std::vector<Eigen::Vector3d> v;
    std::vector<Face> f;
    std::vector<SegmentId> l;
    testing::add_square(v, f, l, 0, 0, 4.0, 1.0, 3);
    const SegMap sm = render_segmap(LabeledMesh(v, f, l, scheme), testing::axis_camera(200, 200, 200));
    const auto box = sm.silhouette_box();
    const bool edges = box && std::abs(box->x_min - 75) <= 1 && std::abs(box->x_max - 125) <= 1 &&
                       std::abs(box->y_min - 75) <= 1 && std::abs(box->y_max - 125) <= 1;
    ok = ok && edges;
    notes.push_back(edges ? "square edges within 1 px" : "square edges off");
  }

  {  // occlusion vs painter's ordering on interior pixels
    std::size_t interior = 0, match = 0;
    for (bool near_first : {true, false}) {
      std::vector<Eigen::Vector3d> v;
      std::vector<Face> f;
      std::vector<SegmentId> l;
      auto near = [&] { testing::add_square(v, f, l, -0.2, 0.0, 2.0, 1.0, 1); };
      auto far = [&] { testing::add_square(v, f, l, 0.4, 0.0, 4.0, 2.0, 2); };
      if (near_first) near(), far();
      else far(), near();
      const SegMap sm = render_segmap(LabeledMesh(v, f, l, scheme), testing::axis_camera(200, 200, 200));
      auto inside = [](double cx, double side, double z, int x, int y, double margin) {
        const double px = x + 0.5, py = y + 0.5;
        const double x0 = 200.0 * (cx - side / 2) / z + 100, x1 = 200.0 * (cx + side / 2) / z + 100;
        const double y0 = 200.0 * (-side / 2) / z + 100, y1 = 200.0 * (side / 2) / z + 100;
        return px > x0 + margin && px < x1 - margin && py > y0 + margin && py < y1 - margin;
      };
      for (int y = 0; y < 200; ++y)
        for (int x = 0; x < 200; ++x) {
          const bool in_near = inside(-0.2, 1.0, 2.0, x, y, 1.0), in_far = inside(0.4, 2.0, 4.0, x, y, 1.0);
          if ((inside(-0.2, 1.0, 2.0, x, y, -1.0) && !in_near) || (inside(0.4, 2.0, 4.0, x, y, -1.0) && !in_far))
            continue;
          std::uint8_t expect = SegMap::kBackground;
          if (in_far) expect = 2;
          if (in_near) expect = 1;
          ++interior;
          match += sm.at(x, y) == expect ? 1 : 0;
        }
    }
    ok = ok && match == interior;
    notes.push_back(fmt("occlusion %zu/%zu interior pixels", match, interior));
  }

  {  // ray-cast agreement over random triangle pairs
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> xy(-1.5, 1.5), near_z(2.0, 3.9), far_z(4.1, 6.0);
    const CameraPose cam = testing::axis_camera(96, 96, 80.0);
    std::size_t covered = 0, agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<testing::CamTriangle> tris(2);
      for (int t = 0; t < 2; ++t) {
        auto& zd = t == 0 ? near_z : far_z;
        for (Eigen::Vector3d* p : {&tris[t].a, &tris[t].b, &tris[t].c}) *p = {xy(rng), xy(rng), zd(rng)};
        tris[t].label = static_cast<std::uint8_t>(t + 1);
      }
      if (rng() & 1) std::swap(tris[0], tris[1]);
      std::vector<Eigen::Vector3d> v;
      std::vector<SegmentId> l;
      for (const auto& t : tris) {
        v.insert(v.end(), {t.a, t.b, t.c});
        l.insert(l.end(), 3, t.label);
      }
      const SegMap sm = render_segmap(LabeledMesh(v, {{0, 1, 2}, {3, 4, 5}}, l, scheme), cam);
      for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
          const auto oracle = testing::ray_cast_label(tris, cam, x, y);
          if (!oracle && sm.at(x, y) == SegMap::kBackground) continue;
          ++covered;
          agree += (oracle && *oracle == sm.at(x, y)) ? 1 : 0;
        }
    }
    const double ratio = covered ? static_cast<double>(agree) / static_cast<double>(covered) : 0.0;
    ok = ok && ratio >= 0.999;
    notes.push_back(fmt("ray-cast agreement %.5f", ratio));
  }
  return {ok, notes[0] + ", " + notes[1] + ", " + notes[2]};
}

// ---------------------------------------------------------------- compositor

Outcome compositor_exactness() {
  constexpr int kK = 12;
  const auto scheme = std::make_shared<const SegmentScheme>(SegmentScheme::uniform("c12", kK, {0, 5}));
  Rng rng(8);
  std::size_t pixels = 0;
  for (int t = 0; t < 100; ++t) {
    const int w = 16 + static_cast<int>(uniform_index(rng, 32)), h = 16 + static_cast<int>(uniform_index(rng, 32));
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h);
    for (auto& l : labels) {
      const auto r = uniform_index(rng, kK + 3);
      l = r >= kK ? SegMap::kBackground : static_cast<std::uint8_t>(r);
    }
    const SegMap sm(w, h, labels);
    NirImage bg(w, h);
    for (auto& p : bg.pixels()) p = static_cast<std::uint8_t>(rng() & 0xff);
    const auto pattern = new_random(rng(), scheme);
    const NirImage out = synthesize_attack(sm, pattern, bg);
    for (std::size_t i = 0; i < labels.size(); ++i, ++pixels) {
      const auto v = out.pixels()[i];
      if (!(v == 0 || v == 255 || v == bg.pixels()[i])) return {false, fmt("trichotomy broken at trial %d", t)};
      if (labels[i] == SegMap::kBackground) {
        if (v != bg.pixels()[i]) return {false, "background pixel changed"};
      } else if (v != (pattern.bit(labels[i]) ? 255 : 0)) {
        return {false, fmt("segment %d pixel is %d with bit %d", labels[i], v, pattern.bit(labels[i]))};
      }
    }
  }
  return {true, fmt("%zu pixels over 100 compositions", pixels)};
}

// ---------------------------------------------------------------- metrics

Outcome metric_oracle() {
  Rng rng(404);
  int undefined = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 30));
    const auto clean = testing::random_records(rng, n, "no_attack");
    const auto attacked = testing::random_records(rng, n, "searched");
    const auto oc = testing::recount(testing::to_lines(clean));
    const auto oa = testing::recount(testing::to_lines(attacked));
    if (average_confidence(clean) != oc.ac || average_confidence(attacked) != oa.ac)
      return {false, fmt("AC mismatch in set %d", t)};
    if (detection_rate(clean) != 100.0 * static_cast<double>(oc.true_positive_scenes) / n)
      return {false, fmt("DR mismatch in set %d", t)};
    if (oc.true_positive_scenes == 0) {
      ++undefined;
      try {
        attack_success_rate(clean, attacked);
        return {false, "ASR with N_0 = 0 did not raise"};
      } catch (const MetricUndefined&) {
      }
      continue;
    }
    const double expect =
        (1.0 - static_cast<double>(oa.person_detections) / static_cast<double>(oc.true_positive_scenes)) * 100.0;
    if (attack_success_rate(clean, attacked) != expect) return {false, fmt("ASR mismatch in set %d", t)};
  }
  const bool spots = attack_success_rate(100, 25) == 75.0 && attack_success_rate(100, 0) == 100.0;
  return {spots, fmt("100 sets exact (%d with N_0 = 0), ASR(100,25)=%.1f, ASR(100,0)=%.1f", undefined,
                     attack_success_rate(100, 25), attack_success_rate(100, 0))};
}

// ---------------------------------------------------------------- experiment

struct ExperimentRun {
  std::vector<ConditionSummary> rows;
  fs::path out;
};

ExperimentRun run_small_experiment(const fs::path& root, const std::string& out_name) {
  auto cfg = testing::small_experiment(root, 5, "synthetic:bias=2,seed=17");
  cfg.out_dir = root / out_name;
  cfg.search.population = 120;
  cfg.search.generations = 40;
  return {run_experiment(cfg), cfg.out_dir};
}

Outcome baseline_dominance(const ExperimentRun& run) {
  std::map<std::string, double> ac;
  for (const auto& r : run.rows) ac[r.condition] = r.ac_mean;
  const bool ok = ac["searched"] <= ac["all_black"] && ac["searched"] <= ac["all_white"] &&
                  ac["searched"] <= ac["random"];
  return {ok, fmt("AC searched %.4f, all_black %.4f, all_white %.4f, random %.4f", ac["searched"], ac["all_black"],
                  ac["all_white"], ac["random"])};
}

Outcome determinism(const ExperimentRun& a, const ExperimentRun& b) {
  const auto ha = slurp(a.out / "search_r0" / "history.csv"), hb = slurp(b.out / "search_r0" / "history.csv");
  const auto pa = slurp(a.out / "search_r0" / "best_pattern.json");
  const auto pb = slurp(b.out / "search_r0" / "best_pattern.json");
  const bool ok = !ha.empty() && !pa.empty() && ha == hb && pa == pb;
  return {ok, fmt("history.csv %zu bytes, best_pattern.json %zu bytes, %s", ha.size(), pa.size(),
                  ok ? "identical" : "differ")};
}

}  // namespace

int main() {
  set_log_level("warn");
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };

  report("ga-optimality", ga_optimality);
  report("ranking-formula", ranking_suite);
  report("operator-closure", operator_closure);
  report("rasterizer-oracles", rasterizer_oracles);
  report("compositor-bit-exactness", compositor_exactness);
  report("metric-oracle-equivalence", metric_oracle);

  testing::TempDir root("acceptance");
  testing::write_assets(root.path(), mannequin_scheme(false), 4, 4);
  std::optional<ExperimentRun> first, second;
  report("baseline-dominance", [&] {
    first = run_small_experiment(root.path(), "run_a");
    return baseline_dominance(*first);
  });
  report("determinism", [&] {
    if (!first) return Outcome{false, "first run missing"};
    second = run_small_experiment(root.path(), "run_b");
    return determinism(*first, *second);
  });
  return failures == 0 ? 0 : 1;
}
