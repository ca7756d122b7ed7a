#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nirattack/detector.hpp"
#include "nirattack/image.hpp"
#include "nirattack/pattern.hpp"
#include "nirattack/render.hpp"

namespace nirattack {

struct SearchConfig {
  std::size_t population = 1000;  // N
  std::size_t batch = 300;        // B, scenes per pattern evaluation
  double p_cross = 0.5;
  double p_mut = 0.01;
  std::size_t generations = 100;
  std::uint64_t seed = 0;
  std::size_t elitism = 1;
  std::size_t max_in_flight = 8;  // concurrent detector calls
  bool record_wall_time = false;  // history.csv wall_ms column; 0 when off

  /// Throws ConfigError.
  void validate() const;

  std::string to_json() const;
  /// Missing keys keep their defaults.
  static SearchConfig from_json(const std::string& text);
};

/// One scene of a batch: where the person is (segment map) and what is
/// behind them.
struct Scene {
  std::shared_ptr<const SegMap> segmap;
  NirImage background;
};

/// Supplies a fresh scene batch per generation.
class SceneSource {
 public:
  virtual ~SceneSource() = default;
  /// `count` scenes, deterministic per seed.
  virtual std::vector<Scene> batch(std::size_t count, std::uint64_t seed) const = 0;
};

struct PopulationState {
  std::vector<BinaryPattern> patterns;
  std::vector<double> fitness;  // c_i; empty until evaluated
  std::size_t generation = 0;
  std::optional<BinaryPattern> best;
  double best_fitness = 1.0;

  bool evaluated() const noexcept { return !patterns.empty() && fitness.size() == patterns.size(); }
};

struct GenerationStats {
  std::size_t generation = 0;
  double c_min = 0, c_mean = 0, c_max = 0;
  std::int64_t wall_ms = 0;
};

/// N random patterns, seeded per individual from the run seed.
PopulationState initial_population(const SearchConfig& config,
                                   std::shared_ptr<const SegmentScheme> scheme);

/// Mean over scenes of the per-image maximum person confidence (0 when
/// nothing is detected) for `pattern` composited into each scene.
double pattern_fitness(const BinaryPattern& pattern, std::span<const Scene> scenes,
                       const DetectorClient& client, std::size_t max_in_flight = 8);

/// Fills `fitness` for every pattern on the same scenes and updates the
/// best-so-far record. Identical patterns are evaluated once.
PopulationState evaluate_population(PopulationState state, std::span<const Scene> scenes,
                                    const DetectorClient& client, std::size_t max_in_flight = 8);

/// f_i = (c_max - c_i) / (c_max - c_min); all ones when every c_i is equal.
std::vector<double> rank_scores(std::span<const double> fitness);

/// p_n = f_n / sum f. Requires sum f > 0.
std::vector<double> selection_probabilities(std::span<const double> scores);

/// `count` independent draws with replacement, index n with probability p_n.
std::vector<std::size_t> select_indices(std::span<const double> scores, std::uint64_t seed,
                                        std::size_t count);

/// Pattern-level convenience over select_indices with count = patterns.size().
std::vector<BinaryPattern> select_next(std::span<const BinaryPattern> patterns,
                                       std::span<const double> scores, std::uint64_t seed);

/// Genetic phase of one generation on an evaluated state: rank, select N,
/// crossover consecutive pairs with probability p_cross, mutate each
/// individual with probability p_mut, then put the `elitism` best patterns
/// in front unchanged. The result is unevaluated and has generation + 1.
PopulationState breed(const PopulationState& state, const SearchConfig& config);

/// breed() followed by evaluate_population() on `scenes`.
PopulationState evolve_generation(const PopulationState& state, const SearchConfig& config,
                                  std::span<const Scene> scenes, const DetectorClient& client);

GenerationStats summarize(const PopulationState& evaluated);

/// Seed of the scene batch used in generation `generation`.
std::uint64_t scene_batch_seed(std::uint64_t run_seed, std::size_t generation);

struct SearchResult {
  BinaryPattern best;
  double best_fitness;
  std::vector<GenerationStats> history;
  PopulationState final_state;
};

/// Called after each generation is evaluated (including generation 0).
using GenerationCallback =
    std::function<void(const PopulationState&, const std::vector<GenerationStats>&)>;

/// Resumable snapshot of a run.
struct Checkpoint {
  PopulationState state;
  std::vector<GenerationStats> history;

  std::string to_json() const;
  static Checkpoint from_json(const std::string& text, std::shared_ptr<const SegmentScheme> scheme);
};

/// Evaluates generation 0, then evolves until `config.generations`
/// generations have been bred. With `resume`, continues from the snapshot.
SearchResult run_search(const SearchConfig& config, std::shared_ptr<const SegmentScheme> scheme,
                        const SceneSource& source, const DetectorClient& client,
                        const GenerationCallback& on_generation = {},
                        std::optional<Checkpoint> resume = std::nullopt);

/// CSV with header `generation,c_min,c_mean,c_max,wall_ms`.
std::string format_history_csv(std::span<const GenerationStats> history);

}  // namespace nirattack
