#include "nirattack/ga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "json.hpp"
#include "nirattack/compositor.hpp"
#include "nirattack/error.hpp"
#include "nirattack/parallel.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

using nlohmann::json;

namespace {

// Substream tags for derive_seed.
enum Stream : std::uint64_t {
  kInit = 1,
  kScenes = 2,
  kSelect = 3,
  kCross = 4,
  kMutGate = 5,
  kMutIndex = 6,
};

}  // namespace

void SearchConfig::validate() const {
  if (population < 2) throw ConfigError("search: population N must be >= 2");
  if (batch < 1) throw ConfigError("search: batch size B must be >= 1");
  if (!(p_cross >= 0.0 && p_cross <= 1.0)) throw ConfigError("search: p_cross must lie in [0,1]");
  if (!(p_mut >= 0.0 && p_mut <= 1.0)) throw ConfigError("search: p_mut must lie in [0,1]");
  if (elitism >= population) throw ConfigError("search: elitism must be < N");
  if (max_in_flight < 1) throw ConfigError("search: max_in_flight must be >= 1");
}

std::string SearchConfig::to_json() const {
  return json{{"N", population},
              {"B", batch},
              {"p_cross", p_cross},
              {"p_mut", p_mut},
              {"generations", generations},
              {"seed", seed},
              {"elitism", elitism},
              {"max_in_flight", max_in_flight},
              {"record_wall_time", record_wall_time}}
      .dump(2);
}

SearchConfig SearchConfig::from_json(const std::string& text) {
  SearchConfig c;
  try {
    const json j = json::parse(text);
    c.population = j.value("N", c.population);
    c.batch = j.value("B", c.batch);
    c.p_cross = j.value("p_cross", c.p_cross);
    c.p_mut = j.value("p_mut", c.p_mut);
    c.generations = j.value("generations", c.generations);
    c.seed = j.value("seed", c.seed);
    c.elitism = j.value("elitism", c.elitism);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.record_wall_time = j.value("record_wall_time", c.record_wall_time);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid search config: ") + e.what());
  }
  c.validate();
  return c;
}

PopulationState initial_population(const SearchConfig& config,
                                   std::shared_ptr<const SegmentScheme> scheme) {
  config.validate();
  PopulationState state;
  state.patterns.reserve(config.population);
  for (std::size_t i = 0; i < config.population; ++i)
    state.patterns.push_back(new_random(derive_seed(config.seed, {kInit, i}), scheme));
  return state;
}

double pattern_fitness(const BinaryPattern& pattern, std::span<const Scene> scenes,
                       const DetectorClient& client, std::size_t max_in_flight) {
  if (scenes.empty()) throw DatasetError("fitness evaluation needs at least one scene");
  std::vector<double> per_image(scenes.size());
  parallel_for(scenes.size(), max_in_flight, [&](std::size_t j) {
    const Scene& sc = scenes[j];
    const NirImage img = synthesize_attack(*sc.segmap, pattern, sc.background);
    per_image[j] = max_person_confidence(client.detect(img, *sc.segmap));
  });
  return std::accumulate(per_image.begin(), per_image.end(), 0.0) / static_cast<double>(scenes.size());
}

PopulationState evaluate_population(PopulationState state, std::span<const Scene> scenes,
                                    const DetectorClient& client, std::size_t max_in_flight) {
  if (scenes.empty()) throw DatasetError("fitness evaluation needs at least one scene");
  const std::size_t n = state.patterns.size();

  std::unordered_map<std::string, std::size_t> slot_of;
  std::vector<std::size_t> slot(n), representative;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = slot_of.try_emplace(state.patterns[i].to_string(), representative.size());
    if (inserted) representative.push_back(i);
    slot[i] = it->second;
  }

  const std::size_t b = scenes.size();
  std::vector<double> conf(representative.size() * b);
  parallel_for(conf.size(), max_in_flight, [&](std::size_t item) {
    const std::size_t u = item / b, j = item % b;
    const Scene& sc = scenes[j];
    const NirImage img = synthesize_attack(*sc.segmap, state.patterns[representative[u]], sc.background);
    conf[item] = max_person_confidence(client.detect(img, *sc.segmap));
  });

  std::vector<double> unique_fitness(representative.size());
  for (std::size_t u = 0; u < representative.size(); ++u) {
    double sum = 0.0;
    for (std::size_t j = 0; j < b; ++j) sum += conf[u * b + j];
    unique_fitness[u] = sum / static_cast<double>(b);
  }

  state.fitness.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    state.fitness[i] = unique_fitness[slot[i]];
    if (!state.best || state.fitness[i] < state.best_fitness) {
      state.best = state.patterns[i];
      state.best_fitness = state.fitness[i];
    }
  }
  return state;
}

std::vector<double> rank_scores(std::span<const double> fitness) {
  if (fitness.empty()) return {};
  const auto [lo, hi] = std::minmax_element(fitness.begin(), fitness.end());
  const double c_min = *lo, c_max = *hi;
  std::vector<double> f(fitness.size(), 1.0);
  if (c_max == c_min) return f;
  const double range = c_max - c_min;
  for (std::size_t i = 0; i < fitness.size(); ++i) f[i] = (c_max - fitness[i]) / range;
  // Exact endpoints regardless of rounding.
  f[static_cast<std::size_t>(lo - fitness.begin())] = 1.0;
  f[static_cast<std::size_t>(hi - fitness.begin())] = 0.0;
  return f;
}

std::vector<double> selection_probabilities(std::span<const double> scores) {
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (!(total > 0.0)) throw Error("selection needs a positive total score");
  std::vector<double> p(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) p[i] = scores[i] / total;
  return p;
}

std::vector<std::size_t> select_indices(std::span<const double> scores, std::uint64_t seed,
                                        std::size_t count) {
  std::vector<double> cumulative(scores.size());
  std::partial_sum(scores.begin(), scores.end(), cumulative.begin());
  const double total = cumulative.empty() ? 0.0 : cumulative.back();
  if (!(total > 0.0)) throw Error("selection needs a positive total score");

  Rng rng(seed);
  std::vector<std::size_t> out(count);
  for (auto& idx : out) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;  // u rounded up to total
    // Skip zero-score entries that share the cumulative value.
    while (scores[static_cast<std::size_t>(it - cumulative.begin())] <= 0.0 && it != cumulative.begin()) --it;
    idx = static_cast<std::size_t>(it - cumulative.begin());
  }
  return out;
}

std::vector<BinaryPattern> select_next(std::span<const BinaryPattern> patterns,
                                       std::span<const double> scores, std::uint64_t seed) {
  if (patterns.size() != scores.size()) throw Error("select_next: patterns and scores differ in size");
  std::vector<BinaryPattern> out;
  out.reserve(patterns.size());
  for (std::size_t i : select_indices(scores, seed, patterns.size())) out.push_back(patterns[i]);
  return out;
}

PopulationState breed(const PopulationState& state, const SearchConfig& config) {
  config.validate();
  if (!state.evaluated()) throw Error("breed: population has not been evaluated");
  const std::size_t n = config.population;
  const std::size_t g = state.generation;
  const std::uint64_t seed = config.seed;

  const std::vector<double> scores = rank_scores(state.fitness);
  std::vector<BinaryPattern> pool;
  pool.reserve(n);
  for (std::size_t i : select_indices(scores, derive_seed(seed, {kSelect, g}), n))
    pool.push_back(state.patterns[i]);

  const std::size_t k = pool.front().size();
  for (std::size_t pair = 0; 2 * pair + 1 < n; ++pair) {
    if (k < 2) break;
    Rng rng(derive_seed(seed, {kCross, g, pair}));
    if (uniform01(rng) >= config.p_cross) continue;
    const std::size_t cut = 1 + uniform_index(rng, k - 1);
    auto [c1, c2] = crossover(pool[2 * pair], pool[2 * pair + 1], cut);
    pool[2 * pair] = std::move(c1);
    pool[2 * pair + 1] = std::move(c2);
  }

  const bool can_mutate = !pool.front().scheme().free_segments().empty();
  for (std::size_t i = 0; i < n && can_mutate; ++i) {
    Rng gate(derive_seed(seed, {kMutGate, g, i}));
    if (uniform01(gate) < config.p_mut) pool[i] = mutate(pool[i], derive_seed(seed, {kMutIndex, g, i}));
  }

  PopulationState next;
  next.generation = g + 1;
  next.best = state.best;
  next.best_fitness = state.best_fitness;
  next.patterns.reserve(n);

  std::vector<std::size_t> order(state.patterns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return state.fitness[a] < state.fitness[b]; });
  for (std::size_t e = 0; e < config.elitism; ++e) next.patterns.push_back(state.patterns[order[e]]);
  for (std::size_t i = 0; next.patterns.size() < n; ++i) next.patterns.push_back(std::move(pool[i]));
  return next;
}

PopulationState evolve_generation(const PopulationState& state, const SearchConfig& config,
                                  std::span<const Scene> scenes, const DetectorClient& client) {
  return evaluate_population(breed(state, config), scenes, client, config.max_in_flight);
}

GenerationStats summarize(const PopulationState& evaluated) {
  if (!evaluated.evaluated()) throw Error("summarize: population has not been evaluated");
  const auto [lo, hi] = std::minmax_element(evaluated.fitness.begin(), evaluated.fitness.end());
  GenerationStats s;
  s.generation = evaluated.generation;
  s.c_min = *lo;
  s.c_max = *hi;
  s.c_mean = std::accumulate(evaluated.fitness.begin(), evaluated.fitness.end(), 0.0) /
             static_cast<double>(evaluated.fitness.size());
  return s;
}

std::uint64_t scene_batch_seed(std::uint64_t run_seed, std::size_t generation) {
  return derive_seed(run_seed, {kScenes, generation});
}

SearchResult run_search(const SearchConfig& config, std::shared_ptr<const SegmentScheme> scheme,
                        const SceneSource& source, const DetectorClient& client,
                        const GenerationCallback& on_generation, std::optional<Checkpoint> resume) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  auto elapsed_ms = [&](Clock::time_point t0) -> std::int64_t {
    if (!config.record_wall_time) return 0;
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  };

  PopulationState state;
  std::vector<GenerationStats> history;
  if (resume) {
    state = std::move(resume->state);
    history = std::move(resume->history);
    if (!state.evaluated()) throw ConfigError("checkpoint population is not evaluated");
    if (state.patterns.size() != config.population)
      throw ConfigError("checkpoint population size differs from config N");
  } else {
    const auto t0 = Clock::now();
    state = initial_population(config, scheme);
    const auto scenes = source.batch(config.batch, scene_batch_seed(config.seed, 0));
    state = evaluate_population(std::move(state), scenes, client, config.max_in_flight);
    GenerationStats s = summarize(state);
    s.wall_ms = elapsed_ms(t0);
    history.push_back(s);
    if (on_generation) on_generation(state, history);
  }

  while (state.generation < config.generations) {
    const auto t0 = Clock::now();
    const auto scenes = source.batch(config.batch, scene_batch_seed(config.seed, state.generation + 1));
    state = evolve_generation(state, config, scenes, client);
    GenerationStats s = summarize(state);
    s.wall_ms = elapsed_ms(t0);
    history.push_back(s);
    if (on_generation) on_generation(state, history);
  }

  return SearchResult{*state.best, state.best_fitness, std::move(history), std::move(state)};
}

namespace {

json stats_to_json(const GenerationStats& s) {
  return {{"generation", s.generation}, {"c_min", s.c_min}, {"c_mean", s.c_mean},
          {"c_max", s.c_max}, {"wall_ms", s.wall_ms}};
}

}  // namespace

std::string Checkpoint::to_json() const {
  json pats = json::array();
  for (const auto& p : state.patterns) pats.push_back(p.to_string());
  json hist = json::array();
  for (const auto& s : history) hist.push_back(stats_to_json(s));
  json j{{"generation", state.generation},
         {"scheme", state.patterns.empty() ? std::string() : state.patterns.front().scheme().id()},
         {"patterns", pats},
         {"fitness", state.fitness},
         {"best", state.best ? json(state.best->to_string()) : json(nullptr)},
         {"best_fitness", state.best_fitness},
         {"history", hist}};
  return j.dump();
}

Checkpoint Checkpoint::from_json(const std::string& text, std::shared_ptr<const SegmentScheme> scheme) {
  auto parse_bits = [&](const std::string& s) {
    std::vector<std::uint8_t> bits;
    for (char ch : s) {
      if (ch != '0' && ch != '1') throw ParseError("checkpoint pattern has a non-binary character");
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    return BinaryPattern(std::move(bits), scheme);
  };
  try {
    const json j = json::parse(text);
    if (j.at("scheme").get<std::string>() != scheme->id())
      throw ConfigError("checkpoint was written for scheme '" + j.at("scheme").get<std::string>() + "'");
    Checkpoint cp;
    cp.state.generation = j.at("generation").get<std::size_t>();
    for (const auto& p : j.at("patterns")) cp.state.patterns.push_back(parse_bits(p.get<std::string>()));
    cp.state.fitness = j.at("fitness").get<std::vector<double>>();
    if (!j.at("best").is_null()) cp.state.best = parse_bits(j.at("best").get<std::string>());
    cp.state.best_fitness = j.at("best_fitness").get<double>();
    for (const auto& h : j.at("history"))
      cp.history.push_back({h.at("generation").get<std::size_t>(), h.at("c_min").get<double>(),
                            h.at("c_mean").get<double>(), h.at("c_max").get<double>(),
                            h.at("wall_ms").get<std::int64_t>()});
    return cp;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid checkpoint: ") + e.what());
  }
}

std::string format_history_csv(std::span<const GenerationStats> history) {
  std::string out = "generation,c_min,c_mean,c_max,wall_ms\n";
  char line[160];
  for (const auto& s : history) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%lld\n", s.generation, s.c_min, s.c_mean,
                  s.c_max, static_cast<long long>(s.wall_ms));
    out += line;
  }
  return out;
}

}  // namespace nirattack
