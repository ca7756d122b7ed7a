#include "nirattack/pattern.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nirattack/error.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

using nlohmann::json;

BinaryPattern::BinaryPattern(std::vector<std::uint8_t> bits,
                             std::shared_ptr<const SegmentScheme> scheme)
    : bits_(std::move(bits)), scheme_(std::move(scheme)) {
  if (!scheme_) throw ConfigError("pattern without scheme");
  if (bits_.size() != static_cast<std::size_t>(scheme_->k()))
    throw ConfigError("pattern length " + std::to_string(bits_.size()) + " != K=" +
                      std::to_string(scheme_->k()) + " of scheme '" + scheme_->id() + "'");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) throw ConfigError("pattern bit " + std::to_string(i) + " is not 0/1");
    if (bits_[i] && scheme_->is_forced(i))
      throw ConfigError("pattern sets forced-black segment " + std::to_string(i));
  }
}

BinaryPattern BinaryPattern::constrained(std::vector<std::uint8_t> bits,
                                         std::shared_ptr<const SegmentScheme> scheme) {
  if (scheme)
    for (SegmentId s : scheme->forced_black())
      if (s < bits.size()) bits[s] = 0;
  return BinaryPattern(std::move(bits), std::move(scheme));
}

std::size_t BinaryPattern::ones() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::string BinaryPattern::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) s[i] = '1';
  return s;
}

std::string BinaryPattern::to_json() const {
  json j;
  j["scheme"] = scheme_->id();
  j["bits"] = std::vector<int>(bits_.begin(), bits_.end());
  return j.dump();
}

BinaryPattern BinaryPattern::from_json(const std::string& text,
                                       std::shared_ptr<const SegmentScheme> scheme) {
  json j;
  std::vector<int> raw;
  std::string id;
  try {
    j = json::parse(text);
    id = j.at("scheme").get<std::string>();
    raw = j.at("bits").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid pattern JSON: ") + e.what());
  }
  if (id != scheme->id())
    throw ConfigError("pattern belongs to scheme '" + id + "', expected '" + scheme->id() + "'");
  std::vector<std::uint8_t> bits;
  for (int b : raw) {
    if (b != 0 && b != 1) throw ParseError("pattern bits must be 0 or 1");
    bits.push_back(static_cast<std::uint8_t>(b));
  }
  return BinaryPattern(std::move(bits), std::move(scheme));
}

BinaryPattern new_random(std::uint64_t seed, std::shared_ptr<const SegmentScheme> scheme) {
  Rng rng(seed);
  std::vector<std::uint8_t> bits(scheme->k(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const std::uint8_t draw = static_cast<std::uint8_t>(rng() >> 63);
    if (!scheme->is_forced(i)) bits[i] = draw;
  }
  return BinaryPattern(std::move(bits), std::move(scheme));
}

std::pair<BinaryPattern, BinaryPattern> crossover(const BinaryPattern& a, const BinaryPattern& b,
                                                  std::size_t index) {
  if (a.scheme().id() != b.scheme().id())
    throw ConfigError("crossover between schemes '" + a.scheme().id() + "' and '" +
                      b.scheme().id() + "'");
  const std::size_t k = a.size();
  if (index == 0 || index >= k)
    throw ConfigError("crossover index " + std::to_string(index) + " outside (0, " +
                      std::to_string(k) + ")");
  std::vector<std::uint8_t> c1(a.bits().begin(), a.bits().begin() + index);
  c1.insert(c1.end(), b.bits().begin() + index, b.bits().end());
  std::vector<std::uint8_t> c2(b.bits().begin(), b.bits().begin() + index);
  c2.insert(c2.end(), a.bits().begin() + index, a.bits().end());
  return {BinaryPattern::constrained(std::move(c1), a.scheme_ptr()),
          BinaryPattern::constrained(std::move(c2), a.scheme_ptr())};
}

BinaryPattern mutate(const BinaryPattern& p, std::uint64_t seed) {
  const auto free = p.scheme().free_segments();
  if (free.empty()) throw ConfigError("mutate: scheme '" + p.scheme().id() + "' has no free segment");
  Rng rng(seed);
  return flip(p, free[uniform_index(rng, free.size())]);
}

BinaryPattern flip(const BinaryPattern& p, std::size_t index) {
  if (index >= p.size()) throw ConfigError("flip index out of range");
  if (p.scheme().is_forced(index))
    throw ConfigError("flip: segment " + std::to_string(index) + " is forced black");
  std::vector<std::uint8_t> bits = p.bits();
  bits[index] ^= 1;
  return BinaryPattern(std::move(bits), p.scheme_ptr());
}

BinaryPattern load_pattern(const std::filesystem::path& path,
                           std::shared_ptr<const SegmentScheme> scheme) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pattern file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return BinaryPattern::from_json(ss.str(), std::move(scheme));
}

void save_pattern(const std::filesystem::path& path, const BinaryPattern& pattern) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << pattern.to_json() << '\n';
}

}  // namespace nirattack
