#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nirattack/scheme.hpp"

namespace nirattack {

/// K-bit chromosome. Bit s drives segment s: 1 renders as 255, 0 as 0.
/// Every constructed pattern has length K and zeros at the scheme's
/// forced-black segments.
class BinaryPattern {
 public:
  /// Throws ConfigError when `bits` violates the scheme.
  BinaryPattern(std::vector<std::uint8_t> bits, std::shared_ptr<const SegmentScheme> scheme);

  /// Like the constructor, but forced-black bits are zeroed instead of rejected.
  static BinaryPattern constrained(std::vector<std::uint8_t> bits,
                                   std::shared_ptr<const SegmentScheme> scheme);

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return bits_.size(); }
  bool bit(std::size_t i) const { return bits_.at(i) != 0; }
  const SegmentScheme& scheme() const noexcept { return *scheme_; }
  const std::shared_ptr<const SegmentScheme>& scheme_ptr() const noexcept { return scheme_; }

  std::size_t ones() const noexcept;
  /// "0110..." for logs and map keys.
  std::string to_string() const;

  /// `{"scheme": "<id>", "bits": [0,1,...]}`
  std::string to_json() const;
  /// Throws ParseError on malformed text, ConfigError on scheme mismatch.
  static BinaryPattern from_json(const std::string& text,
                                 std::shared_ptr<const SegmentScheme> scheme);

  friend bool operator==(const BinaryPattern& a, const BinaryPattern& b) {
    return a.bits_ == b.bits_ && a.scheme_->id() == b.scheme_->id();
  }

 private:
  std::vector<std::uint8_t> bits_;
  std::shared_ptr<const SegmentScheme> scheme_;
};

/// Free bits i.i.d. uniform over {0,1}; forced bits 0.
BinaryPattern new_random(std::uint64_t seed, std::shared_ptr<const SegmentScheme> scheme);

/// Single-point crossover at `index` in (0, K): the first child takes a's
/// prefix and b's suffix, the second the reverse.
std::pair<BinaryPattern, BinaryPattern> crossover(const BinaryPattern& a, const BinaryPattern& b,
                                                  std::size_t index);

/// Flips exactly one free bit chosen uniformly. Throws ConfigError when the
/// scheme has no free segment.
BinaryPattern mutate(const BinaryPattern& p, std::uint64_t seed);

/// Flips bit `index`, which must be free.
BinaryPattern flip(const BinaryPattern& p, std::size_t index);

BinaryPattern load_pattern(const std::filesystem::path& path,
                           std::shared_ptr<const SegmentScheme> scheme);
void save_pattern(const std::filesystem::path& path, const BinaryPattern& pattern);

}  // namespace nirattack
