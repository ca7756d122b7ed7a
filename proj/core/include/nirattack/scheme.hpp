#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nirattack {

using SegmentId = std::uint16_t;

/// Partition of a human mesh into K controllable parts. Each part is driven
/// by one pattern bit; `forced_black` parts are frozen to 0.
///
/// Scheme file (JSON):
///
///     {"id": "mannequin31-1black", "K": 31,
///      "names": ["head", ...], "forced_black": [0], "head": 0}
///
/// `head` is optional and is only consulted by the all-white baseline.
class SegmentScheme {
 public:
  /// Largest K representable in a SegMap (255 is the background sentinel).
  static constexpr int kMaxSegments = 255;

  SegmentScheme(std::string id, int k, std::vector<std::string> names,
                std::set<SegmentId> forced_black,
                std::optional<SegmentId> head = std::nullopt);

  /// Scheme with generated names "seg0".."seg<K-1>".
  static SegmentScheme uniform(std::string id, int k, std::set<SegmentId> forced_black = {},
                               std::optional<SegmentId> head = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  int k() const noexcept { return k_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::set<SegmentId>& forced_black() const noexcept { return forced_black_; }
  std::optional<SegmentId> head() const noexcept { return head_; }

  bool is_forced(std::size_t segment) const {
    return forced_black_.count(static_cast<SegmentId>(segment)) != 0;
  }
  /// Segment ids that are not forced black, ascending.
  std::vector<SegmentId> free_segments() const;

  std::string to_json() const;
  static SegmentScheme from_json(const std::string& text, const std::string& source = "<scheme>");

  friend bool operator==(const SegmentScheme&, const SegmentScheme&) = default;

 private:
  std::string id_;
  int k_;
  std::vector<std::string> names_;
  std::set<SegmentId> forced_black_;
  std::optional<SegmentId> head_;
};

SegmentScheme load_scheme(const std::filesystem::path& path);
void save_scheme(const std::filesystem::path& path, const SegmentScheme& scheme);

}  // namespace nirattack
