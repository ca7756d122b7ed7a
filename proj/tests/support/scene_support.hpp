#pragma once

#include <memory>
#include <vector>

#include "nirattack/ga.hpp"
#include "nirattack/rng.hpp"

namespace nirattack::testing {

/// Segment map where segment s owns column block s; every segment is
/// visible and no pixel is background.
inline std::shared_ptr<const SegMap> strip_segmap(int k, int block = 2, int height = 2) {
  std::vector<std::uint8_t> labels;
  for (int y = 0; y < height; ++y)
    for (int s = 0; s < k; ++s) labels.insert(labels.end(), block, static_cast<std::uint8_t>(s));
  return std::make_shared<const SegMap>(k * block, height, std::move(labels));
}

/// Scenes that share one segment map over seeded random backgrounds.
class FixedMapSource final : public SceneSource {
 public:
  explicit FixedMapSource(std::shared_ptr<const SegMap> map) : map_(std::move(map)) {}
  std::vector<Scene> batch(std::size_t count, std::uint64_t seed) const override {
    std::vector<Scene> out;
    for (std::size_t i = 0; i < count; ++i) {
      Rng rng(derive_seed(seed, {i}));
      NirImage bg(map_->width(), map_->height());
      for (auto& p : bg.pixels()) p = static_cast<std::uint8_t>(rng() & 0xff);
      out.push_back({map_, std::move(bg)});
    }
    return out;
  }

 private:
  std::shared_ptr<const SegMap> map_;
};

}  // namespace nirattack::testing
