#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nirattack/image.hpp"
#include "nirattack/pattern.hpp"
#include "nirattack/render.hpp"

namespace nirattack {

/// Paints `pattern` onto the silhouette: a pixel of segment s becomes 255
/// when bit s is set and 0 otherwise; background pixels keep the value of
/// `background`. Throws on dimension mismatch or a label >= K.
NirImage synthesize_attack(const SegMap& segmap, const BinaryPattern& pattern,
                           const NirImage& background);

/// Unattacked person: every silhouette pixel set to `intensity`.
NirImage synthesize_plain(const SegMap& segmap, std::uint8_t intensity,
                          const NirImage& background);

/// Collection of NIR background frames.
class BackgroundPool {
 public:
  BackgroundPool() = default;
  explicit BackgroundPool(std::vector<NirImage> images) : images_(std::move(images)) {}

  /// Loads every *.png in `dir` (sorted by filename) as gray.
  static BackgroundPool load_directory(const std::filesystem::path& dir);

  std::size_t size() const noexcept { return images_.size(); }
  bool empty() const noexcept { return images_.empty(); }
  const NirImage& operator[](std::size_t i) const { return images_.at(i); }

 private:
  std::vector<NirImage> images_;
};

/// Index of the pool member drawn by `seed`; deterministic.
std::size_t sample_background_index(std::uint64_t seed, const BackgroundPool& pool);

/// Pool member drawn by `seed`, nearest-neighbour resized to width x height.
/// Throws DatasetError on an empty pool.
NirImage sample_background(std::uint64_t seed, const BackgroundPool& pool, int width, int height);

/// Optional post-composite perturbation. Defaults are the identity.
struct Augmentation {
  double blur_sigma = 0.0;   // Gaussian blur, pixels
  double jitter = 0.0;       // uniform intensity noise amplitude, gray levels

  bool enabled() const noexcept { return blur_sigma > 0.0 || jitter > 0.0; }
};

NirImage augment(const NirImage& image, const Augmentation& aug, std::uint64_t seed);

/// Seeded synthetic NIR-like frame (smooth low-frequency gradient plus
/// texture noise) for running the pipeline without a recorded background set.
NirImage make_synthetic_background(std::uint64_t seed, int width, int height);

}  // namespace nirattack
