#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nirattack {

/// Half-open pixel rectangle [x_min, x_max) x [y_min, y_max).
struct PixelBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min; }
  int height() const noexcept { return y_max - y_min; }
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Single-channel 8-bit near-infrared image, row-major.
class NirImage {
 public:
  enum class Provenance { kBackground, kComposited };

  NirImage() = default;
  NirImage(int width, int height, std::uint8_t fill = 0,
           Provenance provenance = Provenance::kBackground);
  NirImage(int width, int height, std::vector<std::uint8_t> pixels,
           Provenance provenance = Provenance::kBackground);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Provenance provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) noexcept { provenance_ = p; }

  std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  /// Nearest-neighbour resample; keeps the set of intensity values.
  NirImage resized_nearest(int width, int height) const;

  /// Content equality (provenance ignored).
  bool same_pixels(const NirImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && pixels_ == other.pixels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
  Provenance provenance_ = Provenance::kBackground;
};

}  // namespace nirattack
