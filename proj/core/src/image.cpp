#include "nirattack/image.hpp"

#include "nirattack/error.hpp"

namespace nirattack {

NirImage::NirImage(int width, int height, std::uint8_t fill, Provenance provenance)
    : width_(width), height_(height), provenance_(provenance) {
  if (width <= 0 || height <= 0) throw Error("image dimensions must be positive");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

NirImage::NirImage(int width, int height, std::vector<std::uint8_t> pixels, Provenance provenance)
    : width_(width), height_(height), pixels_(std::move(pixels)), provenance_(provenance) {
  if (width <= 0 || height <= 0) throw Error("image dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height)
    throw Error("pixel buffer size does not match image dimensions");
}

NirImage NirImage::resized_nearest(int width, int height) const {
  if (width == width_ && height == height_) return *this;
  NirImage out(width, height, 0, provenance_);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(height_ - 1, static_cast<int>((y + 0.5) * height_ / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(width_ - 1, static_cast<int>((x + 0.5) * width_ / width));
      out.at(x, y) = at(sx, sy);
    }
  }
  return out;
}

}  // namespace nirattack
