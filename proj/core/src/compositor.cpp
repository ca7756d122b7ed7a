#include "nirattack/compositor.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nirattack/error.hpp"
#include "nirattack/png_io.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

namespace {

void check_dims(const SegMap& segmap, const NirImage& background) {
  if (segmap.width() != background.width() || segmap.height() != background.height())
    throw DatasetError("segmap " + std::to_string(segmap.width()) + "x" +
                       std::to_string(segmap.height()) + " does not match background " +
                       std::to_string(background.width()) + "x" +
                       std::to_string(background.height()));
}

}  // namespace

NirImage synthesize_attack(const SegMap& segmap, const BinaryPattern& pattern,
                           const NirImage& background) {
  check_dims(segmap, background);
  const auto k = pattern.size();
  // Lookup table: label -> output value; background sentinel handled separately.
  std::array<std::uint8_t, 256> value{};
  for (std::size_t s = 0; s < k; ++s) value[s] = pattern.bits()[s] ? 255 : 0;

  NirImage out = background;
  out.set_provenance(NirImage::Provenance::kComposited);
  auto labels = segmap.labels();
  auto px = out.pixels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint8_t l = labels[i];
    if (l == SegMap::kBackground) continue;
    if (l >= k)
      throw DatasetError("segmap label " + std::to_string(l) + " >= K=" + std::to_string(k));
    px[i] = value[l];
  }
  return out;
}

NirImage synthesize_plain(const SegMap& segmap, std::uint8_t intensity,
                          const NirImage& background) {
  check_dims(segmap, background);
  NirImage out = background;
  out.set_provenance(NirImage::Provenance::kComposited);
  auto labels = segmap.labels();
  auto px = out.pixels();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != SegMap::kBackground) px[i] = intensity;
  return out;
}

BackgroundPool BackgroundPool::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw DatasetError("background directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<NirImage> images;
  images.reserve(files.size());
  for (const auto& f : files) images.push_back(load_png_image(f));
  return BackgroundPool(std::move(images));
}

std::size_t sample_background_index(std::uint64_t seed, const BackgroundPool& pool) {
  if (pool.empty()) throw DatasetError("background pool is empty");
  Rng rng(derive_seed(seed, {0xb6}));
  return uniform_index(rng, pool.size());
}

NirImage sample_background(std::uint64_t seed, const BackgroundPool& pool, int width, int height) {
  return pool[sample_background_index(seed, pool)].resized_nearest(width, height);
}

NirImage augment(const NirImage& image, const Augmentation& aug, std::uint64_t seed) {
  if (!aug.enabled()) return image;
  const int w = image.width(), h = image.height();
  std::vector<double> buf(image.pixels().begin(), image.pixels().end());

  if (aug.blur_sigma > 0.0) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * aug.blur_sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i)
      sum += kernel[i + radius] = std::exp(-0.5 * i * i / (aug.blur_sigma * aug.blur_sigma));
    for (double& v : kernel) v /= sum;
    std::vector<double> tmp(buf.size());
    // Separable pass, clamped borders.
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[i + radius] * buf[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
        tmp[static_cast<std::size_t>(y) * w + x] = acc;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[i + radius] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
        buf[static_cast<std::size_t>(y) * w + x] = acc;
      }
  }

  Rng rng(seed);
  NirImage out = image;
  auto px = out.pixels();
  for (std::size_t i = 0; i < buf.size(); ++i) {
    double v = buf[i];
    if (aug.jitter > 0.0) v += uniform_real(rng, -aug.jitter, aug.jitter);
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

NirImage make_synthetic_background(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  const double base = uniform_real(rng, 30.0, 140.0);
  const double gx = uniform_real(rng, -60.0, 60.0), gy = uniform_real(rng, -60.0, 60.0);
  const double fx = uniform_real(rng, 1.0, 6.0), fy = uniform_real(rng, 1.0, 6.0);
  const double phase = uniform_real(rng, 0.0, 6.283185307179586);
  const double amp = uniform_real(rng, 5.0, 30.0);
  NirImage img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / width, v = static_cast<double>(y) / height;
      double val = base + gx * (u - 0.5) + gy * (v - 0.5) +
                   amp * std::sin(6.283185307179586 * (fx * u + fy * v) + phase) +
                   uniform_real(rng, -8.0, 8.0);
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
    }
  return img;
}

}  // namespace nirattack
