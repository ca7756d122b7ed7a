#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "nirattack/camera.hpp"
#include "nirattack/image.hpp"
#include "nirattack/mesh.hpp"

namespace nirattack {

/// Per-pixel segment labels of a rendered mesh. Pixels not covered by any
/// face hold kBackground.
class SegMap {
 public:
  static constexpr std::uint8_t kBackground = 255;

  SegMap() = default;
  /// Computes the silhouette box from `labels`.
  SegMap(int width, int height, std::vector<std::uint8_t> labels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t at(int x, int y) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const std::uint8_t> labels() const noexcept { return labels_; }

  /// Tight box around all non-background pixels; nullopt when there are none.
  const std::optional<PixelBox>& silhouette_box() const noexcept { return box_; }
  std::size_t covered_pixels() const noexcept { return covered_; }

  /// Throws unless every non-background label is < k.
  void validate(int k) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> labels_;
  std::optional<PixelBox> box_;
  std::size_t covered_ = 0;
};

/// Near clipping plane distance (meters).
inline constexpr double kNearPlane = 1e-2;

/// Perspective z-buffer rasterization of `mesh` seen from `camera`. A pixel
/// is covered when its centre lies inside a projected triangle (top-left
/// rule on shared edges); the nearest face wins, first-drawn on exact ties.
/// Geometry in front of the near plane is clipped.
SegMap render_segmap(const LabeledMesh& mesh, const CameraPose& camera);

/// Writes `<stem>.png` (label ids, background 255) and `<stem>.json`
/// (silhouette box and generating pose).
void save_segmap(const std::filesystem::path& png_path, const SegMap& segmap,
                 const CameraPose& camera);

struct StoredSegMap {
  SegMap segmap;
  CameraPose camera;
};

StoredSegMap load_segmap(const std::filesystem::path& png_path);

}  // namespace nirattack
