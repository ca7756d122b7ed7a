#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace nirattack {

/// Pinhole camera. `rotation` maps world to camera coordinates (x right,
/// y down, z forward); a world point X lands at rotation * X + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double focal = 500.0;
  Eigen::Vector2d principal_point{208.0, 208.0};
  int height = 416;
  int width = 416;

  /// Throws ConfigError unless rotation is orthonormal within 1e-6 and the
  /// focal length and image size are positive.
  void validate() const;

  /// Camera centre in world coordinates.
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  std::string to_json() const;
  static CameraPose from_json(const std::string& text);
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Distribution of camera poses around the mesh origin. Azimuth is uniform
/// over [lo, hi) degrees, elevation and distance uniform over their ranges.
struct PoseBounds {
  Range azimuth_deg{0.0, 360.0};
  Range elevation_deg{-10.0, 20.0};
  Range distance_m{3.0, 5.0};
  int width = 416;
  int height = 416;
  double focal = 500.0;

  void validate() const;
};

/// Camera at distance `distance` from the origin looking at it, y up.
CameraPose look_at_origin(double azimuth_deg, double elevation_deg, double distance,
                          int width, int height, double focal);

/// Deterministic per seed.
CameraPose sample_camera(std::uint64_t seed, const PoseBounds& bounds);

}  // namespace nirattack
