#include "nirattack/camera.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "json.hpp"
#include "nirattack/error.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

using nlohmann::json;

void CameraPose::validate() const {
  const double err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-6)) throw ConfigError("camera rotation is not orthonormal (error " + std::to_string(err) + ")");
  if (!(focal > 0)) throw ConfigError("camera focal length must be > 0");
  if (width <= 0 || height <= 0) throw ConfigError("camera image size must be positive");
}

std::string CameraPose::to_json() const {
  json j;
  j["rotation"] = {{rotation(0, 0), rotation(0, 1), rotation(0, 2)},
                   {rotation(1, 0), rotation(1, 1), rotation(1, 2)},
                   {rotation(2, 0), rotation(2, 1), rotation(2, 2)}};
  j["translation"] = {translation.x(), translation.y(), translation.z()};
  j["focal"] = focal;
  j["principal_point"] = {principal_point.x(), principal_point.y()};
  j["image_size"] = {height, width};
  return j.dump();
}

CameraPose CameraPose::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    CameraPose pose;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) pose.rotation(r, c) = j.at("rotation").at(r).at(c).get<double>();
    for (int i = 0; i < 3; ++i) pose.translation[i] = j.at("translation").at(i).get<double>();
    pose.focal = j.at("focal").get<double>();
    pose.principal_point = {j.at("principal_point").at(0).get<double>(),
                            j.at("principal_point").at(1).get<double>()};
    pose.height = j.at("image_size").at(0).get<int>();
    pose.width = j.at("image_size").at(1).get<int>();
    pose.validate();
    return pose;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid camera pose: ") + e.what());
  }
}

void PoseBounds::validate() const {
  auto check = [](const Range& r, const char* name) {
    if (!(r.lo < r.hi)) throw ConfigError(std::string("pose bounds: empty or inverted ") + name + " range");
  };
  check(azimuth_deg, "azimuth");
  check(elevation_deg, "elevation");
  check(distance_m, "distance");
  if (!(distance_m.lo > 0)) throw ConfigError("pose bounds: distance must be positive");
  if (elevation_deg.lo <= -90.0 || elevation_deg.hi >= 90.0)
    throw ConfigError("pose bounds: elevation must lie strictly within (-90, 90) degrees");
  if (width <= 0 || height <= 0) throw ConfigError("pose bounds: image size must be positive");
  if (!(focal > 0)) throw ConfigError("pose bounds: focal must be positive");
}

CameraPose look_at_origin(double azimuth_deg, double elevation_deg, double distance, int width,
                          int height, double focal) {
  const double az = azimuth_deg * std::numbers::pi / 180.0;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d eye(distance * std::cos(el) * std::sin(az), distance * std::sin(el),
                            distance * std::cos(el) * std::cos(az));
  const Eigen::Vector3d forward = (-eye).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitY()).normalized();
  const Eigen::Vector3d down = forward.cross(right);

  CameraPose pose;
  pose.rotation.row(0) = right.transpose();
  pose.rotation.row(1) = down.transpose();
  pose.rotation.row(2) = forward.transpose();
  pose.translation = -pose.rotation * eye;
  pose.focal = focal;
  pose.width = width;
  pose.height = height;
  pose.principal_point = {width / 2.0, height / 2.0};
  return pose;
}

CameraPose sample_camera(std::uint64_t seed, const PoseBounds& bounds) {
  bounds.validate();
  Rng rng(derive_seed(seed, {0xca3e7a}));
  const double az = uniform_real(rng, bounds.azimuth_deg.lo, bounds.azimuth_deg.hi);
  const double el = uniform_real(rng, bounds.elevation_deg.lo, bounds.elevation_deg.hi);
  const double dist = uniform_real(rng, bounds.distance_m.lo, bounds.distance_m.hi);
  return look_at_origin(az, el, dist, bounds.width, bounds.height, bounds.focal);
}

}  // namespace nirattack
