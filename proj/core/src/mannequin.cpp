#include "nirattack/mannequin.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "nirattack/error.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

namespace {

const char* const kPartNames[mannequin::kSegments] = {
    "head",
    "neck",
    "chest_front_left",
    "chest_front_right",
    "chest_back_left",
    "chest_back_right",
    "abdomen_front_left",
    "abdomen_front_right",
    "abdomen_back_left",
    "abdomen_back_right",
    "hip_left",
    "hip_right",
    "upper_arm_left",
    "upper_arm_right",
    "forearm_left",
    "forearm_right",
    "hand_left",
    "hand_right",
    "thigh_front_left",
    "thigh_front_right",
    "thigh_back_left",
    "thigh_back_right",
    "shin_front_left",
    "shin_front_right",
    "shin_back_left",
    "shin_back_right",
    "foot_left",
    "foot_right",
    "shoulder_left",
    "shoulder_right",
    "collar",
};

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Builder {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<SegmentId> labels;

  // Box [lo, hi] in a local frame, placed by `origin + frame * p`.
  void box(SegmentId label, const Vec3& lo, const Vec3& hi, const Mat3& frame = Mat3::Identity(),
           const Vec3& origin = Vec3::Zero()) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    for (int i = 0; i < 8; ++i) {
      Vec3 p((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
      vertices.push_back(origin + frame * p);
      labels.push_back(label);
    }
    static constexpr std::uint32_t kQuads[6][4] = {
        {0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
    for (const auto& q : kQuads) {
      faces.push_back({base + q[0], base + q[1], base + q[2]});
      faces.push_back({base + q[0], base + q[2], base + q[3]});
    }
  }
};

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }
double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

SegmentScheme mannequin_scheme(bool five_black) {
  std::vector<std::string> names(std::begin(kPartNames), std::end(kPartNames));
  std::set<SegmentId> forced{mannequin::kHead};
  if (five_black)
    forced.insert({mannequin::kHandLeft, mannequin::kHandRight, mannequin::kFootLeft,
                   mannequin::kFootRight});
  return SegmentScheme(five_black ? "mannequin31-5black" : "mannequin31-1black",
                       mannequin::kSegments, std::move(names), std::move(forced), mannequin::kHead);
}

LabeledMesh make_mannequin(std::uint64_t seed, const SegmentScheme& scheme) {
  if (scheme.k() < mannequin::kSegments)
    throw ConfigError("mannequin needs a scheme with K >= 31, got " + std::to_string(scheme.k()));
  Rng rng(seed);
  auto U = [&](double lo, double hi) { return uniform_real(rng, lo, hi); };

  Builder b;
  // Torso.
  b.box(0, {-0.10, 0.64, -0.11}, {0.10, 0.88, 0.11});
  b.box(1, {-0.05, 0.56, -0.05}, {0.05, 0.64, 0.05});
  b.box(30, {-0.12, 0.53, -0.09}, {0.12, 0.56, 0.09});
  b.box(2, {0.0, 0.25, 0.0}, {0.18, 0.53, 0.11});
  b.box(3, {-0.18, 0.25, 0.0}, {0.0, 0.53, 0.11});
  b.box(4, {0.0, 0.25, -0.11}, {0.18, 0.53, 0.0});
  b.box(5, {-0.18, 0.25, -0.11}, {0.0, 0.53, 0.0});
  b.box(6, {0.0, 0.02, 0.0}, {0.16, 0.25, 0.10});
  b.box(7, {-0.16, 0.02, 0.0}, {0.0, 0.25, 0.10});
  b.box(8, {0.0, 0.02, -0.10}, {0.16, 0.25, 0.0});
  b.box(9, {-0.16, 0.02, -0.10}, {0.0, 0.25, 0.0});
  b.box(10, {0.0, -0.12, -0.11}, {0.17, 0.02, 0.11});
  b.box(11, {-0.17, -0.12, -0.11}, {0.0, 0.02, 0.11});
  b.box(28, {0.18, 0.44, -0.08}, {0.25, 0.53, 0.08});
  b.box(29, {-0.25, 0.44, -0.08}, {-0.18, 0.53, 0.08});

  // Arms: side = +1 (left, +x) or -1 (right).
  for (int side : {+1, -1}) {
    const bool left = side > 0;
    const Vec3 shoulder(side * 0.24, 0.50, 0.0);
    const Mat3 upper = rot_z(side * deg(U(5, 40))) * rot_x(deg(U(-30, 30)));
    const Mat3 lower = upper * rot_x(-deg(U(0, 60)));
    b.box(left ? 12 : 13, {-0.05, -0.30, -0.05}, {0.05, 0.0, 0.05}, upper, shoulder);
    const Vec3 elbow = shoulder + upper * Vec3(0, -0.30, 0);
    b.box(left ? 14 : 15, {-0.04, -0.26, -0.04}, {0.04, 0.0, 0.04}, lower, elbow);
    const Vec3 wrist = elbow + lower * Vec3(0, -0.26, 0);
    b.box(left ? 16 : 17, {-0.045, -0.09, -0.025}, {0.045, 0.0, 0.025}, lower, wrist);
  }

  // Legs.
  for (int side : {+1, -1}) {
    const bool left = side > 0;
    const Vec3 hip(side * 0.09, -0.12, 0.0);
    const Mat3 thigh = rot_x(deg(U(-25, 25)));
    const Mat3 shin = thigh * rot_x(deg(U(0, 40)));
    b.box(left ? 18 : 19, {-0.075, -0.42, 0.0}, {0.075, 0.0, 0.08}, thigh, hip);
    b.box(left ? 20 : 21, {-0.075, -0.42, -0.08}, {0.075, 0.0, 0.0}, thigh, hip);
    const Vec3 knee = hip + thigh * Vec3(0, -0.42, 0);
    b.box(left ? 22 : 23, {-0.055, -0.40, 0.0}, {0.055, 0.0, 0.06}, shin, knee);
    b.box(left ? 24 : 25, {-0.055, -0.40, -0.06}, {0.055, 0.0, 0.0}, shin, knee);
    const Vec3 ankle = knee + shin * Vec3(0, -0.40, 0);
    b.box(left ? 26 : 27, {-0.05, -0.07, -0.05}, {0.05, 0.0, 0.18}, Mat3::Identity(), ankle);
  }

  const double scale = U(0.85, 1.0);
  for (auto& v : b.vertices) v *= scale;
  return LabeledMesh(std::move(b.vertices), std::move(b.faces), std::move(b.labels), scheme);
}

}  // namespace nirattack
