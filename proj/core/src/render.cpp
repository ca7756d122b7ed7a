#include "nirattack/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nirattack/error.hpp"
#include "nirattack/png_io.hpp"

namespace nirattack {

using nlohmann::json;

SegMap::SegMap(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width <= 0 || height <= 0 || labels_.size() != static_cast<std::size_t>(width) * height)
    throw Error("segmap buffer does not match dimensions");
  PixelBox box{width, height, -1, -1};
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (at(x, y) != kBackground) {
        ++covered_;
        box.x_min = std::min(box.x_min, x);
        box.y_min = std::min(box.y_min, y);
        box.x_max = std::max(box.x_max, x + 1);
        box.y_max = std::max(box.y_max, y + 1);
      }
  if (covered_ > 0) box_ = box;
}

void SegMap::validate(int k) const {
  for (std::uint8_t l : labels_)
    if (l != kBackground && l >= k)
      throw DatasetError("segmap label " + std::to_string(l) + " >= K=" + std::to_string(k));
}

namespace {

// Sutherland-Hodgman against z >= near. Returns 0, 3 or 4 vertices.
int clip_near(const std::array<Eigen::Vector3d, 3>& in, std::array<Eigen::Vector3d, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d& a = in[i];
    const Eigen::Vector3d& b = in[(i + 1) % 3];
    const bool a_in = a.z() >= kNearPlane;
    const bool b_in = b.z() >= kNearPlane;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (kNearPlane - a.z()) / (b.z() - a.z());
      out[n++] = a + t * (b - a);
    }
  }
  return n;
}

struct ScreenVertex {
  double x, y, inv_z;
};

inline double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// With positive-area orientation in y-down screen space.
inline bool top_left(const ScreenVertex& a, const ScreenVertex& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  return dy < 0 || (dy == 0 && dx > 0);
}

void raster_triangle(ScreenVertex v0, ScreenVertex v1, ScreenVertex v2, std::uint8_t label,
                     int width, int height, std::vector<double>& depth,
                     std::vector<std::uint8_t>& labels) {
  double area = edge(v0, v1, v2.x, v2.y);
  if (area == 0.0 || !std::isfinite(area)) return;
  if (area < 0) {
    std::swap(v1, v2);
    area = -area;
  }
  const double min_x = std::min({v0.x, v1.x, v2.x}), max_x = std::max({v0.x, v1.x, v2.x});
  const double min_y = std::min({v0.y, v1.y, v2.y}), max_y = std::max({v0.y, v1.y, v2.y});
  const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
  const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
  const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y - 0.5)));
  if (x0 > x1 || y0 > y1) return;

  const bool tl0 = top_left(v1, v2), tl1 = top_left(v2, v0), tl2 = top_left(v0, v1);
  for (int y = y0; y <= y1; ++y) {
    const double py = y + 0.5;
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5;
      const double w0 = edge(v1, v2, px, py);
      const double w1 = edge(v2, v0, px, py);
      const double w2 = edge(v0, v1, px, py);
      if (w0 < 0 || w1 < 0 || w2 < 0) continue;
      if ((w0 == 0 && !tl0) || (w1 == 0 && !tl1) || (w2 == 0 && !tl2)) continue;
      const double inv_z = (w0 * v0.inv_z + w1 * v1.inv_z + w2 * v2.inv_z) / area;
      const std::size_t idx = static_cast<std::size_t>(y) * width + x;
      if (inv_z > depth[idx]) {
        depth[idx] = inv_z;
        labels[idx] = label;
      }
    }
  }
}

}  // namespace

SegMap render_segmap(const LabeledMesh& mesh, const CameraPose& camera) {
  camera.validate();
  const int width = camera.width, height = camera.height;
  std::vector<double> depth(static_cast<std::size_t>(width) * height, 0.0);  // 1/z, 0 = infinitely far
  std::vector<std::uint8_t> labels(depth.size(), SegMap::kBackground);

  std::vector<Eigen::Vector3d> cam(mesh.vertex_count());
  for (std::size_t i = 0; i < cam.size(); ++i)
    cam[i] = camera.rotation * mesh.vertices()[i] + camera.translation;

  auto project = [&](const Eigen::Vector3d& p) {
    const double inv_z = 1.0 / p.z();
    return ScreenVertex{camera.focal * p.x() * inv_z + camera.principal_point.x(),
                        camera.focal * p.y() * inv_z + camera.principal_point.y(), inv_z};
  };

  std::array<Eigen::Vector3d, 4> poly;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    const std::array<Eigen::Vector3d, 3> tri{cam[face[0]], cam[face[1]], cam[face[2]]};
    const int n = clip_near(tri, poly);
    if (n < 3) continue;
    const auto label = static_cast<std::uint8_t>(mesh.face_label(f));
    const ScreenVertex s0 = project(poly[0]);
    for (int i = 1; i + 1 < n; ++i)
      raster_triangle(s0, project(poly[i]), project(poly[i + 1]), label, width, height, depth, labels);
  }
  return SegMap(width, height, std::move(labels));
}

void save_segmap(const std::filesystem::path& png_path, const SegMap& segmap,
                 const CameraPose& camera) {
  write_file_bytes(png_path, encode_png(segmap.width(), segmap.height(), 1, segmap.labels()));
  json side;
  if (const auto& box = segmap.silhouette_box())
    side["silhouette_box"] = {box->x_min, box->y_min, box->x_max, box->y_max};
  else
    side["silhouette_box"] = nullptr;
  side["pose"] = json::parse(camera.to_json());
  std::filesystem::path sidecar = png_path;
  sidecar.replace_extension(".json");
  std::ofstream out(sidecar);
  if (!out) throw Error("cannot write " + sidecar.string());
  out << side.dump() << '\n';
}

StoredSegMap load_segmap(const std::filesystem::path& png_path) {
  DecodedPng png = decode_png(read_file_bytes(png_path));
  if (png.channels != 1) throw DatasetError(png_path.string() + ": segmap must be single-channel");
  SegMap segmap(png.width, png.height, std::move(png.gray));

  std::filesystem::path sidecar = png_path;
  sidecar.replace_extension(".json");
  std::ifstream in(sidecar);
  if (!in) throw DatasetError("missing segmap sidecar " + sidecar.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    const json side = json::parse(ss.str());
    CameraPose pose = CameraPose::from_json(side.at("pose").dump());
    const json& jb = side.at("silhouette_box");
    const auto& box = segmap.silhouette_box();
    if (jb.is_null() != !box.has_value() ||
        (box && PixelBox{jb.at(0), jb.at(1), jb.at(2), jb.at(3)} != *box))
      throw DatasetError(sidecar.string() + ": silhouette box does not match label image");
    return {std::move(segmap), pose};
  } catch (const json::exception& e) {
    throw DatasetError(sidecar.string() + ": " + e.what());
  }
}

}  // namespace nirattack
