#include "nirattack/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nirattack/error.hpp"

namespace nirattack {

namespace {

void validate(const std::vector<Eigen::Vector3d>& vertices, const std::vector<Face>& faces,
              const std::vector<SegmentId>& labels, const SegmentScheme& scheme) {
  if (labels.size() != vertices.size())
    throw ParseError("mesh has " + std::to_string(vertices.size()) + " vertices but " +
                     std::to_string(labels.size()) + " labels");
  if (faces.empty()) throw ParseError("mesh has no faces");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= scheme.k())
      throw ParseError("vertex " + std::to_string(i) + ": label " + std::to_string(labels[i]) +
                       " out of range [0," + std::to_string(scheme.k()) + ")");
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    for (auto idx : face)
      if (idx >= vertices.size())
        throw ParseError("face " + std::to_string(f) + ": dangling vertex index " +
                         std::to_string(idx));
    if (face[0] == face[1] && face[1] == face[2])
      throw ParseError("face " + std::to_string(f) + ": degenerate (repeated vertex index)");
  }
}

// Whitespace tokenizer.
std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& value) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  return ec == std::errc() && p == tok.data() + tok.size();
}

}  // namespace

SegmentId majority_label(SegmentId a, SegmentId b, SegmentId c) noexcept {
  if (a == b || a == c) return a;
  if (b == c) return b;
  return std::min({a, b, c});
}

LabeledMesh::LabeledMesh(std::vector<Eigen::Vector3d> vertices, std::vector<Face> faces,
                         std::vector<SegmentId> vertex_labels, const SegmentScheme& scheme)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), labels_(std::move(vertex_labels)) {
  validate(vertices_, faces_, labels_, scheme);
}

SegmentId LabeledMesh::face_label(std::size_t face_index) const {
  if (face_index >= faces_.size())
    throw std::out_of_range("face index " + std::to_string(face_index) + " >= face count " +
                            std::to_string(faces_.size()));
  const Face& f = faces_[face_index];
  return majority_label(labels_[f[0]], labels_[f[1]], labels_[f[2]]);
}

LabeledMesh LabeledMesh::translated(const Eigen::Vector3d& offset,
                                    const SegmentScheme& scheme) const {
  std::vector<Eigen::Vector3d> moved = vertices_;
  for (auto& v : moved) v += offset;
  return LabeledMesh(std::move(moved), faces_, labels_, scheme);
}

LabeledMesh parse_mesh(std::istream& in, const SegmentScheme& scheme, const std::string& source) {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Face> faces;
  std::vector<SegmentId> labels;
  std::vector<std::size_t> face_lines, label_lines;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    const std::string_view tag = toks[0];
    if (tag == "v") {
      if (toks.size() != 4) throw ParseError(source, lineno, "vertex line needs 3 coordinates");
      Eigen::Vector3d p;
      for (int i = 0; i < 3; ++i)
        if (!parse_number(toks[i + 1], p[i]) || !std::isfinite(p[i]))
          throw ParseError(source, lineno, "bad coordinate '" + std::string(toks[i + 1]) + "'");
      vertices.push_back(p);
    } else if (tag == "l") {
      long k = 0;
      if (toks.size() != 2 || !parse_number(toks[1], k))
        throw ParseError(source, lineno, "label line needs one integer");
      if (k < 0 || k >= scheme.k())
        throw ParseError(source, lineno,
                         "label " + std::to_string(k) + " out of range [0," +
                             std::to_string(scheme.k()) + ")");
      labels.push_back(static_cast<SegmentId>(k));
      label_lines.push_back(lineno);
    } else if (tag == "f") {
      if (toks.size() != 4) throw ParseError(source, lineno, "face line needs 3 indices");
      Face f{};
      for (int i = 0; i < 3; ++i)
        if (!parse_number(toks[i + 1], f[i]))
          throw ParseError(source, lineno, "bad vertex index '" + std::string(toks[i + 1]) + "'");
      if (f[0] == f[1] && f[1] == f[2]) throw ParseError(source, lineno, "degenerate face");
      faces.push_back(f);
      face_lines.push_back(lineno);
    } else {
      throw ParseError(source, lineno, "unknown record '" + std::string(tag) + "'");
    }
  }

  for (std::size_t i = 0; i < faces.size(); ++i)
    for (auto idx : faces[i])
      if (idx >= vertices.size())
        throw ParseError(source, face_lines[i],
                         "dangling face index " + std::to_string(idx) + " (vertex count " +
                             std::to_string(vertices.size()) + ")");
  if (labels.size() != vertices.size()) {
    const std::size_t where = labels.size() > vertices.size() ? label_lines[vertices.size()] : lineno;
    throw ParseError(source, where,
                     std::to_string(vertices.size()) + " vertices but " +
                         std::to_string(labels.size()) + " labels");
  }
  if (faces.empty()) throw ParseError(source, lineno, "mesh has no faces");
  return LabeledMesh(std::move(vertices), std::move(faces), std::move(labels), scheme);
}

LabeledMesh load_mesh(const std::filesystem::path& path, const SegmentScheme& scheme) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file " + path.string());
  return parse_mesh(in, scheme, path.string());
}

void write_mesh(std::ostream& out, const LabeledMesh& mesh) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (auto l : mesh.vertex_labels()) out << "l " << l << '\n';
  for (const auto& f : mesh.faces()) out << "f " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_mesh(const std::filesystem::path& path, const LabeledMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_mesh(out, mesh);
}

std::vector<std::filesystem::path> list_mesh_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DatasetError("mesh directory not found: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".lmesh") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace nirattack
