#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nirattack/scheme.hpp"

namespace nirattack {

using Face = std::array<std::uint32_t, 3>;

/// Triangle mesh (meters) with one segment label per vertex. Immutable once
/// constructed; the constructor enforces every invariant against the scheme.
class LabeledMesh {
 public:
  LabeledMesh(std::vector<Eigen::Vector3d> vertices, std::vector<Face> faces,
              std::vector<SegmentId> vertex_labels, const SegmentScheme& scheme);

  const std::vector<Eigen::Vector3d>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<SegmentId>& vertex_labels() const noexcept { return labels_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  /// Label of face `face_index`: majority of its three vertex labels, ties
  /// broken by the smallest segment id. Throws std::out_of_range.
  SegmentId face_label(std::size_t face_index) const;

  /// Copy of this mesh with every vertex translated by `offset`.
  LabeledMesh translated(const Eigen::Vector3d& offset, const SegmentScheme& scheme) const;

 private:
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<Face> faces_;
  std::vector<SegmentId> labels_;
};

/// Majority-with-smallest-id-tie-break over three labels.
SegmentId majority_label(SegmentId a, SegmentId b, SegmentId c) noexcept;

/// Parses the line-oriented labeled-mesh format:
///
///     # comment
///     v x y z      vertex position (meters)
///     l k          segment label; the i-th `l` line labels the i-th vertex
///     f i j k      triangle, 0-based vertex indices
///
/// Errors carry the 1-based line number of the offending record.
LabeledMesh parse_mesh(std::istream& in, const SegmentScheme& scheme,
                       const std::string& source = "<mesh>");
LabeledMesh load_mesh(const std::filesystem::path& path, const SegmentScheme& scheme);

/// Canonical form: all `v` lines, then all `l` lines, then all `f` lines,
/// positions printed with round-trip precision.
void write_mesh(std::ostream& out, const LabeledMesh& mesh);
void save_mesh(const std::filesystem::path& path, const LabeledMesh& mesh);

/// Lists `*.lmesh` files in `dir`, sorted by filename.
std::vector<std::filesystem::path> list_mesh_files(const std::filesystem::path& dir);

}  // namespace nirattack
