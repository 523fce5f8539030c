#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjbvem/geometry.hpp"

namespace hjbvem::mesh {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Cell {
  std::vector<int> vertices;  // CCW
  double area = 0.0;
  double diameter = 0.0;
  Vec2 centroid;
  // Edge index for local edge i = (vertices[i] -> vertices[i+1]); sign +1 when
  // the cell traverses the edge in its stored direction (the cell is the edge's
  // left cell), -1 otherwise.
  std::vector<int> edge_ids;
  std::vector<int> edge_signs;
};

struct Edge {
  int a = -1;  // stored direction a -> b, the traversal of the left cell
  int b = -1;
  int left_cell = -1;
  int right_cell = -1;  // -1 on the boundary
  double length = 0.0;
  Vec2 normal;   // unit, from left cell into right cell; outward on the boundary
  Vec2 tangent;  // unit, normal rotated by +90 degrees
  bool boundary() const { return right_cell < 0; }
};

enum class MeshKind { triangle, square, hexagon, distorted_quad };

MeshKind mesh_kind_from_string(const std::string& s);
std::string to_string(MeshKind kind);

class PolygonalMesh {
 public:
  // Builds derived data (edges, per-cell geometry, vertex length scales) and
  // validates: CCW positive-area cells, no dangling vertices, every edge
  // shared by at most two cells, Euler characteristic of a simply connected
  // planar subdivision, boundary forming closed loops.
  PolygonalMesh(std::vector<Vec2> vertices, std::vector<std::vector<int>> cells);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const Cell& cell(int c) const { return cells_[c]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Mean diameter of the cells sharing vertex v (the gauge for vertex
  // derivative degrees of freedom).
  double vertex_length_scale(int v) const { return h_vertex_[v]; }
  bool vertex_on_boundary(int v) const { return boundary_vertex_[v]; }
  // Indices of the boundary edges meeting vertex v (empty for interior).
  const std::vector<int>& boundary_edges_of_vertex(int v) const { return vertex_boundary_edges_[v]; }

  std::vector<Vec2> cell_polygon(int c) const;
  double max_diameter() const { return h_max_; }

 private:
  std::vector<Vec2> vertices_;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  std::vector<double> h_vertex_;
  std::vector<bool> boundary_vertex_;
  std::vector<std::vector<int>> vertex_boundary_edges_;
  double h_max_ = 0.0;
};

// Structured generators on an axis-aligned rectangle. `n` counts subdivisions
// of the horizontal side. The seed only affects distorted_quad, whose interior
// vertices are displaced by a deterministic pseudorandom vector of magnitude
// at most 0.2 times the undistorted cell side.
PolygonalMesh generate_structured(MeshKind kind, int n, const Rect& domain, std::uint64_t seed = 0);

// Text format: first line "NV NC", then NV lines "x y", then NC lines
// "m i_1 ... i_m" with 0-based CCW vertex indices. '#' starts a comment.
PolygonalMesh import_mesh(std::istream& in);
void export_mesh(const PolygonalMesh& mesh, std::ostream& out);

struct MeshQualityReport {
  double min_edge_to_cell_diameter = 0.0;   // min over cells and their edges of h_e / h_K
  double min_cell_to_mesh_diameter = 0.0;   // min over cells of h_K / h
  double min_star_radius_ratio = 0.0;       // min over cells of (kernel inradius) / h_K
  int num_nonconvex_cells = 0;
  bool all_star_shaped_wrt_centroid = true;
};

MeshQualityReport assess_quality(const PolygonalMesh& mesh);

}  // namespace hjbvem::mesh
