#include "hjbvem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "hjbvem/basis.hpp"

namespace hjbvem::mesh {

MeshKind mesh_kind_from_string(const std::string& s) {
  if (s == "triangle") return MeshKind::triangle;
  if (s == "square") return MeshKind::square;
  if (s == "hexagon") return MeshKind::hexagon;
  if (s == "distorted_quad") return MeshKind::distorted_quad;
  throw MeshError("unknown mesh kind: " + s);
}

std::string to_string(MeshKind kind) {
  switch (kind) {
    case MeshKind::triangle: return "triangle";
    case MeshKind::square: return "square";
    case MeshKind::hexagon: return "hexagon";
    case MeshKind::distorted_quad: return "distorted_quad";
  }
  return "?";
}

PolygonalMesh::PolygonalMesh(std::vector<Vec2> vertices, std::vector<std::vector<int>> cell_vertices)
    : vertices_(std::move(vertices)) {
  const int nv = static_cast<int>(vertices_.size());
  const int nc = static_cast<int>(cell_vertices.size());
  if (nc == 0) throw MeshError("mesh has no cells");
  cells_.resize(nc);

  std::vector<bool> referenced(nv, false);
  for (int c = 0; c < nc; ++c) {
    Cell& cell = cells_[c];
    cell.vertices = std::move(cell_vertices[c]);
    const std::size_t m = cell.vertices.size();
    if (m < 3) throw MeshError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    for (std::size_t i = 0; i < m; ++i) {
      int v = cell.vertices[i];
      if (v < 0 || v >= nv)
        throw MeshError("cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                        " out of range");
      referenced[v] = true;
      for (std::size_t j = i + 1; j < m; ++j)
        if (cell.vertices[j] == v)
          throw MeshError("cell " + std::to_string(c) + " repeats vertex " + std::to_string(v));
    }
    std::vector<Vec2> poly(m);
    for (std::size_t i = 0; i < m; ++i) poly[i] = vertices_[cell.vertices[i]];
    double area = basis::polygon_area(poly);
    if (!(area > 0.0))
      throw MeshError("cell " + std::to_string(c) + " is not counterclockwise or is degenerate");
    cell.area = area;
    cell.centroid = basis::polygon_centroid(poly);
    cell.diameter = basis::polygon_diameter(poly);
    h_max_ = std::max(h_max_, cell.diameter);
  }
  for (int v = 0; v < nv; ++v)
    if (!referenced[v]) throw MeshError("vertex " + std::to_string(v) + " is not used by any cell");

  // Edge discovery. The first cell to traverse a vertex pair becomes the left
  // cell and fixes the stored direction; since cells are visited in index
  // order, the left cell always has the lower index.
  std::map<std::pair<int, int>, int> edge_of;
  for (int c = 0; c < nc; ++c) {
    Cell& cell = cells_[c];
    const std::size_t m = cell.vertices.size();
    cell.edge_ids.resize(m);
    cell.edge_signs.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      int a = cell.vertices[i];
      int b = cell.vertices[(i + 1) % m];
      auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Edge e;
        e.a = a;
        e.b = b;
        e.left_cell = c;
        Vec2 d = vertices_[b] - vertices_[a];
        e.length = d.norm();
        if (!(e.length > 0.0)) throw MeshError("zero-length edge in cell " + std::to_string(c));
        // Outward normal of the left cell: traversal direction rotated -90.
        e.normal = Vec2{d.y, -d.x} / e.length;
        e.tangent = e.normal.rot90();
        int id = static_cast<int>(edges_.size());
        edges_.push_back(e);
        edge_of.emplace(key, id);
        cell.edge_ids[i] = id;
        cell.edge_signs[i] = +1;
      } else {
        Edge& e = edges_[it->second];
        if (e.right_cell >= 0)
          throw MeshError("edge between vertices " + std::to_string(key.first) + " and " +
                          std::to_string(key.second) + " is shared by more than two cells");
        if (!(e.a == b && e.b == a))
          throw MeshError("inconsistent orientation on edge between vertices " +
                          std::to_string(key.first) + " and " + std::to_string(key.second));
        e.right_cell = c;
        cell.edge_ids[i] = it->second;
        cell.edge_signs[i] = -1;
      }
    }
  }

  const int ne = static_cast<int>(edges_.size());
  if (nv - ne + nc != 1)
    throw MeshError("mesh is not a simply connected planar subdivision (V - E + C = " +
                    std::to_string(nv - ne + nc) + ", expected 1)");

  boundary_vertex_.assign(nv, false);
  vertex_boundary_edges_.assign(nv, {});
  for (int e = 0; e < ne; ++e) {
    if (edges_[e].boundary()) {
      for (int v : {edges_[e].a, edges_[e].b}) {
        boundary_vertex_[v] = true;
        vertex_boundary_edges_[v].push_back(e);
      }
    }
  }
  for (int v = 0; v < nv; ++v)
    if (boundary_vertex_[v] && vertex_boundary_edges_[v].size() != 2)
      throw MeshError("boundary vertex " + std::to_string(v) + " has " +
                      std::to_string(vertex_boundary_edges_[v].size()) +
                      " boundary edges, expected 2");

  h_vertex_.assign(nv, 0.0);
  std::vector<int> adjacent(nv, 0);
  for (const Cell& cell : cells_) {
    for (int v : cell.vertices) {
      h_vertex_[v] += cell.diameter;
      adjacent[v] += 1;
    }
  }
  for (int v = 0; v < nv; ++v) h_vertex_[v] /= adjacent[v];
}

std::vector<Vec2> PolygonalMesh::cell_polygon(int c) const {
  const Cell& cell = cells_[c];
  std::vector<Vec2> poly(cell.vertices.size());
  for (std::size_t i = 0; i < poly.size(); ++i) poly[i] = vertices_[cell.vertices[i]];
  return poly;
}

namespace {

PolygonalMesh make_grid(int n, const Rect& dom, bool split_triangles) {
  if (n < 1) throw MeshError("generate_structured: need n >= 1");
  const double w = dom.width(), h = dom.height();
  if (!(w > 0.0) || !(h > 0.0)) throw MeshError("generate_structured: empty domain");
  int m = std::max(1, static_cast<int>(std::lround(n * h / w)));
  std::vector<Vec2> verts;
  verts.reserve((n + 1) * (m + 1));
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(dom.xmin + w * i / n, dom.ymin + h * j / m);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      if (split_triangles) {
        // Diagonal from the lower-left to the upper-right corner.
        cells.push_back({v00, v10, v11});
        cells.push_back({v00, v11, v01});
      } else {
        cells.push_back({v00, v10, v11, v01});
      }
    }
  }
  return PolygonalMesh(std::move(verts), std::move(cells));
}

PolygonalMesh make_distorted_quad(int n, const Rect& dom, std::uint64_t seed) {
  if (n < 1) throw MeshError("generate_structured: need n >= 1");
  const double w = dom.width(), h = dom.height();
  int m = std::max(1, static_cast<int>(std::lround(n * h / w)));
  const double side = std::min(w / n, h / m);
  std::mt19937_64 rng(seed);
  auto next_unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Vec2> verts;
  verts.reserve((n + 1) * (m + 1));
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= n; ++i) {
      Vec2 p{dom.xmin + w * i / n, dom.ymin + h * j / m};
      if (i > 0 && i < n && j > 0 && j < m) {
        double angle = 2.0 * M_PI * next_unit();
        double radius = 0.2 * side * next_unit();
        p += Vec2{radius * std::cos(angle), radius * std::sin(angle)};
      }
      verts.push_back(p);
    }
  }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i)
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  return PolygonalMesh(std::move(verts), std::move(cells));
}

struct LatticePoint {
  long long p;
  long long q;
  bool operator==(const LatticePoint&) const = default;
  auto operator<=>(const LatticePoint&) const = default;
};

// Clip an integer-lattice polygon against d(v) >= 0 where d is an affine
// integer functional. The honeycomb layout guarantees every intersection
// lands on a lattice point.
std::vector<LatticePoint> clip_lattice(const std::vector<LatticePoint>& poly,
                                       auto&& distance) {
  std::vector<LatticePoint> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LatticePoint& v1 = poly[i];
    const LatticePoint& v2 = poly[(i + 1) % n];
    long long d1 = distance(v1), d2 = distance(v2);
    auto intersect = [&]() {
      long long den = d1 - d2;
      LatticePoint r{v1.p + (v2.p - v1.p) * d1 / den, v1.q + (v2.q - v1.q) * d1 / den};
      if ((v2.p - v1.p) * d1 % den != 0 || (v2.q - v1.q) * d1 % den != 0)
        throw MeshError("hexagon generator: clip intersection off the lattice");
      return r;
    };
    if (d2 >= 0) {
      if (d1 < 0) out.push_back(intersect());
      out.push_back(v2);
    } else if (d1 >= 0) {
      out.push_back(intersect());
    }
  }
  // Remove consecutive duplicates created when an intersection coincides with
  // an emitted vertex.
  std::vector<LatticePoint> dedup;
  for (const LatticePoint& v : out)
    if (dedup.empty() || !(dedup.back() == v)) dedup.push_back(v);
  while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
  return dedup;
}

long long lattice_area2(const std::vector<LatticePoint>& poly) {
  long long s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const LatticePoint& a = poly[i];
    const LatticePoint& b = poly[(i + 1) % poly.size()];
    s += a.p * b.q - a.q * b.p;
  }
  return s;
}

// Honeycomb of pointy-top hexagons clipped to the rectangle. All vertices sit
// on the integer lattice (p * px/2, q * r/2), so shared vertices are matched
// exactly and every clip intersection is a lattice point.
PolygonalMesh make_hexagon(int n, const Rect& dom) {
  if (n < 1) throw MeshError("generate_structured: need n >= 1");
  const double w = dom.width(), h = dom.height();
  const double px = w / n;
  int rows = std::max(1, static_cast<int>(std::lround((2.0 * std::sqrt(3.0) * h / px - 1.0) / 3.0)));
  const long long P = 2LL * n;
  const long long Q = 3LL * rows + 1;
  const double r = 2.0 * h / static_cast<double>(Q);

  std::map<LatticePoint, int> vertex_id;
  std::vector<Vec2> verts;
  std::vector<std::vector<int>> cells;

  for (int j = -1; j <= rows; ++j) {
    long long qc = 2 + 3LL * j;
    bool odd = ((j % 2) + 2) % 2 == 1;
    int i_hi = odd ? n : n - 1;
    for (int i = 0; i <= i_hi; ++i) {
      long long pc = odd ? 2LL * i : 2LL * i + 1;
      std::vector<LatticePoint> hex = {{pc, qc - 2}, {pc + 1, qc - 1}, {pc + 1, qc + 1},
                                       {pc, qc + 2}, {pc - 1, qc + 1}, {pc - 1, qc - 1}};
      hex = clip_lattice(hex, [](const LatticePoint& v) { return v.p; });
      if (hex.size() >= 3) hex = clip_lattice(hex, [P](const LatticePoint& v) { return P - v.p; });
      if (hex.size() >= 3) hex = clip_lattice(hex, [](const LatticePoint& v) { return v.q; });
      if (hex.size() >= 3) hex = clip_lattice(hex, [Q](const LatticePoint& v) { return Q - v.q; });
      if (hex.size() < 3 || lattice_area2(hex) <= 0) continue;
      std::vector<int> cell;
      cell.reserve(hex.size());
      for (const LatticePoint& lp : hex) {
        auto it = vertex_id.find(lp);
        if (it == vertex_id.end()) {
          int id = static_cast<int>(verts.size());
          verts.emplace_back(dom.xmin + 0.5 * px * static_cast<double>(lp.p),
                             dom.ymin + 0.5 * r * static_cast<double>(lp.q));
          it = vertex_id.emplace(lp, id).first;
        }
        cell.push_back(it->second);
      }
      cells.push_back(std::move(cell));
    }
  }
  return PolygonalMesh(std::move(verts), std::move(cells));
}

}  // namespace

PolygonalMesh generate_structured(MeshKind kind, int n, const Rect& domain, std::uint64_t seed) {
  switch (kind) {
    case MeshKind::triangle: return make_grid(n, domain, true);
    case MeshKind::square: return make_grid(n, domain, false);
    case MeshKind::hexagon: return make_hexagon(n, domain);
    case MeshKind::distorted_quad: return make_distorted_quad(n, domain, seed);
  }
  throw MeshError("generate_structured: unknown kind");
}

namespace {

// Reads the next content line, stripping '#' comments and blank lines.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) {
        blank = false;
        break;
      }
    if (!blank) return true;
  }
  return false;
}

}  // namespace

PolygonalMesh import_mesh(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) throw MeshError("mesh import: empty input");
  std::istringstream head(line);
  long long nv = 0, nc = 0;
  if (!(head >> nv >> nc) || nv < 3 || nc < 1)
    throw MeshError("mesh import: malformed header at line " + std::to_string(lineno));
  std::vector<Vec2> verts;
  verts.reserve(nv);
  for (long long v = 0; v < nv; ++v) {
    if (!next_line(in, line, lineno))
      throw MeshError("mesh import: expected " + std::to_string(nv) + " vertices, got " +
                      std::to_string(v));
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y))
      throw MeshError("mesh import: malformed vertex at line " + std::to_string(lineno));
    verts.emplace_back(x, y);
  }
  std::vector<std::vector<int>> cells;
  cells.reserve(nc);
  for (long long c = 0; c < nc; ++c) {
    if (!next_line(in, line, lineno))
      throw MeshError("mesh import: expected " + std::to_string(nc) + " cells, got " +
                      std::to_string(c));
    std::istringstream ls(line);
    int m = 0;
    if (!(ls >> m) || m < 3)
      throw MeshError("mesh import: malformed cell size at line " + std::to_string(lineno));
    std::vector<int> cell(m);
    for (int i = 0; i < m; ++i) {
      if (!(ls >> cell[i]))
        throw MeshError("mesh import: cell at line " + std::to_string(lineno) + " lists fewer than " +
                        std::to_string(m) + " vertices");
      if (cell[i] < 0 || cell[i] >= nv)
        throw MeshError("mesh import: vertex index " + std::to_string(cell[i]) + " out of range at line " +
                        std::to_string(lineno));
    }
    int extra;
    if (ls >> extra)
      throw MeshError("mesh import: trailing entries on cell line " + std::to_string(lineno));
    cells.push_back(std::move(cell));
  }
  try {
    return PolygonalMesh(std::move(verts), std::move(cells));
  } catch (const MeshError& err) {
    throw MeshError(std::string("mesh import: ") + err.what());
  }
}

void export_mesh(const PolygonalMesh& mesh, std::ostream& out) {
  out << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (const Vec2& v : mesh.vertices()) out << v.x << ' ' << v.y << '\n';
  for (const Cell& c : mesh.cells()) {
    out << c.vertices.size();
    for (int v : c.vertices) out << ' ' << v;
    out << '\n';
  }
}

namespace {

// Largest disk radius such that every edge half-plane, shifted inward by the
// radius, still has a common point: the inradius of the cell kernel. Found by
// bisection with Sutherland-Hodgman feasibility clipping.
double kernel_inradius(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  struct HalfPlane {
    Vec2 normal;  // inward
    double offset;
  };
  std::vector<HalfPlane> planes(n);
  double diam = basis::polygon_diameter(poly);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 t = (poly[(i + 1) % n] - poly[i]).normalized();
    Vec2 inward = t.rot90();
    planes[i] = {inward, inward.dot(poly[i])};
  }
  auto feasible = [&](double radius) {
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& v : poly) {
      lo.x = std::min(lo.x, v.x);
      lo.y = std::min(lo.y, v.y);
      hi.x = std::max(hi.x, v.x);
      hi.y = std::max(hi.y, v.y);
    }
    std::vector<Vec2> region = {{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}};
    for (const HalfPlane& hp : planes) {
      std::vector<Vec2> next;
      const std::size_t m = region.size();
      for (std::size_t i = 0; i < m; ++i) {
        const Vec2& v1 = region[i];
        const Vec2& v2 = region[(i + 1) % m];
        double d1 = hp.normal.dot(v1) - hp.offset - radius;
        double d2 = hp.normal.dot(v2) - hp.offset - radius;
        if (d2 >= 0) {
          if (d1 < 0) next.push_back(v1 + (v2 - v1) * (d1 / (d1 - d2)));
          next.push_back(v2);
        } else if (d1 >= 0) {
          next.push_back(v1 + (v2 - v1) * (d1 / (d1 - d2)));
        }
      }
      region = std::move(next);
      if (region.size() < 3) return false;
    }
    return true;
  };
  if (!feasible(0.0)) return 0.0;
  double lo = 0.0, hi = 0.5 * diam;
  for (int it = 0; it < 80 && hi - lo > 1e-14 * diam; ++it) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

MeshQualityReport assess_quality(const PolygonalMesh& mesh) {
  MeshQualityReport rep;
  rep.min_edge_to_cell_diameter = 1e300;
  rep.min_cell_to_mesh_diameter = 1e300;
  rep.min_star_radius_ratio = 1e300;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    std::vector<Vec2> poly = mesh.cell_polygon(c);
    const std::size_t m = poly.size();
    for (int e : cell.edge_ids)
      rep.min_edge_to_cell_diameter =
          std::min(rep.min_edge_to_cell_diameter, mesh.edge(e).length / cell.diameter);
    rep.min_cell_to_mesh_diameter =
        std::min(rep.min_cell_to_mesh_diameter, cell.diameter / mesh.max_diameter());
    rep.min_star_radius_ratio = std::min(rep.min_star_radius_ratio, kernel_inradius(poly) / cell.diameter);

    bool convex = true;
    for (std::size_t i = 0; i < m; ++i) {
      Vec2 e1 = poly[(i + 1) % m] - poly[i];
      Vec2 e2 = poly[(i + 2) % m] - poly[(i + 1) % m];
      if (e1.cross(e2) < -1e-12 * cell.diameter * cell.diameter) {
        convex = false;
        break;
      }
    }
    if (!convex) rep.num_nonconvex_cells += 1;

    for (std::size_t i = 0; i < m; ++i) {
      double tri2 = (poly[i] - cell.centroid).cross(poly[(i + 1) % m] - cell.centroid);
      if (!(tri2 > 1e-14 * cell.area)) {
        rep.all_star_shaped_wrt_centroid = false;
        break;
      }
    }
  }
  return rep;
}

}  // namespace hjbvem::mesh
