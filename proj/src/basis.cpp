#include "hjbvem/basis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hjbvem::basis {

MonomialBasis::MonomialBasis(Vec2 c, double s, int d) : center(c), scale(s), degree(d) {
  if (d < 0) throw std::invalid_argument("MonomialBasis: negative degree");
  if (!(s > 0.0)) throw std::invalid_argument("MonomialBasis: scale must be positive");
}

std::pair<int, int> MonomialBasis::exponents(int m) {
  int deg = 0;
  while (size_for(deg) <= m) ++deg;
  int offset = m - size_for(deg - 1);
  return {deg - offset, offset};
}

std::vector<double> MonomialBasis::eval(const Vec2& p) const {
  const double X = (p.x - center.x) / scale;
  const double Y = (p.y - center.y) / scale;
  std::vector<double> out(size());
  int m = 0;
  std::vector<double> xpow(degree + 1, 1.0), ypow(degree + 1, 1.0);
  for (int d = 1; d <= degree; ++d) {
    xpow[d] = xpow[d - 1] * X;
    ypow[d] = ypow[d - 1] * Y;
  }
  for (int d = 0; d <= degree; ++d)
    for (int j = 0; j <= d; ++j) out[m++] = xpow[d - j] * ypow[j];
  return out;
}

std::vector<Vec2> MonomialBasis::eval_gradient(const Vec2& p) const {
  const double X = (p.x - center.x) / scale;
  const double Y = (p.y - center.y) / scale;
  std::vector<double> xpow(degree + 1, 1.0), ypow(degree + 1, 1.0);
  for (int d = 1; d <= degree; ++d) {
    xpow[d] = xpow[d - 1] * X;
    ypow[d] = ypow[d - 1] * Y;
  }
  std::vector<Vec2> out(size());
  int m = 0;
  for (int d = 0; d <= degree; ++d) {
    for (int j = 0; j <= d; ++j) {
      int i = d - j;
      double gx = i > 0 ? i * xpow[i - 1] * ypow[j] : 0.0;
      double gy = j > 0 ? j * xpow[i] * ypow[j - 1] : 0.0;
      out[m++] = Vec2{gx / scale, gy / scale};
    }
  }
  return out;
}

std::vector<SymMat2> MonomialBasis::eval_hessian(const Vec2& p) const {
  const double X = (p.x - center.x) / scale;
  const double Y = (p.y - center.y) / scale;
  std::vector<double> xpow(degree + 1, 1.0), ypow(degree + 1, 1.0);
  for (int d = 1; d <= degree; ++d) {
    xpow[d] = xpow[d - 1] * X;
    ypow[d] = ypow[d - 1] * Y;
  }
  const double s2 = scale * scale;
  std::vector<SymMat2> out(size());
  int m = 0;
  for (int d = 0; d <= degree; ++d) {
    for (int j = 0; j <= d; ++j) {
      int i = d - j;
      SymMat2 h;
      h.xx = i > 1 ? i * (i - 1) * xpow[i - 2] * ypow[j] / s2 : 0.0;
      h.xy = (i > 0 && j > 0) ? i * j * xpow[i - 1] * ypow[j - 1] / s2 : 0.0;
      h.yy = j > 1 ? j * (j - 1) * xpow[i] * ypow[j - 2] / s2 : 0.0;
      out[m++] = h;
    }
  }
  return out;
}

double QuadratureRule::weight_sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

// Newton iteration on the Legendre polynomial, nodes mapped from [-1,1].
void gauss_legendre_impl(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = p1;
      double pn1 = p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = 0.5 * (1.0 - x);  // descending in x maps to ascending in [0,1]
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

std::mutex gl_mutex;
std::map<int, std::pair<std::vector<double>, std::vector<double>>> gl_table;

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: need at least one node");
  std::lock_guard<std::mutex> lock(gl_mutex);
  auto it = gl_table.find(n);
  if (it == gl_table.end()) {
    std::pair<std::vector<double>, std::vector<double>> entry;
    gauss_legendre_impl(n, entry.first, entry.second);
    it = gl_table.emplace(n, std::move(entry)).first;
  }
  nodes = it->second.first;
  weights = it->second.second;
}

QuadratureRule edge_quadrature(const Vec2& a, const Vec2& b, int order) {
  if (order < 0) throw std::invalid_argument("edge_quadrature: negative order");
  int n = order / 2 + 1;  // n-point Gauss is exact to degree 2n-1
  std::vector<double> t, w;
  gauss_legendre_01(n, t, w);
  QuadratureRule rule;
  rule.exactness = 2 * n - 1;
  double len = (b - a).norm();
  rule.points.reserve(n);
  rule.weights.reserve(n);
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(a + (b - a) * t[i]);
    rule.weights.push_back(w[i] * len);
  }
  return rule;
}

namespace {

// Collapsed tensor product rule on the reference triangle (0,0)-(1,0)-(0,1):
// x = u, y = v (1 - u), jacobian (1 - u). All weights positive; exact for
// total degree `order` with enough points in each direction.
void reference_triangle_rule(int order, std::vector<Vec2>& pts, std::vector<double>& wts) {
  int nu = (order + 2) / 2 + 1;  // integrand picks up one extra u-power from the jacobian
  int nv = order / 2 + 1;
  std::vector<double> un, uw, vn, vw;
  gauss_legendre_01(nu, un, uw);
  gauss_legendre_01(nv, vn, vw);
  pts.clear();
  wts.clear();
  pts.reserve(nu * nv);
  wts.reserve(nu * nv);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      double u = un[i];
      double v = vn[j] * (1.0 - u);
      pts.emplace_back(u, v);
      wts.push_back(uw[i] * vw[j] * (1.0 - u));
    }
  }
}

}  // namespace

QuadratureRule cell_quadrature(std::span<const Vec2> polygon, int order) {
  const std::size_t nv = polygon.size();
  if (nv < 3) throw std::invalid_argument("cell_quadrature: polygon needs at least 3 vertices");
  Vec2 c = polygon_centroid(polygon);
  std::vector<Vec2> ref_pts;
  std::vector<double> ref_wts;
  reference_triangle_rule(order, ref_pts, ref_wts);

  QuadratureRule rule;
  rule.exactness = order;
  double area_scale = polygon_area(polygon);
  for (std::size_t i = 0; i < nv; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % nv];
    double tri2 = (a - c).cross(b - c);  // twice the signed fan-triangle area
    if (!(tri2 > 1e-14 * area_scale))
      throw std::domain_error("cell_quadrature: cell is not star-shaped with respect to its centroid");
    for (std::size_t q = 0; q < ref_pts.size(); ++q) {
      double u = ref_pts[q].x, v = ref_pts[q].y;
      rule.points.push_back(c + (a - c) * u + (b - c) * v);
      rule.weights.push_back(ref_wts[q] * tri2);
    }
  }
  return rule;
}

double polygon_area(std::span<const Vec2> polygon) {
  double s = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) s += polygon[i].cross(polygon[(i + 1) % n]);
  return 0.5 * s;
}

Vec2 polygon_centroid(std::span<const Vec2> polygon) {
  double a = 0.0;
  Vec2 c{0.0, 0.0};
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % n];
    double w = p.cross(q);
    a += w;
    c += (p + q) * w;
  }
  if (std::abs(a) < 1e-300) throw std::domain_error("polygon_centroid: degenerate polygon");
  return c / (3.0 * a);
}

double polygon_diameter(std::span<const Vec2> polygon) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i)
    for (std::size_t j = i + 1; j < polygon.size(); ++j)
      d2 = std::max(d2, (polygon[i] - polygon[j]).norm2());
  return std::sqrt(d2);
}

std::vector<double> exact_cell_moments(std::span<const Vec2> polygon, const MonomialBasis& mb) {
  // Integrate m = X^i Y^j (scaled) via the x-antiderivative:
  //   int_K m = sum_e int_e n_x * h/(i+1) * X^{i+1} Y^j ds.
  const std::size_t nv = polygon.size();
  if (nv < 3) throw std::invalid_argument("exact_cell_moments: polygon needs at least 3 vertices");
  std::vector<double> moments(mb.size(), 0.0);
  // Edge trace of X^{i+1} Y^j has degree (degree+1) in arclength.
  int trace_degree = mb.degree + 1;
  int nq = trace_degree / 2 + 1;
  std::vector<double> t, w;
  gauss_legendre_01(nq, t, w);
  for (std::size_t e = 0; e < nv; ++e) {
    const Vec2& a = polygon[e];
    const Vec2& b = polygon[(e + 1) % nv];
    Vec2 d = b - a;
    double len = d.norm();
    if (len < 1e-300) continue;
    double nx = d.y / len;  // outward normal x-component for CCW orientation
    if (nx == 0.0) continue;
    for (int q = 0; q < nq; ++q) {
      Vec2 p = a + d * t[q];
      double X = (p.x - mb.center.x) / mb.scale;
      double Y = (p.y - mb.center.y) / mb.scale;
      std::vector<double> xpow(mb.degree + 2, 1.0), ypow(mb.degree + 1, 1.0);
      for (int k = 1; k <= mb.degree + 1; ++k) xpow[k] = xpow[k - 1] * X;
      for (int k = 1; k <= mb.degree; ++k) ypow[k] = ypow[k - 1] * Y;
      int m = 0;
      for (int deg = 0; deg <= mb.degree; ++deg) {
        for (int j = 0; j <= deg; ++j) {
          int i = deg - j;
          moments[m++] += w[q] * len * nx * mb.scale / (i + 1.0) * xpow[i + 1] * ypow[j];
        }
      }
    }
  }
  return moments;
}

}  // namespace hjbvem::basis
