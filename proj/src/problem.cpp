#include "hjbvem/problem.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "hjbvem/basis.hpp"
#include "hjbvem/mesh.hpp"

namespace hjbvem::problem {

namespace {
constexpr double kPi = std::numbers::pi;
}

ControlSet sample_control_set(const ControlGridSpec& spec) {
  ControlSet set;
  if (!spec.explicit_points.empty()) {
    for (const auto& params : spec.explicit_points) {
      Control c;
      c.index = set.size();
      c.params = params;
      set.controls.push_back(std::move(c));
    }
    set.description = "explicit list of " + std::to_string(set.size());
    return set;
  }
  if (spec.axes.empty()) throw std::invalid_argument("sample_control_set: empty spec");
  std::vector<std::vector<double>> axis_values;
  for (const auto& ax : spec.axes) {
    if (ax.n < 1) throw std::invalid_argument("sample_control_set: axis with n < 1");
    std::vector<double> vals(ax.n);
    for (int i = 0; i < ax.n; ++i) {
      if (ax.half_open)
        vals[i] = ax.lo + (ax.hi - ax.lo) * i / ax.n;
      else
        vals[i] = ax.n == 1 ? ax.lo : ax.lo + (ax.hi - ax.lo) * i / (ax.n - 1);
    }
    axis_values.push_back(std::move(vals));
  }
  // Tensor enumeration, first axis slowest.
  std::vector<std::size_t> idx(axis_values.size(), 0);
  while (true) {
    Control c;
    c.index = set.size();
    for (std::size_t a = 0; a < axis_values.size(); ++a) c.params.push_back(axis_values[a][idx[a]]);
    set.controls.push_back(std::move(c));
    std::size_t a = axis_values.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axis_values[a].size()) break;
      idx[a] = 0;
      if (a == 0) {
        set.description = "tensor grid of " + std::to_string(set.size());
        return set;
      }
    }
  }
}

double gamma(const HJBProblem& p, const Vec2& x, const Control& alpha) {
  const SymMat2 A = p.A(x, alpha);
  const double a2 = A.frob_norm2();
  if (a2 <= 0.0) throw std::domain_error("gamma: diffusion matrix vanishes");
  if (!p.has_lower_order) return A.trace() / a2;
  if (p.lambda <= 0.0) throw std::domain_error("gamma: lower-order terms require lambda > 0");
  const Vec2 bv = p.b(x, alpha);
  const double cl = p.c(x, alpha) / p.lambda;
  return (A.trace() + cl) / (a2 + bv.norm2() / (2.0 * p.lambda) + cl * cl);
}

CordesReport check_cordes(const HJBProblem& p, int grid_n) {
  if (grid_n < 1) throw std::invalid_argument("check_cordes: grid_n < 1");
  std::vector<Vec2> samples;
  for (int i = 0; i <= grid_n; ++i)
    for (int j = 0; j <= grid_n; ++j)
      samples.push_back({p.domain.xmin + p.domain.width() * i / grid_n,
                         p.domain.ymin + p.domain.height() * j / grid_n});
  // Interior quadrature points of a coarse reference mesh, in case the ratio
  // peaks away from the tensor grid.
  auto ref = mesh::generate_structured(mesh::MeshKind::square, 8, p.domain);
  for (int c = 0; c < ref.num_cells(); ++c) {
    auto rule = basis::cell_quadrature(ref.cell_polygon(c), 4);
    samples.insert(samples.end(), rule.points.begin(), rule.points.end());
  }

  CordesReport rep;
  rep.lower_order_branch = p.has_lower_order;
  rep.declared_eps = p.declared_eps;
  rep.notes = p.notes;
  rep.rho1 = std::numeric_limits<double>::infinity();
  rep.rho2 = -rep.rho1;
  rep.min_c = rep.rho1;
  rep.min_gamma = rep.rho1;
  rep.max_gamma = -rep.rho1;
  for (const Vec2& x : samples) {
    for (const Control& alpha : p.controls.controls) {
      const SymMat2 A = p.A(x, alpha);
      double lo, hi;
      A.eigenvalues(lo, hi);
      rep.rho1 = std::min(rep.rho1, lo);
      rep.rho2 = std::max(rep.rho2, hi);
      const double cval = p.c(x, alpha);
      rep.min_c = std::min(rep.min_c, cval);
      double ratio;
      if (p.has_lower_order) {
        const double cl = cval / p.lambda;
        const double num = A.frob_norm2() + p.b(x, alpha).norm2() / (2.0 * p.lambda) + cl * cl;
        const double den = A.trace() + cl;
        ratio = num / (den * den);
      } else {
        const double den = A.trace();
        ratio = A.frob_norm2() / (den * den);
      }
      rep.sup_ratio = std::max(rep.sup_ratio, ratio);
      const double g = gamma(p, x, alpha);
      rep.min_gamma = std::min(rep.min_gamma, g);
      rep.max_gamma = std::max(rep.max_gamma, g);
    }
  }
  const double shift = p.has_lower_order ? 2.0 : 1.0;
  rep.implied_eps = 1.0 / rep.sup_ratio - shift;
  rep.pass = rep.sup_ratio <= 1.0 / (shift + p.declared_eps) + 1e-12;
  return rep;
}

namespace {

// R(phi) P R(phi)^T for symmetric P.
SymMat2 rotate_sym(const SymMat2& p, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * c * p.xx - 2.0 * c * s * p.xy + s * s * p.yy,
          c * s * (p.xx - p.yy) + (c * c - s * s) * p.xy,
          s * s * p.xx + 2.0 * c * s * p.xy + c * c * p.yy};
}

std::function<double(const Vec2&, const Control&)> load_from_exact(const HJBProblem& p) {
  auto A = p.A;
  auto b = p.b;
  auto c = p.c;
  auto u = p.exact_u;
  auto grad = p.exact_grad;
  auto hess = p.exact_hess;
  return [=](const Vec2& x, const Control& alpha) {
    return A(x, alpha).frob(hess(x)) + b(x, alpha).dot(grad(x)) - c(x, alpha) * u(x);
  };
}

HJBProblem make_example1() {
  HJBProblem p;
  p.name = "example1";
  p.domain = {0.0, 0.0, 1.0, 1.0};
  p.lambda = 1.0;
  p.declared_eps = 9.0 / 20.0;
  p.has_lower_order = true;
  p.notes =
      "source displays the Cordes ratio as (38+|x|^2)/96 (sup 5/12, eps 2/5) "
      "but the coefficients give (38+|x|^2)/98 (sup 20/49), matching the "
      "claimed eps = 9/20; the computed value is reported";
  ControlGridSpec spec;
  spec.explicit_points = {{0.0}};
  p.controls = sample_control_set(spec);
  p.A = [](const Vec2&, const Control&) { return SymMat2{2.0, 1.0, 2.0}; };
  p.b = [](const Vec2& x, const Control&) { return x; };
  p.c = [](const Vec2&, const Control&) { return 3.0; };
  p.exact_u = [](const Vec2& x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  p.exact_grad = [](const Vec2& x) {
    return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
  };
  p.exact_hess = [](const Vec2& x) {
    const double s = std::sin(kPi * x.x) * std::sin(kPi * x.y);
    return SymMat2{-kPi * kPi * s, kPi * kPi * std::cos(kPi * x.x) * std::cos(kPi * x.y),
                   -kPi * kPi * s};
  };
  p.f = load_from_exact(p);
  return p;
}

struct PointKey {
  std::uint64_t x, y;
  bool operator==(const PointKey& o) const { return x == o.x && y == o.y; }
};
struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const {
    std::uint64_t h = k.x * 0x9e3779b97f4a7c15ull;
    h ^= k.y + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// The load term's control-independent part is the pointwise maximum over a
// fine reference control grid; it is cached per evaluation point because the
// same quadrature points recur for every control and Newton step.
struct Example2Load {
  struct FineEntry {
    SymMat2 A;
    double k;  // sqrt(3) sin^2(theta) / pi^2
  };
  std::vector<FineEntry> fine;
  std::function<double(const Vec2&)> u;
  std::function<SymMat2(const Vec2&)> hess;
  mutable std::mutex mu;
  mutable std::unordered_map<PointKey, double, PointKeyHash> memo;

  double g(const Vec2& x) const {
    const PointKey key{std::bit_cast<std::uint64_t>(x.x), std::bit_cast<std::uint64_t>(x.y)};
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
    }
    const SymMat2 H = hess(x);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& e : fine) best = std::max(best, e.A.frob(H) - e.k);
    const double val = best - kPi * kPi * u(x);
    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(key, val);
    return val;
  }
};

HJBProblem make_example2(const BuiltinOptions& opts) {
  if (opts.n_theta < 1 || opts.n_phi < 1 || opts.fine_n < 1)
    throw std::invalid_argument("make_builtin: control grid sizes must be >= 1");
  HJBProblem p;
  p.name = "example2";
  p.domain = {0.0, 0.0, 1.0, 1.0};
  p.lambda = 8.0 * kPi * kPi / 7.0;
  p.declared_eps = 1.0 / 7.0;
  p.has_lower_order = true;  // c = pi^2
  p.notes =
      "the load is assembled from a fine control lattice, so the exact solution "
      "solves the problem posed over that lattice; running with a coarser control "
      "grid leaves a sampling defect (L2 residual ~0.22 for a 16x16 grid against "
      "fine-n 64, machine zero when the grids coincide) that floors the "
      "achievable errors";

  ControlGridSpec spec;
  spec.axes = {{0.0, kPi / 3.0, opts.n_theta, false}, {0.0, 2.0 * kPi, opts.n_phi, true}};
  p.controls = sample_control_set(spec);

  auto control_matrix = [](double theta, double phi) {
    const double s = std::sin(theta), c = std::cos(theta);
    // (1/2) sigma sigma^T with sigma = R(phi) [[1, s], [0, c]].
    const SymMat2 mmt{1.0 + s * s, s * c, c * c};
    return rotate_sym(mmt, phi) * 0.5;
  };

  auto table = std::make_shared<std::vector<SymMat2>>();
  table->reserve(p.controls.size());
  for (const Control& a : p.controls.controls) table->push_back(control_matrix(a.params[0], a.params[1]));
  p.A = [table](const Vec2&, const Control& alpha) { return (*table)[alpha.index]; };
  p.b = [](const Vec2&, const Control&) { return Vec2{0.0, 0.0}; };
  p.c = [](const Vec2&, const Control&) { return kPi * kPi; };

  p.exact_u = [](const Vec2& x) {
    return std::exp(x.x * x.y) * std::sin(kPi * x.x) * std::sin(kPi * x.y);
  };
  p.exact_grad = [](const Vec2& x) {
    const double E = std::exp(x.x * x.y);
    const double s1 = std::sin(kPi * x.x), s2 = std::sin(kPi * x.y);
    const double c1 = std::cos(kPi * x.x), c2 = std::cos(kPi * x.y);
    return Vec2{E * s2 * (x.y * s1 + kPi * c1), E * s1 * (x.x * s2 + kPi * c2)};
  };
  p.exact_hess = [](const Vec2& x) {
    const double E = std::exp(x.x * x.y);
    const double s1 = std::sin(kPi * x.x), s2 = std::sin(kPi * x.y);
    const double c1 = std::cos(kPi * x.x), c2 = std::cos(kPi * x.y);
    return SymMat2{E * s2 * (x.y * x.y * s1 + 2.0 * kPi * x.y * c1 - kPi * kPi * s1),
                   E * ((x.x * s2 + kPi * c2) * (x.y * s1 + kPi * c1) + s1 * s2),
                   E * s1 * (x.x * x.x * s2 + 2.0 * kPi * x.x * c2 - kPi * kPi * s2)};
  };

  auto load = std::make_shared<Example2Load>();
  load->u = p.exact_u;
  load->hess = p.exact_hess;
  ControlGridSpec fine_spec;
  fine_spec.axes = {{0.0, kPi / 3.0, opts.fine_n, false}, {0.0, 2.0 * kPi, opts.fine_n, true}};
  for (const Control& a : sample_control_set(fine_spec).controls) {
    const double s = std::sin(a.params[0]);
    load->fine.push_back({control_matrix(a.params[0], a.params[1]),
                          std::sqrt(3.0) * s * s / (kPi * kPi)});
  }
  p.f = [load](const Vec2& x, const Control& alpha) {
    const double s = std::sin(alpha.params[0]);
    return std::sqrt(3.0) * s * s / (kPi * kPi) + load->g(x);
  };
  return p;
}

HJBProblem make_example3() {
  HJBProblem p;
  p.name = "example3";
  p.domain = {-kPi, -kPi, kPi, kPi};
  p.lambda = 1.0;
  p.declared_eps = 1.0 / 6.0;
  p.has_lower_order = true;
  ControlGridSpec spec;
  spec.explicit_points = {{1.0}, {2.0}};
  p.controls = sample_control_set(spec);
  p.A = [](const Vec2& x, const Control& alpha) {
    const double s = (x.x >= 0.0 ? 1.0 : -1.0) * (x.y >= 0.0 ? 1.0 : -1.0);
    if (alpha.params[0] < 1.5) return SymMat2{2.0 + s, 0.5 + 0.5 * s, 1.5 + 0.5 * s};
    return SymMat2{1.5 + 0.5 * s, 0.5 + 0.5 * s, 2.0 + s};
  };
  p.b = [](const Vec2&, const Control&) { return Vec2{1.0, 0.0}; };
  p.c = [](const Vec2&, const Control&) { return 1.0; };
  p.exact_u = [](const Vec2& x) { return std::sin(x.x) * std::sin(x.y); };
  p.exact_grad = [](const Vec2& x) {
    return Vec2{std::cos(x.x) * std::sin(x.y), std::sin(x.x) * std::cos(x.y)};
  };
  p.exact_hess = [](const Vec2& x) {
    const double s = std::sin(x.x) * std::sin(x.y);
    return SymMat2{-s, std::cos(x.x) * std::cos(x.y), -s};
  };
  p.f = load_from_exact(p);
  return p;
}

}  // namespace

HJBProblem make_builtin(const std::string& name, const BuiltinOptions& opts) {
  if (name == "example1") return make_example1();
  if (name == "example2") return make_example2(opts);
  if (name == "example3") return make_example3();
  throw std::invalid_argument("make_builtin: unknown problem " + name);
}

}  // namespace hjbvem::problem
