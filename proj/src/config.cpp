#include "hjbvem/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hjbvem::config {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void RunConfig::validate() const {
  require(problem == "example1" || problem == "example2" || problem == "example3" ||
              problem == "custom",
          "problem: expected example1, example2, example3 or custom, got '" + problem + "'");
  element::family_from_string(family);
  if (mesh_file.empty()) mesh::mesh_kind_from_string(mesh);
  require(!levels.empty(), "levels: at least one refinement level is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require(levels[i] >= 1, "levels: entries must be >= 1");
    if (i > 0) require(levels[i] > levels[i - 1], "levels: must be strictly increasing");
  }
  require(n >= 1, "n: must be >= 1");
  require(tol > 0.0 && tol < 1.0, "tol: must lie in (0, 1)");
  require(itermax >= 0, "itermax: must be >= 0");
  require(theta >= 0.0 && theta <= 1.0, "theta: must lie in [0, 1]");
  require(metric == "hessian" || metric == "bnorm",
          "metric: expected hessian or bnorm, got '" + metric + "'");
  require(quad_order >= 2 && quad_order <= 40, "quad-order: must lie in [2, 40]");
  require(error_quad_order >= 2 && error_quad_order <= 40,
          "error-quad-order: must lie in [2, 40]");
  require(n_theta >= 1 && n_phi >= 1, "n-theta, n-phi: must be >= 1");
  require(fine_n >= 1, "fine-n: must be >= 1");
  require(threads >= 1, "threads: must be >= 1");
  require(cordes_grid >= 2, "grid: must be >= 2");
  require(coef_a.size() == 3, "A: expected three entries (xx, xy, yy)");
  require(coef_b.size() == 2, "b: expected two entries");
  require(declared_eps >= 0.0, "eps: must be >= 0");
  require(domain.size() == 4, "domain: expected xmin ymin xmax ymax");
  require(domain[2] > domain[0] && domain[3] > domain[1],
          "domain: max corner must exceed min corner");
  if (problem == "custom") {
    const bool lower_order = coef_b[0] != 0.0 || coef_b[1] != 0.0 || coef_c != 0.0;
    if (lower_order && !std::isnan(lambda)) {
      require(lambda > 0.0, "lambda: must be positive with lower-order terms present");
    }
  } else if (!std::isnan(lambda)) {
    require(lambda > 0.0, "lambda: must be positive for the builtin problems");
  }
}

element::Family family(const RunConfig& cfg) { return element::family_from_string(cfg.family); }

problem::HJBProblem make_problem(const RunConfig& cfg) {
  problem::HJBProblem p;
  if (cfg.problem == "custom") {
    p.name = "custom";
    p.domain = {cfg.domain[0], cfg.domain[1], cfg.domain[2], cfg.domain[3]};
    const SymMat2 a{cfg.coef_a[0], cfg.coef_a[1], cfg.coef_a[2]};
    const Vec2 bv{cfg.coef_b[0], cfg.coef_b[1]};
    const double cv = cfg.coef_c;
    const double fv = cfg.coef_f;
    p.has_lower_order = bv.norm2() > 0.0 || cv != 0.0;
    p.lambda = p.has_lower_order ? 1.0 : 0.0;
    p.declared_eps = cfg.declared_eps;
    p.notes = "user-supplied constant-coefficient linear problem";
    p.controls.controls.push_back({0, {}});
    p.controls.description = "singleton";
    p.A = [a](const Vec2&, const problem::Control&) { return a; };
    p.b = [bv](const Vec2&, const problem::Control&) { return bv; };
    p.c = [cv](const Vec2&, const problem::Control&) { return cv; };
    p.f = [fv](const Vec2&, const problem::Control&) { return fv; };
  } else {
    p = problem::make_builtin(cfg.problem, {cfg.n_theta, cfg.n_phi, cfg.fine_n});
  }
  if (!std::isnan(cfg.lambda)) p.lambda = cfg.lambda;
  return p;
}

mesh::PolygonalMesh make_run_mesh(const RunConfig& cfg, const Rect& rect) {
  if (!cfg.mesh_file.empty()) {
    std::ifstream in(cfg.mesh_file);
    if (!in) throw std::runtime_error("cannot open mesh file: " + cfg.mesh_file);
    return mesh::import_mesh(in);
  }
  return mesh::generate_structured(mesh::mesh_kind_from_string(cfg.mesh), cfg.n, rect, cfg.seed);
}

newton::NewtonConfig newton_config(const RunConfig& cfg) {
  newton::NewtonConfig nc;
  nc.tol = cfg.tol;
  nc.itermax = cfg.itermax;
  nc.theta = cfg.theta;
  nc.metric = cfg.metric == "bnorm" ? newton::ErrorMetric::b_norm
                                    : newton::ErrorMetric::projected_hessian;
  return nc;
}

analysis::StudyConfig study_config(const RunConfig& cfg) {
  analysis::StudyConfig sc;
  sc.newton = newton_config(cfg);
  sc.quad_order = cfg.quad_order;
  sc.error_quad_order = cfg.error_quad_order;
  sc.timing = cfg.timing;
  sc.threads = cfg.threads;
  sc.seed = cfg.seed;
  return sc;
}

std::string fraction_hint(double v) {
  if (!std::isfinite(v) || std::abs(v) > 1e6) return {};
  for (int q = 2; q < 100; ++q) {
    const double num = std::round(v * q);
    if (std::abs(v - num / q) <= 1e-10) {
      const long long p = static_cast<long long>(num);
      if (p % q == 0) return {};  // integer, not worth annotating
      return std::to_string(p) + "/" + std::to_string(q);
    }
  }
  return {};
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  std::string s = buf;
  const std::string hint = fraction_hint(v);
  if (!hint.empty()) s += " (= " + hint + ")";
  return s;
}

}  // namespace

std::string format_report(const problem::CordesReport& report, const std::string& problem_name) {
  std::string out;
  out += "problem: " + problem_name + "\n";
  out += std::string("cordes branch: ") +
         (report.lower_order_branch ? "lower-order terms (lambda > 0)" : "pure diffusion") + "\n";
  out += "sup ratio: " + num(report.sup_ratio) + "\n";
  out += "implied eps: " + num(report.implied_eps) + "\n";
  out += "declared eps: " + num(report.declared_eps) + "\n";
  out += std::string("status: ") + (report.pass ? "PASS" : "FAIL") + "\n";
  out += "ellipticity eigenvalues: [" + num(report.rho1) + ", " + num(report.rho2) + "]\n";
  if (report.lower_order_branch) out += "min c: " + num(report.min_c) + "\n";
  out += "gamma range: [" + num(report.min_gamma) + ", " + num(report.max_gamma) + "]\n";
  if (!report.notes.empty()) out += "notes: " + report.notes + "\n";
  return out;
}

}  // namespace hjbvem::config
