#include "hjbvem/analysis.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace hjbvem::analysis {

ErrorNorms error_norms(const assembly::Discretization& disc, const problem::HJBProblem& p,
                       const std::vector<double>& raw_solution, int quad_order) {
  if (!p.exact_u || !p.exact_grad || !p.exact_hess) {
    throw std::invalid_argument("error_norms: problem carries no exact solution");
  }
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int c = 0; c < disc.mesh->num_cells(); ++c) {
    const auto& elem = disc.elements[c];
    const auto& geom = disc.geoms[c];
    const std::vector<double> loc = disc.gather_local(c, raw_solution);
    const std::vector<double> pv = elem.P_val().apply(loc);
    const std::vector<double> pg = elem.P1_grad.apply(loc);
    const std::vector<double> ph = elem.P0_hess.apply(loc);
    const SymMat2 hess_h{ph[0], ph[1], ph[2]};
    const basis::MonomialBasis mb(geom.centroid, geom.diameter, 2);
    const auto quad = basis::cell_quadrature(geom.verts, quad_order);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Vec2 x = quad.points[q];
      const double w = quad.weights[q];
      const std::vector<double> mv = mb.eval(x);
      double val_h = 0.0;
      for (int k = 0; k < 6; ++k) val_h += pv[k] * mv[k];
      Vec2 grad_h{0.0, 0.0};
      for (int k = 0; k < 3; ++k) {
        grad_h.x += pg[k] * mv[k];
        grad_h.y += pg[3 + k] * mv[k];
      }
      const double dv = p.exact_u(x) - val_h;
      const Vec2 dg = p.exact_grad(x) - grad_h;
      const SymMat2 dh = p.exact_hess(x) - hess_h;
      s0 += w * dv * dv;
      s1 += w * dg.norm2();
      s2 += w * dh.frob_norm2();
    }
  }
  return {std::sqrt(s0), std::sqrt(s1), std::sqrt(s2)};
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& h) {
  if (errors.size() != h.size()) {
    throw std::invalid_argument("eoc: errors and mesh sizes differ in length");
  }
  for (double e : errors) {
    if (!(e > 0.0)) throw std::invalid_argument("eoc: errors must be positive");
  }
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (!(h[i] < h[i - 1])) throw std::invalid_argument("eoc: mesh sizes must decrease");
  }
  std::vector<double> rates;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    rates.push_back(std::log(errors[i - 1] / errors[i]) / std::log(h[i - 1] / h[i]));
  }
  return rates;
}

namespace {

struct LevelOutcome {
  ConvergenceRow row;
  double h = 0.0;
  std::exception_ptr error;
};

LevelOutcome run_level(const problem::HJBProblem& p, element::Family family, mesh::MeshKind kind,
                       int n, const StudyConfig& cfg) {
  LevelOutcome out;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = mesh::generate_structured(kind, n, p.domain, cfg.seed);
    const assembly::Discretization disc(m, family, p.lambda, cfg.quad_order);
    const auto result = newton::solve_hjb(disc, p, cfg.newton);
    if (!result.converged) {
      throw std::runtime_error("Newton did not converge within " +
                               std::to_string(cfg.newton.itermax) + " iterations");
    }
    const ErrorNorms norms = error_norms(disc, p, result.raw_solution, cfg.error_quad_order);
    out.row.family = element::to_string(family);
    out.row.mesh = mesh::to_string(kind);
    out.row.inv_h = n;
    out.row.ndof = disc.dofs.num_free();
    out.row.e2 = norms.e2;
    out.row.e1 = norms.e1;
    out.row.e0 = norms.e0;
    out.row.newton_iters = result.iterations;
    if (cfg.timing) {
      out.row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    // Uniform subdivision: the domain-size factor cancels in every rate ratio.
    out.h = 1.0 / n;
  } catch (const std::exception& e) {
    out.error = std::make_exception_ptr(
        std::runtime_error("refinement 1/h=" + std::to_string(n) + ": " + e.what()));
  }
  return out;
}

}  // namespace

ConvergenceReport convergence_study(const problem::HJBProblem& p, element::Family family,
                                    mesh::MeshKind kind, const std::vector<int>& levels,
                                    const StudyConfig& config) {
  std::vector<LevelOutcome> outcomes(levels.size());
  const int workers = std::min<int>(std::max(1, config.threads), static_cast<int>(levels.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      outcomes[i] = run_level(p, family, kind, levels[i], config);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < levels.size(); i = next.fetch_add(1)) {
          outcomes[i] = run_level(p, family, kind, levels[i], config);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& o : outcomes) {
    if (o.error) std::rethrow_exception(o.error);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  ConvergenceReport report;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    ConvergenceRow row = outcomes[i].row;
    row.rate2 = row.rate1 = row.rate0 = nan;
    if (i > 0) {
      const ConvergenceRow& prev = report.rows[i - 1];
      const double lh = std::log(outcomes[i - 1].h / outcomes[i].h);
      if (prev.e2 > 0.0 && row.e2 > 0.0) row.rate2 = std::log(prev.e2 / row.e2) / lh;
      if (prev.e1 > 0.0 && row.e1 > 0.0) row.rate1 = std::log(prev.e1 / row.e1) / lh;
      if (prev.e0 > 0.0 && row.e0 > 0.0) row.rate0 = std::log(prev.e0 / row.e0) / lh;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_rate(double r) { return std::isfinite(r) ? fmt("%.4f", r) : std::string(); }

}  // namespace

std::string to_csv(const ConvergenceReport& report) {
  std::string out = "family,mesh,inv_h,ndof,E2,rate2,E1,rate1,E0,rate0,newton_iters,seconds\n";
  for (const auto& r : report.rows) {
    out += r.family;
    out += ',';
    out += r.mesh;
    out += ',';
    out += std::to_string(r.inv_h);
    out += ',';
    out += std::to_string(r.ndof);
    out += ',';
    out += fmt("%.6e", r.e2);
    out += ',';
    out += fmt_rate(r.rate2);
    out += ',';
    out += fmt("%.6e", r.e1);
    out += ',';
    out += fmt_rate(r.rate1);
    out += ',';
    out += fmt("%.6e", r.e0);
    out += ',';
    out += fmt_rate(r.rate0);
    out += ',';
    out += std::to_string(r.newton_iters);
    out += ',';
    out += fmt("%.3f", r.seconds);
    out += '\n';
  }
  return out;
}

void write_csv(const ConvergenceReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  const std::string text = to_csv(report);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace hjbvem::analysis
