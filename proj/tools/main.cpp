#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "hjbvem/config.hpp"

namespace {

using hjbvem::config::RunConfig;
namespace hv = hjbvem;

int do_run(const RunConfig& cfg) {
  const auto p = hv::config::make_problem(cfg);
  const auto fam = hv::config::family(cfg);
  const auto m = hv::config::make_run_mesh(cfg, p.domain);
  const hv::assembly::Discretization disc(m, fam, p.lambda, cfg.quad_order);
  const auto res = hv::newton::solve_hjb(disc, p, hv::config::newton_config(cfg));

  std::printf("problem: %s\n", p.name.c_str());
  std::printf("family: %s\n", hv::element::to_string(fam).c_str());
  std::printf("mesh: %d cells, %d vertices, %d edges\n", m.num_cells(), m.num_vertices(),
              m.num_edges());
  std::printf("dofs: %d free of %d raw\n", disc.dofs.num_free(), disc.dofs.num_raw());
  std::printf("%-5s %-14s %-8s %s\n", "iter", "err", "changed", "linear-residual");
  for (const auto& it : res.trace) {
    std::printf("%-5d %-14.6e %-8d %.6e\n", it.iteration, it.err, it.changed_controls,
                it.linear_residual);
  }
  std::printf("converged: %s (%d iterations)\n", res.converged ? "yes" : "no", res.iterations);
  if (!res.converged) {
    std::fprintf(stderr, "error: Newton did not converge within %d iterations\n", cfg.itermax);
    return 1;
  }
  if (p.has_exact()) {
    const auto norms = hv::analysis::error_norms(disc, p, res.raw_solution, cfg.error_quad_order);
    std::printf("E2: %.6e\nE1: %.6e\nE0: %.6e\n", norms.e2, norms.e1, norms.e0);
  }

  const std::string path = cfg.output.empty() ? "solution.txt" : cfg.output;
  std::ofstream out(path);
  if (!out) {
    std::fprintf(stderr, "error: cannot open output file: %s\n", path.c_str());
    return 1;
  }
  out << "# raw dof values, one per line (layout documented in the README)\n";
  out << "# problem " << p.name << ", family " << hv::element::to_string(fam) << ", "
      << m.num_vertices() << " vertices, " << m.num_edges() << " edges\n";
  char buf[64];
  for (double v : res.raw_solution) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int do_convergence(const RunConfig& cfg) {
  if (!cfg.mesh_file.empty()) {
    throw std::invalid_argument("convergence requires a structured mesh family, not mesh-file");
  }
  const auto p = hv::config::make_problem(cfg);
  const auto report =
      hv::analysis::convergence_study(p, hv::config::family(cfg),
                                      hv::mesh::mesh_kind_from_string(cfg.mesh), cfg.levels,
                                      hv::config::study_config(cfg));
  if (cfg.output.empty()) {
    const std::string csv = hv::analysis::to_csv(report);
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    hv::analysis::write_csv(report, cfg.output);
  }
  return 0;
}

int do_check_cordes(const RunConfig& cfg) {
  const auto p = hv::config::make_problem(cfg);
  const auto report = hv::problem::check_cordes(p, cfg.cordes_grid);
  const std::string text = hv::config::format_report(report, p.name);
  std::fwrite(text.data(), 1, text.size(), stdout);
  return report.pass ? 0 : 2;
}

int do_make_mesh(const RunConfig& cfg) {
  const hv::Rect rect{cfg.domain[0], cfg.domain[1], cfg.domain[2], cfg.domain[3]};
  const auto m = hv::mesh::generate_structured(hv::mesh::mesh_kind_from_string(cfg.mesh), cfg.n,
                                               rect, cfg.seed);
  const std::string path = cfg.output.empty() ? "mesh.txt" : cfg.output;
  std::ofstream out(path);
  if (!out) {
    std::fprintf(stderr, "error: cannot open output file: %s\n", path.c_str());
    return 1;
  }
  hv::mesh::export_mesh(m, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual element solver for HJB and nondivergence-form elliptic problems"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value settings file; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunConfig cfg;
  app.add_option("--problem", cfg.problem, "example1 | example2 | example3 | custom")
      ->capture_default_str();
  app.add_option("--family", cfg.family, "conforming | nonconforming")->capture_default_str();
  app.add_option("--mesh", cfg.mesh, "triangle | square | hexagon | distorted_quad")
      ->capture_default_str();
  app.add_option("--kind", cfg.mesh, "alias of --mesh for make-mesh");
  app.add_option("--mesh-file", cfg.mesh_file, "import a mesh instead of generating one");
  app.add_option("--levels", cfg.levels, "refinement levels (cells per side)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--n", cfg.n, "cells per side for run and make-mesh")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "override the problem's zeroth-order shift");
  app.add_option("--n-theta", cfg.n_theta, "control samples along theta (example2)")
      ->capture_default_str();
  app.add_option("--n-phi", cfg.n_phi, "control samples along phi (example2)")
      ->capture_default_str();
  app.add_option("--fine-n", cfg.fine_n, "fine control grid used to build example2's load")
      ->capture_default_str();
  app.add_option("--tol", cfg.tol, "Newton stopping tolerance, in (0, 1)")->capture_default_str();
  app.add_option("--itermax", cfg.itermax, "Newton iteration budget")->capture_default_str();
  app.add_option("--theta", cfg.theta, "linearization blend weight")->capture_default_str();
  app.add_option("--metric", cfg.metric, "stopping metric: hessian | bnorm")
      ->capture_default_str();
  app.add_option("--quad-order", cfg.quad_order, "assembly quadrature order")
      ->capture_default_str();
  app.add_option("--error-quad-order", cfg.error_quad_order, "error-norm quadrature order")
      ->capture_default_str();
  app.add_option("--output,-o", cfg.output, "output path (default depends on the subcommand)");
  app.add_option("--seed", cfg.seed, "mesh distortion seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "refinement levels solved concurrently")
      ->envname("HJBVEM_THREADS")
      ->capture_default_str();
  app.add_flag("--timing", cfg.timing, "record wall time in the seconds column");
  app.add_option("--grid", cfg.cordes_grid, "sample lattice for check-cordes")
      ->capture_default_str();
  app.add_option("--A", cfg.coef_a, "custom problem: diffusion xx xy yy")->expected(3);
  app.add_option("--b", cfg.coef_b, "custom problem: drift bx by")->expected(2);
  app.add_option("--c", cfg.coef_c, "custom problem: reaction coefficient");
  app.add_option("--f", cfg.coef_f, "custom problem: right-hand side");
  app.add_option("--eps", cfg.declared_eps, "custom problem: declared Cordes epsilon");
  app.add_option("--domain", cfg.domain, "rectangle xmin ymin xmax ymax (custom and make-mesh)")
      ->expected(4);

  auto* sub_run = app.add_subcommand("run", "solve once; writes DOFs and prints a summary");
  auto* sub_conv = app.add_subcommand("convergence", "refinement study; writes the report CSV");
  auto* sub_cordes = app.add_subcommand("check-cordes", "audit the Cordes condition");
  auto* sub_mesh = app.add_subcommand("make-mesh", "generate a structured mesh file");
  for (auto* s : {sub_run, sub_conv, sub_cordes, sub_mesh}) s->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.validate();
    if (sub_run->parsed()) return do_run(cfg);
    if (sub_conv->parsed()) return do_convergence(cfg);
    if (sub_cordes->parsed()) return do_check_cordes(cfg);
    return do_make_mesh(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
