#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "newtonspec/verify.hpp"

namespace {

using namespace newtonspec;

struct CommonOpts {
  std::string surface;
  int c = -1;  // -1 means: take it from the surface
  int r = 0;
  int level = 3;
  int eigs = 0;
  double tol = 1e-8;
  int quad = 2;
  std::string mass = "lumped";
  std::string out;
  std::string format = "json";
  int threads = 1;
  std::uint64_t seed = 7;
  bool verbose = false;
  double slack_tol = 0.03;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_level = true) {
  cmd->add_option("--surface", o.surface,
                  "sphere:R | ellipsoid:a1,a2[,a3,a4] | flattorus:r1,r2 | cliffordtorus:r1,r2")
      ->required();
  cmd->add_option("--c", o.c, "ambient curvature (0|1); must match the surface")
      ->check(CLI::Range(0, 1));
  cmd->add_option("--r", o.r, "operator order (even)");
  if (with_level) cmd->add_option("--level", o.level, "refinement level");
  cmd->add_option("--eigs", o.eigs, "eigenvalue count (0 = dimension)");
  cmd->add_option("--tol", o.tol, "eigensolver residual tolerance");
  cmd->add_option("--quad", o.quad, "quadrature order")->check(CLI::Range(1, 2));
  cmd->add_option("--mass", o.mass, "mass matrix type")
      ->check(CLI::IsMember({"lumped", "consistent"}));
  cmd->add_option("--out", o.out, "output file path");
  cmd->add_option("--format", o.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", o.threads, "assembly threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--slack-tol", o.slack_tol, "allowed slack_ratio excess over 1");
  cmd->add_flag("-v,--verbose", o.verbose, "verbose output");
}

SurfaceSpec resolve_surface(const CommonOpts& o) {
  SurfaceSpec spec = parse_surface(o.surface);
  if (o.c >= 0 && o.c != spec.ambient.curvature)
    throw InvalidInput("--c does not match the surface's ambient curvature");
  return spec;
}

VerifyOptions verify_options(const CommonOpts& o) {
  VerifyOptions v;
  v.level = o.level;
  v.k_eigs = o.eigs;
  v.tol = o.tol;
  v.quadrature_order = o.quad;
  v.mass = (o.mass == "consistent") ? MassType::Consistent : MassType::Lumped;
  v.threads = o.threads;
  v.seed = o.seed;
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int run_verify(const CommonOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const SurfaceSpec spec = resolve_surface(o);
  const VerificationReport report = check_theorem(spec, o.r, verify_options(o));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::cout << "surface " << report.surface << "  n=" << report.n << " N=" << report.N
            << " c=" << report.c << " r=" << report.r << " level=" << report.level
            << "  vertices=" << report.mesh_vertices << " elements=" << report.mesh_elements
            << "\n";
  std::cout << "eigenvalues:";
  for (double ev : report.eigenvalues) std::cout << " " << fmt(ev);
  std::cout << "\nclusters:";
  for (int sz : report.clusters) std::cout << " " << sz;
  std::cout << "\n";

  bool ok = true;
  const auto line = [&](const char* name, const IneqCheck& ineq, bool strict) {
    const bool pass = std::isfinite(ineq.slack_ratio) &&
                      (strict ? ineq.lhs < ineq.rhs : ineq.slack_ratio <= 1.0 + o.slack_tol);
    ok = ok && pass;
    std::cout << name << ": lhs=" << fmt(ineq.lhs) << " rhs=" << fmt(ineq.rhs)
              << " slack_ratio=" << fmt(ineq.slack_ratio) << (strict ? " (strict)" : "")
              << (pass ? "  [OK]" : "  [VIOLATED]") << "\n";
  };
  line("thm1", report.thm1, false);
  line("thm2", report.thm2, false);
  line("cor1", report.cor1, false);
  line("cor2", report.cor2, true);
  std::cout << "identities: trace=" << fmt(report.identity_residuals.trace_max_abs)
            << " contraction=" << fmt(report.identity_residuals.contraction_max_abs)
            << " weak_lr_x=" << fmt(report.identity_residuals.weak_lr_x) << "\n";
  std::cout << "ellipticity_min=" << fmt(report.ellipticity_min) << "\n";
  std::cout << "lemma: " << (report.lemma_check_pass ? "pass" : "FAIL") << "\n";
  ok = ok && report.lemma_check_pass;
  if (o.verbose) std::cout << "elapsed_s=" << fmt(elapsed) << "\n";

  if (!o.out.empty())
    emit_report(report, o.out, o.format == "csv" ? ReportFormat::Csv : ReportFormat::Json);

  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

int run_converge(const CommonOpts& o, const std::string& levels_text) {
  const SurfaceSpec spec = resolve_surface(o);
  const size_t dots = levels_text.find("..");
  if (dots == std::string::npos)
    throw InvalidInput("--levels expects <a..b>, got '" + levels_text + "'");
  const int a = std::stoi(levels_text.substr(0, dots));
  const int b = std::stoi(levels_text.substr(dots + 2));
  if (b < a) throw InvalidInput("--levels range is empty");
  std::vector<int> levels;
  for (int l = a; l <= b; ++l) levels.push_back(l);

  const ConvergenceTable table = converge(spec, o.r, levels, o.eigs, verify_options(o));

  std::string csv =
      "level,vertices,elements,lambda1,lambda1_error,thm1_slack,thm2_slack,"
      "trace_residual,contraction_residual,weak_residual\n";
  std::cout << "surface " << surface_descriptor(spec) << " r=" << o.r
            << (table.has_analytic
                    ? "  (reference lambda1 = " + fmt(table.analytic_lambda1) + ", analytic)"
                    : "  (reference lambda1 from finest level)")
            << "\n";
  std::printf("%-6s %-9s %-9s %-14s %-12s %-11s %-11s %-11s\n", "level", "vertices",
              "elements", "lambda1", "l1_error", "thm1_slack", "thm2_slack", "weak_res");
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::printf("%-6d %-9d %-9d %-14.8g %-12.4g %-11.6g %-11.6g %-11.4g\n", row.level,
                row.vertices, row.elements, row.eigenvalues[0], table.lambda1_errors[i],
                row.thm1_slack, row.thm2_slack, row.weak_residual);
    csv += std::to_string(row.level) + "," + std::to_string(row.vertices) + "," +
           std::to_string(row.elements) + "," + fmt(row.eigenvalues[0]) + "," +
           fmt(table.lambda1_errors[i]) + "," + fmt(row.thm1_slack) + "," +
           fmt(row.thm2_slack) + "," + fmt(row.trace_residual) + "," +
           fmt(row.contraction_residual) + "," + fmt(row.weak_residual) + "\n";
  }
  std::cout << "lambda1 orders:";
  for (double p : table.lambda1_orders) std::cout << " " << fmt(p);
  std::cout << "\nweak residual orders:";
  for (double p : table.weak_orders) std::cout << " " << fmt(p);
  std::cout << "\n";

  if (!o.out.empty()) {
    std::ofstream os(o.out, std::ios::binary);
    if (!os) throw ReportWriteError("converge: cannot open " + o.out);
    os << csv;
    if (!os.good()) throw ReportWriteError("converge: write failed for " + o.out);
  }
  return 0;
}

int run_spectrum(const CommonOpts& o) {
  const SurfaceSpec spec = resolve_surface(o);
  const SimplicialMesh mesh = generate_mesh(spec, o.level);
  AssemblyOptions aopt;
  aopt.quadrature_order = o.quad;
  aopt.threads = o.threads;
  const SparseSymMatrix k = assemble_stiffness(mesh, o.r, aopt);
  const SparseSymMatrix m = assemble_mass(
      mesh, o.mass == "consistent" ? MassType::Consistent : MassType::Lumped);
  EigenSolveOptions eopt;
  eopt.tol = o.tol;
  eopt.seed = o.seed;
  const int k_eigs = o.eigs > 0 ? o.eigs : spec.dim;
  const SpectralResult eig = smallest_eigenpairs(k, m, k_eigs, eopt);

  std::string body;
  char buf[40];
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", eig.eigenvalues[i]);
    body += buf;
    body += "\n";
  }
  std::cout << body;
  if (o.verbose)
    std::cout << "iterations=" << eig.iterations << " solver=" << eig.solver_name << "\n";
  if (!o.out.empty()) {
    std::ofstream os(o.out, std::ios::binary);
    if (!os) throw ReportWriteError("spectrum: cannot open " + o.out);
    os << body;
    if (!os.good()) throw ReportWriteError("spectrum: write failed for " + o.out);
  }
  return 0;
}

int run_identities(const CommonOpts& o, int samples) {
  const SurfaceSpec spec = resolve_surface(o);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

  const int n = spec.dim;
  double trace_max = 0.0;
  double contraction_max = 0.0;
  double recursion_max = 0.0;
  for (int s = 0; s < samples; ++s) {
    SurfacePoint where;
    if (spec.parametric()) {
      where = SurfacePoint::params(angle(rng), angle(rng));
    } else {
      Eigen::VectorXd dir(spec.embed_dim());
      for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
      where = SurfacePoint::ambient(project_to_surface(spec, dir));
    }
    const GeometrySample g = sample_geometry(spec, where);
    const NewtonData nd = newton_tensor(g, o.r);
    trace_max = std::max(trace_max, std::abs(nd.tensor.trace() - (n - o.r) * nd.scalar));
    if (o.r >= 2) {
      const MixedNewtonData md = mixed_newton_tensor(g, o.r - 1);
      double contracted = 0.0;
      for (int a = 0; a < g.codim(); ++a)
        contracted += (md.tensors[static_cast<size_t>(a)].array() *
                       g.second_fundamental[static_cast<size_t>(a)].array())
                          .sum();
      contraction_max =
          std::max(contraction_max, std::abs(contracted / o.r - nd.scalar));
    }
    if (g.codim() == 1) {
      const Eigen::MatrixXd recursed =
          hypersurface_newton_recursion(g.second_fundamental[0], o.r);
      recursion_max =
          std::max(recursion_max, (recursed - nd.tensor).cwiseAbs().maxCoeff());
    }
  }

  std::cout << "samples=" << samples << " r=" << o.r << "\n"
            << "trace_max_abs=" << fmt(trace_max) << "\n"
            << "contraction_max_abs=" << fmt(contraction_max) << "\n"
            << "hypersurface_recursion_max_abs=" << fmt(recursion_max) << "\n";
  const bool ok = trace_max <= 1e-10 && contraction_max <= 1e-10 && recursion_max <= 1e-12;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton tensor operators on discrete submanifolds: eigenvalue bound checks"};
  app.require_subcommand(1);

  CommonOpts vo, co, so, io;
  std::string levels_text;
  int samples = 1000;

  CLI::App* verify_cmd = app.add_subcommand("verify", "run all inequality and identity checks");
  add_common(verify_cmd, vo);
  CLI::App* converge_cmd = app.add_subcommand("converge", "refinement study across levels");
  add_common(converge_cmd, co, false);
  converge_cmd->add_option("--levels", levels_text, "level range <a..b>")->required();
  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues only");
  add_common(spectrum_cmd, so);
  CLI::App* identities_cmd =
      app.add_subcommand("identities", "pointwise identity residuals, no FEM");
  add_common(identities_cmd, io, false);
  identities_cmd->add_option("--samples", samples, "number of random surface points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify_cmd->parsed()) return run_verify(vo);
    if (converge_cmd->parsed()) return run_converge(co, levels_text);
    if (spectrum_cmd->parsed()) return run_spectrum(so);
    return run_identities(io, samples);
  } catch (const newtonspec::NotElliptic& e) {
    std::cerr << "ellipticity failure: " << e.what() << " (margin " << e.worst_margin << ")\n";
    return 3;
  } catch (const newtonspec::NotConverged& e) {
    std::cerr << "solver non-convergence: " << e.what() << "\n";
    return 4;
  } catch (const newtonspec::ReportWriteError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 5;
  } catch (const newtonspec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
