#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "newtonspec/assembly.hpp"
#include "newtonspec/eigensolve.hpp"
#include "newtonspec/mesh.hpp"
#include "newtonspec/newton.hpp"
#include "newtonspec/surface.hpp"

namespace newtonspec {

// Integral quantities entering the eigenvalue bounds, by per-element
// quadrature of the analytic integrands at projected quadrature points.
struct IntegralBundle {
  double vol = 0.0;                   // total surface measure
  double int_H_r = 0.0;               // integral of the normalized order-r curvature
  double int_Hnext2_plus_cHr2 = 0.0;  // integral of |H_{r+1}|^2 + c H_r^2
  double int_S_r = 0.0;               // integral of the order-r curvature scalar
  double int_H2_plus_c = 0.0;         // integral of |H|^2 + c
  double c_r = 0.0;                   // (n - r) * C(n, r)
};

struct IneqCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack_ratio = 0.0;  // lhs / rhs
};

struct IdentityResiduals {
  double trace_max_abs = 0.0;
  double contraction_max_abs = 0.0;
  double weak_lr_x = 0.0;
};

struct PhaseTimings {
  bool recorded = false;  // left false for reproducible byte-identical reports
  double mesh_s = 0.0;
  double assemble_s = 0.0;
  double solve_s = 0.0;
  double integrate_s = 0.0;
  double total_s = 0.0;
};

struct VerificationReport {
  std::string surface;
  int n = 0;      // intrinsic dimension
  int N = 0;      // ambient space-form dimension
  int c = 0;      // ambient curvature
  int r = 0;      // operator order
  int level = 0;  // refinement level
  int mesh_vertices = 0;
  int mesh_elements = 0;
  std::vector<double> eigenvalues;  // first max(n, k) + padding nonzero values
  std::vector<int> clusters;        // multiplicity runs at relative gap 1e-6
  IneqCheck thm1;  // lambda_1 * int H_r  vs  c(r) * int(|H_{r+1}|^2 + c H_r^2)
  IneqCheck thm2;  // sum_{i<=n} sqrt(lambda_i)  vs  (n/vol) sqrt((n-r) int S_r * int(|H|^2+c))
  IneqCheck cor1;  // lambda_1  vs  (n-r)/vol^2 * int S_r * int(|H|^2+c)
  IneqCheck cor2;  // lambda_n  vs  n^2 (n-r)/vol^2 * int S_r * int(|H|^2+c), strict
  IdentityResiduals identity_residuals;
  double ellipticity_min = 0.0;
  bool lemma_check_pass = false;
  PhaseTimings timings;
};

struct VerifyOptions {
  int level = 3;
  int k_eigs = 0;  // 0 means n; padded internally for cluster boundaries
  double tol = 1e-8;
  int quadrature_order = 2;
  MassType mass = MassType::Lumped;
  int threads = 1;
  std::uint64_t seed = 7;
  int lemma_trials = 100;
  bool record_timings = false;
};

struct LemmaCheck {
  bool pass = false;
  int trials = 0;
  double worst_first_margin = 0.0;   // max relative excess of lambda_1 h'Kh over |Kh|_{M^-1}^2
  double worst_second_margin = 0.0;  // same for the delta-grid bound
  double analytic_delta = 0.0;       // (n/2) sqrt(int(|H|^2+c) / ((n-r) int S_r))
  double grid_argmin_delta = 0.0;    // minimizer of the coordinate-function bound on the grid
  bool argmin_at_analytic = false;
};

struct ConvergenceRow {
  int level = 0;
  int vertices = 0;
  int elements = 0;
  std::vector<double> eigenvalues;
  double thm1_slack = 0.0;
  double thm2_slack = 0.0;
  double trace_residual = 0.0;
  double contraction_residual = 0.0;
  double weak_residual = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool has_analytic = false;
  double analytic_lambda1 = 0.0;      // reference is the finest level when not analytic
  std::vector<double> lambda1_errors;  // one per row (vs reference)
  std::vector<double> lambda1_orders;  // log2 of successive error ratios
  std::vector<double> weak_orders;
};

IntegralBundle integrate(const SimplicialMesh& mesh, int r, int quadrature_order = 2);

VerificationReport check_theorem(const SurfaceSpec& spec, int r, const VerifyOptions& options = {});

LemmaCheck check_lemma(const SimplicialMesh& mesh, int r, int trials = 100,
                       std::uint64_t seed = 7, const AssemblyOptions& opts = {});

ConvergenceTable converge(const SurfaceSpec& spec, int r, const std::vector<int>& levels,
                          int k_eigs = 0, const VerifyOptions& options = {});

// Analytic first nonzero eigenvalue of the order-r operator where a closed
// form exists (round spheres at any admissible r, flat tori at r = 0);
// returns false otherwise.
bool analytic_lambda1(const SurfaceSpec& spec, int r, double& value);

enum class ReportFormat { Json, Csv };

// Deterministic serialization: fixed key order, floats at 17 significant
// digits, timings written as null unless recorded, so identical runs emit
// byte-identical files.
std::string report_to_json(const VerificationReport& report);
std::string report_to_csv(const VerificationReport& report);
void emit_report(const VerificationReport& report, const std::string& path, ReportFormat format);
VerificationReport parse_report(const std::string& path);

// CLI surface grammar: sphere:R | ellipsoid:a1,a2[,a3,a4] | flattorus:r1,r2 |
// cliffordtorus:r1,r2.
SurfaceSpec parse_surface(const std::string& text);

}  // namespace newtonspec
