#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "newtonspec/mesh.hpp"
#include "newtonspec/newton.hpp"

namespace newtonspec {

/// Symmetric sparse operator; both triangles are stored and mirrored exactly.
using SparseSymMatrix = Eigen::SparseMatrix<double>;

enum class MassType { Lumped, Consistent };

struct AssemblyOptions {
  int quadrature_order = 2;
  int threads = 1;
};

/// Stiffness matrix of u -> -div(T^r grad u) on the flat complex:
/// K[a,b] = sum_el sum_q w_q |el| <T_eff grad phi_a, grad phi_b>, where T_eff
/// pushes the order-r tensor forward along the rotation aligning the analytic
/// tangent plane with the element plane, then clamps it there. Positive
/// semidefinite with the constants in its kernel; at r = 0 it reproduces the
/// classical cotangent weights.
/// Throws NotElliptic when the tensor loses definiteness at some quadrature
/// point. Deterministic for any thread count.
SparseSymMatrix assemble_stiffness(const SimplicialMesh& mesh, int r,
                                   const AssemblyOptions& opts = {});

/// P1 mass matrix; the lumped variant is the diagonal of row sums. Total mass
/// equals the mesh measure exactly for both.
SparseSymMatrix assemble_mass(const SimplicialMesh& mesh, MassType type = MassType::Lumped);

/// Pointwise coefficient diagnostics over all quadrature points.
struct EllipticityScan {
  double min_margin = 0.0;
  Eigen::VectorXd worst_point;
  double trace_residual_max = 0.0;        // max |tr T^r - (n-r) S_r|
  double contraction_residual_max = 0.0;  // mixed-tensor contraction vs S_r, r >= 2
};

EllipticityScan ellipticity_scan(const SimplicialMesh& mesh, int r, int quadrature_order = 2);

/// Residual of the coordinate identity: the discrete operator applied to each
/// embedding coordinate against the interpolated analytic right-hand side
/// (r+1) S_{r+1}^A - c (n-r) S_r x_A, measured in the inverse-mass norm.
struct WeakResidual {
  std::vector<double> per_coordinate;
  double summary = 0.0;  // l2 across coordinates
};

WeakResidual weak_coordinate_residual(const SimplicialMesh& mesh, int r,
                                      const AssemblyOptions& opts = {},
                                      MassType mass = MassType::Lumped);

/// Matrix Market coordinate export (symmetric, lower triangle, 1-based).
void write_matrix_market(const SparseSymMatrix& m, const std::string& path);

}  // namespace newtonspec
