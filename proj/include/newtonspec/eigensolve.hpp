#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "newtonspec/assembly.hpp"
#include "newtonspec/errors.hpp"

namespace newtonspec {

struct EigenSolveOptions {
  double tol = 1e-8;       // residual target, relative: |Ku - lMu| <= tol*(1+l)
  int max_iterations = 200;
  std::uint64_t seed = 7;  // seeds the start block; fixed seed keeps runs reproducible
  // Best-effort extra pairs past k, to expose cluster boundaries. They are
  // returned only while converged: a padding pair cut off mid-cluster by the
  // iteration block cannot reach the residual target and is dropped instead
  // of failing the solve.
  int padding = 0;
};

struct SpectralResult {
  Eigen::VectorXd eigenvalues;   // ascending, zero modes already removed
  Eigen::MatrixXd eigenvectors;  // columns, M-orthonormal
  Eigen::VectorXd residuals;     // |Ku - lMu|_2 per returned pair
  std::vector<int> cluster_sizes;  // multiplicities at relative gap 1e-6
  int iterations = 0;
  std::string solver_name;
};

// Smallest k eigenpairs of K u = lambda M u for sparse symmetric K (positive
// semidefinite) and SPD mass M, by blocked shift-invert subspace iteration on
// (K + sigma M)^{-1} M with a sparse LDLT factorization. When constants span
// the kernel of K they are deflated explicitly; otherwise near-zero modes are
// computed and dropped, so the result always starts at the first genuinely
// positive eigenvalue.
SpectralResult smallest_eigenpairs(const SparseSymMatrix& stiffness,
                                   const SparseSymMatrix& mass, int k,
                                   const EigenSolveOptions& options = {});

double rayleigh_quotient(const SparseSymMatrix& stiffness, const SparseSymMatrix& mass,
                         const Eigen::VectorXd& v);

}  // namespace newtonspec
