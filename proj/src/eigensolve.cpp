#include "newtonspec/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace newtonspec {

namespace {

constexpr double kZeroModeRel = 1e-8;
constexpr double kClusterRel = 1e-6;

// M-orthonormalize the columns of x in place (modified Gram-Schmidt with one
// reorthogonalization sweep). Columns that collapse are replaced from rng.
void m_orthonormalize(Eigen::MatrixXd& x, const SparseSymMatrix& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto fill_random = [&](Eigen::Ref<Eigen::VectorXd> col) {
    for (int i = 0; i < col.size(); ++i) col[i] = unit(rng);
  };
  for (int j = 0; j < x.cols(); ++j) {
    for (int attempt = 0; attempt < 3; ++attempt) {
      for (int sweep = 0; sweep < 2; ++sweep)
        for (int i = 0; i < j; ++i) {
          const double proj = x.col(i).dot(m * x.col(j));
          x.col(j) -= proj * x.col(i);
        }
      const double norm = std::sqrt(std::max(x.col(j).dot(m * x.col(j)), 0.0));
      if (norm > 1e-12) {
        x.col(j) /= norm;
        break;
      }
      fill_random(x.col(j));
    }
  }
}

std::vector<int> cluster_sizes_of(const Eigen::VectorXd& values) {
  std::vector<int> sizes;
  for (int i = 0; i < values.size(); ++i) {
    if (i > 0 && values[i] - values[i - 1] <= kClusterRel * std::max(1.0, std::abs(values[i])))
      ++sizes.back();
    else
      sizes.push_back(1);
  }
  return sizes;
}

}  // namespace

SpectralResult smallest_eigenpairs(const SparseSymMatrix& stiffness,
                                   const SparseSymMatrix& mass, int k,
                                   const EigenSolveOptions& options) {
  const Eigen::Index dim = stiffness.rows();
  if (stiffness.cols() != dim || mass.rows() != dim || mass.cols() != dim)
    throw InvalidInput("smallest_eigenpairs: operator and mass shapes disagree");
  if (k < 1 || k >= dim) throw InvalidInput("smallest_eigenpairs: need 1 <= k < dim");

  Eigen::SimplicialLDLT<SparseSymMatrix> mass_probe(mass);
  if (mass_probe.info() != Eigen::Success || mass_probe.vectorD().minCoeff() <= 0.0)
    throw InvalidMass("smallest_eigenpairs: mass matrix is not positive definite");

  // Constants in the kernel get deflated; any other near-kernel is handled by
  // computing a couple of extra pairs and dropping the near-zero ones.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dim);
  double diag_scale = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i)
    diag_scale = std::max(diag_scale, std::abs(stiffness.coeff(i, i)));
  const bool deflate_constants =
      (stiffness * ones).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, diag_scale);

  const int zero_buffer = deflate_constants ? 0 : 2;
  const int required = std::min<int>(k + zero_buffer, static_cast<int>(dim));
  const int total = std::min<int>(required + std::max(0, options.padding),
                                  static_cast<int>(dim));
  const int block = std::min<int>(total + std::max(2, total / 2), static_cast<int>(dim));

  const double trace_ratio = [&] {
    double tk = 0.0, tm = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      tk += std::abs(stiffness.coeff(i, i));
      tm += mass.coeff(i, i);
    }
    return tk / std::max(tm, 1e-300);
  }();
  double sigma = std::max(1e-2 * trace_ratio / static_cast<double>(dim), 1e-12);

  Eigen::SimplicialLDLT<SparseSymMatrix> solver;
  for (int attempt = 0;; ++attempt) {
    SparseSymMatrix shifted = stiffness + sigma * mass;
    solver.compute(shifted);
    if (solver.info() == Eigen::Success && solver.vectorD().minCoeff() > 0.0) break;
    if (attempt >= 4)
      throw NotConverged("smallest_eigenpairs: shifted factorization failed", {}, 0);
    sigma *= 10.0;
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd x(dim, block);
  for (int j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) x(i, j) = unit(rng);

  const double ones_m_norm2 = ones.dot(mass * ones);
  const auto deflate = [&](Eigen::MatrixXd& y) {
    if (!deflate_constants) return;
    const Eigen::RowVectorXd coeff = (ones.transpose() * (mass * y)) / ones_m_norm2;
    y.noalias() -= ones * coeff;
  };

  deflate(x);
  m_orthonormalize(x, mass, rng);

  Eigen::VectorXd theta;
  Eigen::VectorXd residuals = Eigen::VectorXd::Constant(total, 1e300);
  int iterations = 0;
  int extra_budget = 25;  // iterations granted to padding pairs after the required converge
  bool required_ok = false;
  for (iterations = 1; iterations <= options.max_iterations; ++iterations) {
    Eigen::MatrixXd y = solver.solve(mass * x);
    deflate(y);
    m_orthonormalize(y, mass, rng);

    const Eigen::MatrixXd reduced = y.transpose() * (stiffness * y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(
        0.5 * (reduced + reduced.transpose()));
    x.noalias() = y * ritz.eigenvectors();
    theta = ritz.eigenvalues();

    required_ok = true;
    bool all_ok = true;
    for (int i = 0; i < total; ++i) {
      const Eigen::VectorXd res = stiffness * x.col(i) - theta[i] * (mass * x.col(i));
      residuals[i] = res.norm();
      if (residuals[i] > options.tol * (1.0 + std::abs(theta[i]))) {
        all_ok = false;
        if (i < required) required_ok = false;
      }
    }
    if (all_ok) break;
    if (required_ok && --extra_budget <= 0) break;
  }
  if (!required_ok) {
    std::vector<double> res(residuals.data(), residuals.data() + required);
    throw NotConverged("smallest_eigenpairs: residual target not reached", res,
                       options.max_iterations);
  }

  int converged_prefix = 0;
  while (converged_prefix < total &&
         residuals[converged_prefix] <=
             options.tol * (1.0 + std::abs(theta[converged_prefix])))
    ++converged_prefix;

  // Drop near-zero modes when the kernel was not the constant one.
  std::vector<int> keep;
  const double zero_tol =
      kZeroModeRel * std::max(1.0, std::abs(theta[converged_prefix - 1]));
  for (int i = 0;
       i < converged_prefix && static_cast<int>(keep.size()) < k + options.padding; ++i) {
    if (!deflate_constants && std::abs(theta[i]) <= zero_tol) continue;
    keep.push_back(i);
  }
  if (static_cast<int>(keep.size()) < k)
    throw NotConverged("smallest_eigenpairs: too few positive eigenvalues in window",
                       std::vector<double>(residuals.data(), residuals.data() + required),
                       iterations);

  const int found = static_cast<int>(keep.size());
  SpectralResult result;
  result.eigenvalues.resize(found);
  result.eigenvectors.resize(dim, found);
  result.residuals.resize(found);
  for (int i = 0; i < found; ++i) {
    result.eigenvalues[i] = theta[keep[static_cast<size_t>(i)]];
    result.eigenvectors.col(i) = x.col(keep[static_cast<size_t>(i)]);
    result.residuals[i] = residuals[keep[static_cast<size_t>(i)]];
  }
  result.cluster_sizes = cluster_sizes_of(result.eigenvalues);
  result.iterations = iterations;
  result.solver_name = "blocked-shift-invert-ldlt";
  return result;
}

double rayleigh_quotient(const SparseSymMatrix& stiffness, const SparseSymMatrix& mass,
                         const Eigen::VectorXd& v) {
  const double denom = v.dot(mass * v);
  if (!(denom > 0.0)) throw InvalidInput("rayleigh_quotient: vector has zero mass norm");
  return v.dot(stiffness * v) / denom;
}

}  // namespace newtonspec
