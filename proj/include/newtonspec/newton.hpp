#pragma once

#include <vector>

#include <Eigen/Core>

#include "newtonspec/surface.hpp"

namespace newtonspec {

/// Generalized Kronecker symbol: determinant of the delta matrix
/// [upper_p == lower_q]. Tuples must have equal length; entries are 1-based
/// positive indices. Returns -1, 0 or +1.
int generalized_kronecker(const std::vector<int>& upper, const std::vector<int>& lower);

/// Binomial coefficient as a double (small arguments only).
double binomial(int n, int k);

/// Curvature data of order r at one surface point. All components live in the
/// sample's orthonormal frames; every scalar is frame- and flip-invariant.
struct NewtonData {
  int order = 0;
  Eigen::MatrixXd tensor;            // n x n, symmetric
  double scalar = 1.0;               // S_r
  double mean_scalar = 1.0;          // H_r = S_r / C(n,r)
  Eigen::VectorXd next_vector;       // S_{r+1} components on the normal frame
  double next_mean_norm2 = 0.0;      // |H_{r+1}|^2
  double ellipticity_margin = 1.0;   // smallest eigenvalue of the tensor
};

/// One mixed tensor per normal direction, order r-1 odd.
struct MixedNewtonData {
  int order = 0;  // r - 1
  std::vector<Eigen::MatrixXd> tensors;
};

/// Builds T^r, S_r and the contracted (r+1)-st curvature vector from a
/// geometry sample. Requires r even with 0 <= r <= n-1.
NewtonData newton_tensor(const GeometrySample& sample, int r);

/// Mixed expansion with one explicit second-fundamental-form factor.
/// Requires r_minus_1 odd with 1 <= r_minus_1 <= n-1.
MixedNewtonData mixed_newton_tensor(const GeometrySample& sample, int r_minus_1);

/// Scalar invariant S_r alone, admissible for 0 <= r <= n, r even.
double curvature_scalar(const GeometrySample& sample, int r);

/// Classical recursion P_r = S_r I - P_{r-1} A for hypersurfaces, driven by
/// principal curvatures (diagonal shape operator) ...
Eigen::MatrixXd hypersurface_newton_recursion(const Eigen::VectorXd& principal_curvatures, int r);

/// ... or by the full symmetric shape operator in an arbitrary frame.
Eigen::MatrixXd hypersurface_newton_recursion(const Eigen::MatrixXd& shape_operator, int r);

/// Pushes the tensor forward to embedding coordinates:
/// sum_ij T_ij e_i e_j^T. Annihilates the normal bundle; at r = 0 this is the
/// orthogonal projector onto the tangent plane.
Eigen::MatrixXd ambient_pushforward(const GeometrySample& sample, const NewtonData& data);

}  // namespace newtonspec
