#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "newtonspec/errors.hpp"

namespace newtonspec {

/// Ambient space the surface is immersed in: flat R^N (curvature 0) or the
/// unit round sphere S^N (curvature 1). Submanifolds of S^N are handled
/// through the standard embedding S^N in R^{N+1}; the radial direction never
/// enters the normal bundle.
struct AmbientSpace {
  int curvature = 0;
  int ambient_dim = 3;

  /// Number of Cartesian coordinates used to represent points.
  int embed_dim() const { return ambient_dim + (curvature == 1 ? 1 : 0); }
};

enum class SurfaceKind {
  Sphere,           // round n-sphere of radius R in R^{n+1}
  Ellipsoid,        // axis-aligned ellipsoid in R^{n+1}
  FlatTorusR4,      // S^1(r1) x S^1(r2) in R^4
  CliffordTorusS3,  // S^1(r1) x S^1(r2) in S^3, r1^2 + r2^2 = 1
  HyperplanePatch,  // affine hyperplane {x_N = d}, curvature test dummy
};

/// Immutable description of a catalog surface. Use the factory functions;
/// they validate dimension/parameter compatibility.
struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::Sphere;
  int dim = 2;  // intrinsic dimension n
  std::vector<double> shape_params;
  AmbientSpace ambient;

  static SurfaceSpec sphere(int n, double radius);
  static SurfaceSpec ellipsoid(std::vector<double> semi_axes);
  static SurfaceSpec flat_torus(double r1, double r2);
  static SurfaceSpec clifford_torus(double r1, double r2);
  static SurfaceSpec hyperplane_patch(int n, double offset = 0.0);

  /// Throws Unsupported / InvalidInput when the combination is not admissible.
  void validate() const;

  /// True for chart-based surfaces (the two tori).
  bool parametric() const {
    return kind == SurfaceKind::FlatTorusR4 || kind == SurfaceKind::CliffordTorusS3;
  }

  int codim() const { return ambient.ambient_dim - dim; }
  int embed_dim() const { return ambient.embed_dim(); }
};

/// Pointwise differential geometry record. Frames are orthonormal;
/// second_fundamental[a](i,j) holds the component of the second fundamental
/// form on normal_frame.col(a) in the tangent frame. For curvature 1 the
/// frames are orthogonal to the position (radial) direction.
struct GeometrySample {
  Eigen::VectorXd position;
  Eigen::MatrixXd tangent_frame;  // embed_dim x n
  Eigen::MatrixXd normal_frame;   // embed_dim x codim
  std::vector<Eigen::MatrixXd> second_fundamental;
  double measure_weight = 1.0;  // chart area element, parametric surfaces only

  int dim() const { return static_cast<int>(tangent_frame.cols()); }
  int codim() const { return static_cast<int>(normal_frame.cols()); }
  int embed_dim() const { return static_cast<int>(position.size()); }

  /// Curvature vector B_ij expressed in embedding coordinates.
  Eigen::VectorXd curvature_vector(int i, int j) const;
};

/// Where to evaluate a surface: chart parameters or an on-surface ambient point.
struct SurfacePoint {
  std::optional<Eigen::Vector2d> chart;
  std::optional<Eigen::VectorXd> point;

  static SurfacePoint params(double u, double v);
  static SurfacePoint ambient(Eigen::VectorXd p);
};

/// Evaluates position, orthonormal frames and the second fundamental form.
/// Implicit surfaces require an ambient point within 1e-9 of the level set;
/// the tori accept either representation.
GeometrySample sample_geometry(const SurfaceSpec& spec, const SurfacePoint& where);

/// Deterministic retraction onto the surface (radial/affine for implicit
/// surfaces, per-circle normalization for the tori).
Eigen::VectorXd project_to_surface(const SurfaceSpec& spec, const Eigen::VectorXd& p);

/// Residual of the defining equation; zero (to rounding) on the surface.
double surface_residual(const SurfaceSpec& spec, const Eigen::VectorXd& p);

/// Documents the normal frame convention in force for a surface. Every scalar
/// consumed downstream is invariant under flipping any normal direction.
struct OrientationConvention {
  std::string rule;
  std::string detail;
};

OrientationConvention normal_orientation(const SurfaceSpec& spec);

/// Canonical one-line descriptor, e.g. "sphere:1" or "ellipsoid:1,1,1.5".
std::string surface_descriptor(const SurfaceSpec& spec);

}  // namespace newtonspec
