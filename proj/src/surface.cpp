#include "newtonspec/surface.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace newtonspec {

namespace {

constexpr double kOnSurfaceTol = 1e-9;
constexpr double kFramePivot = 1e-12;

std::string fmt_param(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Orthonormal completion: runs over the canonical basis, removes the span of
// `fixed` and previously accepted vectors, keeps the first `count` survivors.
Eigen::MatrixXd gram_schmidt_complement(const Eigen::MatrixXd& fixed, int count) {
  const int d = static_cast<int>(fixed.rows());
  Eigen::MatrixXd out(d, count);
  int accepted = 0;
  for (int k = 0; k < d && accepted < count; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(d, k);
    for (int c = 0; c < fixed.cols(); ++c) v -= fixed.col(c).dot(v) * fixed.col(c);
    for (int c = 0; c < accepted; ++c) v -= out.col(c).dot(v) * out.col(c);
    // second sweep for orthogonality at working precision
    for (int c = 0; c < fixed.cols(); ++c) v -= fixed.col(c).dot(v) * fixed.col(c);
    for (int c = 0; c < accepted; ++c) v -= out.col(c).dot(v) * out.col(c);
    const double nrm = v.norm();
    if (nrm < kFramePivot) continue;
    out.col(accepted++) = v / nrm;
  }
  if (accepted < count)
    throw DegenerateFrame("gram_schmidt_complement: pivot underflow before frame complete");
  return out;
}

struct ImplicitShape {
  // F(x) = sum (x_A / a_A)^2, surface = {F = 1}; hyperplane handled separately.
  Eigen::VectorXd inv_axes_sq;  // 1 / a_A^2
};

ImplicitShape implicit_shape(const SurfaceSpec& spec) {
  ImplicitShape s;
  const int d = spec.embed_dim();
  s.inv_axes_sq.resize(d);
  if (spec.kind == SurfaceKind::Sphere) {
    const double r = spec.shape_params.at(0);
    s.inv_axes_sq.setConstant(1.0 / (r * r));
  } else {
    for (int a = 0; a < d; ++a) {
      const double ax = spec.shape_params.at(a);
      s.inv_axes_sq[a] = 1.0 / (ax * ax);
    }
  }
  return s;
}

GeometrySample sample_implicit(const SurfaceSpec& spec, const Eigen::VectorXd& p) {
  const int d = spec.embed_dim();
  const int n = spec.dim;
  if (p.size() != d) throw InvalidInput("sample_geometry: ambient point has wrong dimension");

  GeometrySample g;
  g.position = p;

  if (spec.kind == SurfaceKind::HyperplanePatch) {
    const double offset = spec.shape_params.empty() ? 0.0 : spec.shape_params[0];
    if (std::abs(p[d - 1] - offset) > kOnSurfaceTol)
      throw OffSurface("sample_geometry: point not on hyperplane");
    g.tangent_frame = Eigen::MatrixXd::Identity(d, d).leftCols(n);
    g.normal_frame = Eigen::MatrixXd::Identity(d, d).rightCols(1);
    g.second_fundamental.assign(1, Eigen::MatrixXd::Zero(n, n));
    return g;
  }

  const ImplicitShape shape = implicit_shape(spec);
  const double f = p.cwiseProduct(shape.inv_axes_sq.cwiseProduct(p)).sum();
  if (std::abs(f - 1.0) > kOnSurfaceTol)
    throw OffSurface("sample_geometry: level-set residual " + fmt_param(f - 1.0));

  // grad F = 2 x_A / a_A^2, Hess F = 2 diag(1/a_A^2).
  Eigen::VectorXd grad = 2.0 * shape.inv_axes_sq.cwiseProduct(p);
  const double grad_norm = grad.norm();
  if (grad_norm < kFramePivot) throw DegenerateFrame("sample_geometry: vanishing gradient");

  // Inward unit normal: the unit sphere then carries h = +I.
  Eigen::VectorXd nu = -grad / grad_norm;
  g.normal_frame = nu;
  g.tangent_frame = gram_schmidt_complement(g.normal_frame, n);

  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v =
          2.0 * g.tangent_frame.col(i).dot(shape.inv_axes_sq.cwiseProduct(g.tangent_frame.col(j))) /
          grad_norm;
      h(i, j) = v;
      h(j, i) = v;
    }
  g.second_fundamental.assign(1, std::move(h));
  return g;
}

struct TorusCoords {
  double u, v;
};

TorusCoords torus_params_from_point(const SurfaceSpec& spec, const Eigen::VectorXd& p) {
  if (p.size() != 4) throw InvalidInput("sample_geometry: torus point must be 4-dimensional");
  const double r1 = spec.shape_params[0];
  const double r2 = spec.shape_params[1];
  const double rho1 = std::hypot(p[0], p[1]);
  const double rho2 = std::hypot(p[2], p[3]);
  if (std::abs(rho1 - r1) > kOnSurfaceTol * std::max(1.0, r1) ||
      std::abs(rho2 - r2) > kOnSurfaceTol * std::max(1.0, r2))
    throw OffSurface("sample_geometry: point not on torus");
  return {std::atan2(p[1], p[0]), std::atan2(p[3], p[2])};
}

GeometrySample sample_torus(const SurfaceSpec& spec, const TorusCoords& c) {
  const double r1 = spec.shape_params[0];
  const double r2 = spec.shape_params[1];
  const double cu = std::cos(c.u), su = std::sin(c.u);
  const double cv = std::cos(c.v), sv = std::sin(c.v);

  GeometrySample g;
  g.position.resize(4);
  g.position << r1 * cu, r1 * su, r2 * cv, r2 * sv;
  g.tangent_frame.resize(4, 2);
  g.tangent_frame.col(0) << -su, cu, 0.0, 0.0;
  g.tangent_frame.col(1) << 0.0, 0.0, -sv, cv;
  g.measure_weight = r1 * r2;

  if (spec.kind == SurfaceKind::FlatTorusR4) {
    // Normals point toward each factor circle's axis, matching the inward
    // convention used for the spheres.
    g.normal_frame.resize(4, 2);
    g.normal_frame.col(0) << -cu, -su, 0.0, 0.0;
    g.normal_frame.col(1) << 0.0, 0.0, -cv, -sv;
    Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(2, 2);
    Eigen::MatrixXd h2 = Eigen::MatrixXd::Zero(2, 2);
    h1(0, 0) = 1.0 / r1;
    h2(1, 1) = 1.0 / r2;
    g.second_fundamental = {h1, h2};
  } else {
    // Within-sphere unit normal, orthogonal to the radial direction.
    g.normal_frame.resize(4, 1);
    g.normal_frame << r2 * cu, r2 * su, -r1 * cv, -r1 * sv;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
    h(0, 0) = -r2 / r1;
    h(1, 1) = r1 / r2;
    g.second_fundamental = {h};
  }
  return g;
}

}  // namespace

Eigen::VectorXd GeometrySample::curvature_vector(int i, int j) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(embed_dim());
  for (int a = 0; a < codim(); ++a) b += second_fundamental[a](i, j) * normal_frame.col(a);
  return b;
}

SurfacePoint SurfacePoint::params(double u, double v) {
  SurfacePoint w;
  w.chart = Eigen::Vector2d(u, v);
  return w;
}

SurfacePoint SurfacePoint::ambient(Eigen::VectorXd p) {
  SurfacePoint w;
  w.point = std::move(p);
  return w;
}

SurfaceSpec SurfaceSpec::sphere(int n, double radius) {
  SurfaceSpec s;
  s.kind = SurfaceKind::Sphere;
  s.dim = n;
  s.shape_params = {radius};
  s.ambient = {0, n + 1};
  s.validate();
  return s;
}

SurfaceSpec SurfaceSpec::ellipsoid(std::vector<double> semi_axes) {
  SurfaceSpec s;
  s.kind = SurfaceKind::Ellipsoid;
  s.dim = static_cast<int>(semi_axes.size()) - 1;
  s.shape_params = std::move(semi_axes);
  s.ambient = {0, s.dim + 1};
  s.validate();
  return s;
}

SurfaceSpec SurfaceSpec::flat_torus(double r1, double r2) {
  SurfaceSpec s;
  s.kind = SurfaceKind::FlatTorusR4;
  s.dim = 2;
  s.shape_params = {r1, r2};
  s.ambient = {0, 4};
  s.validate();
  return s;
}

SurfaceSpec SurfaceSpec::clifford_torus(double r1, double r2) {
  SurfaceSpec s;
  s.kind = SurfaceKind::CliffordTorusS3;
  s.dim = 2;
  s.shape_params = {r1, r2};
  s.ambient = {1, 3};
  s.validate();
  return s;
}

SurfaceSpec SurfaceSpec::hyperplane_patch(int n, double offset) {
  SurfaceSpec s;
  s.kind = SurfaceKind::HyperplanePatch;
  s.dim = n;
  s.shape_params = {offset};
  s.ambient = {0, n + 1};
  s.validate();
  return s;
}

void SurfaceSpec::validate() const {
  if (ambient.curvature != 0 && ambient.curvature != 1)
    throw Unsupported("SurfaceSpec: ambient curvature must be 0 or 1");
  if (dim < 2 || dim >= ambient.ambient_dim)
    throw Unsupported("SurfaceSpec: need 2 <= dim < ambient_dim");

  auto require = [](bool ok, const char* msg) {
    if (!ok) throw Unsupported(std::string("SurfaceSpec: ") + msg);
  };
  auto positive = [&](size_t count) {
    if (shape_params.size() != count)
      throw InvalidInput("SurfaceSpec: wrong shape parameter count");
    for (double v : shape_params)
      if (!(v > 0.0)) throw InvalidInput("SurfaceSpec: shape parameters must be positive");
  };

  switch (kind) {
    case SurfaceKind::Sphere:
      require(ambient.curvature == 0 && (dim == 2 || dim == 3) && ambient.ambient_dim == dim + 1,
              "sphere requires flat ambient and n in {2,3}");
      positive(1);
      break;
    case SurfaceKind::Ellipsoid:
      require(ambient.curvature == 0 && (dim == 2 || dim == 3) && ambient.ambient_dim == dim + 1,
              "ellipsoid requires flat ambient and n in {2,3}");
      positive(static_cast<size_t>(dim) + 1);
      break;
    case SurfaceKind::FlatTorusR4:
      require(ambient.curvature == 0 && dim == 2 && ambient.ambient_dim == 4,
              "flat torus lives in R^4");
      positive(2);
      break;
    case SurfaceKind::CliffordTorusS3: {
      require(ambient.curvature == 1 && dim == 2 && ambient.ambient_dim == 3,
              "Clifford torus lives in S^3");
      positive(2);
      const double r1 = shape_params[0], r2 = shape_params[1];
      if (std::abs(r1 * r1 + r2 * r2 - 1.0) > 1e-12)
        throw InvalidInput("SurfaceSpec: Clifford torus needs r1^2 + r2^2 = 1");
      break;
    }
    case SurfaceKind::HyperplanePatch:
      require(ambient.curvature == 0 && (dim == 2 || dim == 3) && ambient.ambient_dim == dim + 1,
              "hyperplane patch requires flat ambient and n in {2,3}");
      if (shape_params.size() > 1)
        throw InvalidInput("SurfaceSpec: hyperplane patch takes at most one offset");
      break;
  }
}

GeometrySample sample_geometry(const SurfaceSpec& spec, const SurfacePoint& where) {
  spec.validate();
  if (spec.parametric()) {
    if (where.chart) return sample_torus(spec, {(*where.chart)[0], (*where.chart)[1]});
    if (where.point) return sample_torus(spec, torus_params_from_point(spec, *where.point));
    throw InvalidInput("sample_geometry: empty surface point");
  }
  if (!where.point)
    throw InvalidInput("sample_geometry: implicit surfaces require an ambient point");
  return sample_implicit(spec, *where.point);
}

Eigen::VectorXd project_to_surface(const SurfaceSpec& spec, const Eigen::VectorXd& p) {
  spec.validate();
  const int d = spec.embed_dim();
  if (p.size() != d) throw InvalidInput("project_to_surface: wrong dimension");

  switch (spec.kind) {
    case SurfaceKind::HyperplanePatch: {
      Eigen::VectorXd q = p;
      q[d - 1] = spec.shape_params.empty() ? 0.0 : spec.shape_params[0];
      return q;
    }
    case SurfaceKind::Sphere:
    case SurfaceKind::Ellipsoid: {
      const ImplicitShape shape = implicit_shape(spec);
      Eigen::VectorXd q = shape.inv_axes_sq.cwiseSqrt().cwiseProduct(p);
      const double nrm = q.norm();
      if (nrm < kFramePivot) throw OffSurface("project_to_surface: cannot project the center");
      q /= nrm;
      return q.cwiseQuotient(shape.inv_axes_sq.cwiseSqrt());
    }
    case SurfaceKind::FlatTorusR4:
    case SurfaceKind::CliffordTorusS3: {
      const double r1 = spec.shape_params[0];
      const double r2 = spec.shape_params[1];
      const double rho1 = std::hypot(p[0], p[1]);
      const double rho2 = std::hypot(p[2], p[3]);
      if (rho1 < kFramePivot || rho2 < kFramePivot)
        throw OffSurface("project_to_surface: point on a torus axis");
      Eigen::VectorXd q(4);
      q << p[0] * r1 / rho1, p[1] * r1 / rho1, p[2] * r2 / rho2, p[3] * r2 / rho2;
      return q;
    }
  }
  throw Unsupported("project_to_surface: unknown surface kind");
}

double surface_residual(const SurfaceSpec& spec, const Eigen::VectorXd& p) {
  switch (spec.kind) {
    case SurfaceKind::HyperplanePatch:
      return p[p.size() - 1] - (spec.shape_params.empty() ? 0.0 : spec.shape_params[0]);
    case SurfaceKind::Sphere:
    case SurfaceKind::Ellipsoid: {
      const ImplicitShape shape = implicit_shape(spec);
      return p.cwiseProduct(shape.inv_axes_sq.cwiseProduct(p)).sum() - 1.0;
    }
    case SurfaceKind::FlatTorusR4:
    case SurfaceKind::CliffordTorusS3: {
      const double d1 = std::hypot(p[0], p[1]) - spec.shape_params[0];
      const double d2 = std::hypot(p[2], p[3]) - spec.shape_params[1];
      return std::sqrt(d1 * d1 + d2 * d2);
    }
  }
  throw Unsupported("surface_residual: unknown surface kind");
}

OrientationConvention normal_orientation(const SurfaceSpec& spec) {
  switch (spec.kind) {
    case SurfaceKind::Sphere:
    case SurfaceKind::Ellipsoid:
      return {"inward-hypersurface",
              "normal opposes the level-set gradient; unit sphere carries h = +I and convex "
              "shapes have positive mean curvature"};
    case SurfaceKind::HyperplanePatch:
      return {"last-axis", "flat patch, orientation immaterial (h = 0)"};
    case SurfaceKind::FlatTorusR4:
      return {"factor-circle-inward",
              "one normal per factor circle, pointing at the circle's axis; every even-order "
              "scalar is invariant under flipping either normal"};
    case SurfaceKind::CliffordTorusS3:
      return {"within-sphere-analytic",
              "single normal tangent to S^3 and orthogonal to the radial direction; scalars "
              "consumed downstream are flip-invariant"};
  }
  throw Unsupported("normal_orientation: unknown surface kind");
}

std::string surface_descriptor(const SurfaceSpec& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case SurfaceKind::Sphere:
      os << "sphere";
      break;
    case SurfaceKind::Ellipsoid:
      os << "ellipsoid";
      break;
    case SurfaceKind::FlatTorusR4:
      os << "flattorus";
      break;
    case SurfaceKind::CliffordTorusS3:
      os << "cliffordtorus";
      break;
    case SurfaceKind::HyperplanePatch:
      os << "hyperplane";
      break;
  }
  os << ":";
  for (size_t i = 0; i < spec.shape_params.size(); ++i) {
    if (i) os << ",";
    os << fmt_param(spec.shape_params[i]);
  }
  return os.str();
}

}  // namespace newtonspec
