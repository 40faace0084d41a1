#include "newtonspec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

namespace newtonspec {

namespace {

constexpr double kMinMeasure = 1e-14;
constexpr int kTorusBaseCells = 8;

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Positive orientation with respect to the origin: our implicit surfaces are
// star-shaped, so the vertex-coordinate determinant fixes a consistent
// orientation of the closed complex.  A negative element is fixed by swapping
// local vertices 0 and 2.  That transposition flips parity but keeps the
// {0,2}/{1,3} opposite-pair structure that tetrahedral refinement reads off
// local indices, so the refined point set is independent of the fixup.
void orient_by_origin(std::array<int, 4>& elem, const std::vector<Eigen::VectorXd>& verts,
                      int n) {
  Eigen::MatrixXd m(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) m.row(k) = verts[static_cast<size_t>(elem[static_cast<size_t>(k)])].transpose();
  if (m.determinant() < 0.0) std::swap(elem[0], elem[2]);
}

SimplicialMesh icosahedron_base(const SurfaceSpec& spec) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                            {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                            {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                            {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  SimplicialMesh mesh;
  mesh.surface = spec;
  mesh.dim = 2;
  mesh.vertices.reserve(12);
  for (const auto& v : raw) {
    Eigen::Vector3d u(v[0], v[1], v[2]);
    u.normalize();
    Eigen::VectorXd p(3);
    // radial point scaled onto the sphere/ellipsoid axis by axis
    for (int a = 0; a < 3; ++a)
      p[a] = u[a] * (spec.kind == SurfaceKind::Sphere ? spec.shape_params[0]
                                                      : spec.shape_params[static_cast<size_t>(a)]);
    mesh.vertices.push_back(p);
  }
  for (const auto& f : faces) {
    std::array<int, 4> e{f[0], f[1], f[2], -1};
    orient_by_origin(e, mesh.vertices, 2);
    mesh.elements.push_back(e);
  }
  return mesh;
}

SimplicialMesh cross_polytope_base(const SurfaceSpec& spec) {
  SimplicialMesh mesh;
  mesh.surface = spec;
  mesh.dim = 3;
  mesh.vertices.reserve(8);
  for (int a = 0; a < 4; ++a) {
    const double ax = spec.kind == SurfaceKind::Sphere ? spec.shape_params[0]
                                                       : spec.shape_params[static_cast<size_t>(a)];
    for (int s = 0; s < 2; ++s) {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(4);
      p[a] = (s == 0 ? ax : -ax);
      mesh.vertices.push_back(p);
    }
  }
  // one tetrahedron per sign pattern: vertices (+-e1, +-e2, +-e3, +-e4)
  for (int mask = 0; mask < 16; ++mask) {
    std::array<int, 4> e{0 + ((mask >> 0) & 1), 2 + ((mask >> 1) & 1), 4 + ((mask >> 2) & 1),
                         6 + ((mask >> 3) & 1)};
    orient_by_origin(e, mesh.vertices, 3);
    mesh.elements.push_back(e);
  }
  return mesh;
}

SimplicialMesh torus_grid(const SurfaceSpec& spec, int level) {
  const int m = kTorusBaseCells << level;
  const double step = 2.0 * std::numbers::pi / m;

  SimplicialMesh mesh;
  mesh.surface = spec;
  mesh.dim = 2;
  mesh.level = level;
  mesh.vertices.reserve(static_cast<size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const GeometrySample g =
          sample_geometry(spec, SurfacePoint::params(i * step, j * step));
      mesh.vertices.push_back(g.position);
    }
  auto vid = [m](int i, int j) { return (i % m) * m + (j % m); };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Eigen::Vector2d pa(i * step, j * step);
      const Eigen::Vector2d pb((i + 1) * step, j * step);
      const Eigen::Vector2d pc((i + 1) * step, (j + 1) * step);
      const Eigen::Vector2d pd(i * step, (j + 1) * step);
      mesh.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), -1});
      mesh.corner_params.push_back({pa, pb, pc});
      mesh.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), -1});
      mesh.corner_params.push_back({pa, pc, pd});
    }
  return mesh;
}

SimplicialMesh refine_triangles_implicit(const SimplicialMesh& mesh) {
  SimplicialMesh out;
  out.surface = mesh.surface;
  out.dim = mesh.dim;
  out.level = mesh.level + 1;
  out.vertices = mesh.vertices;

  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const Eigen::VectorXd p = project_to_surface(
        mesh.surface, 0.5 * (mesh.vertices[static_cast<size_t>(a)] + mesh.vertices[static_cast<size_t>(b)]));
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    midpoint.emplace(key, id);
    return id;
  };

  for (const auto& e : mesh.elements) {
    const int v0 = e[0], v1 = e[1], v2 = e[2];
    const int a = mid(v0, v1), b = mid(v0, v2), d = mid(v1, v2);
    for (std::array<int, 4> child :
         {std::array<int, 4>{v0, a, b, -1}, std::array<int, 4>{a, v1, d, -1},
          std::array<int, 4>{b, d, v2, -1}, std::array<int, 4>{a, d, b, -1}}) {
      orient_by_origin(child, out.vertices, 2);
      out.elements.push_back(child);
    }
  }
  return out;
}

SimplicialMesh refine_tetrahedra_implicit(const SimplicialMesh& mesh) {
  SimplicialMesh out;
  out.surface = mesh.surface;
  out.dim = mesh.dim;
  out.level = mesh.level + 1;
  out.vertices = mesh.vertices;

  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const Eigen::VectorXd p = project_to_surface(
        mesh.surface, 0.5 * (mesh.vertices[static_cast<size_t>(a)] + mesh.vertices[static_cast<size_t>(b)]));
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    midpoint.emplace(key, id);
    return id;
  };

  for (const auto& e : mesh.elements) {
    const int v0 = e[0], v1 = e[1], v2 = e[2], v3 = e[3];
    const int a = mid(v0, v1), b = mid(v0, v2), c = mid(v0, v3);
    const int d = mid(v1, v2), f = mid(v1, v3), g = mid(v2, v3);
    // Four corner children plus the octahedron split along the (b, f)
    // diagonal. Children keep this canonical vertex order up to the 0<->2
    // orientation swap: the next level's diagonal choice reads off local
    // indices, and any other reordering would scramble the asymptotic lattice
    // structure of the refined family.
    for (std::array<int, 4> child :
         {std::array<int, 4>{v0, a, b, c}, std::array<int, 4>{a, v1, d, f},
          std::array<int, 4>{b, d, v2, g}, std::array<int, 4>{c, f, g, v3},
          std::array<int, 4>{a, b, c, f}, std::array<int, 4>{a, b, d, f},
          std::array<int, 4>{b, c, f, g}, std::array<int, 4>{b, d, f, g}}) {
      orient_by_origin(child, out.vertices, 3);
      out.elements.push_back(child);
    }
  }
  return out;
}

double wrap_angle(double t) {
  const double period = 2.0 * std::numbers::pi;
  double w = std::fmod(t, period);
  if (w < 0) w += period;
  return w;
}

SimplicialMesh refine_parametric(const SimplicialMesh& mesh) {
  SimplicialMesh out;
  out.surface = mesh.surface;
  out.dim = mesh.dim;
  out.level = mesh.level + 1;
  out.vertices = mesh.vertices;

  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b, const Eigen::Vector2d& pm) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const GeometrySample g = sample_geometry(
        mesh.surface, SurfacePoint::params(wrap_angle(pm[0]), wrap_angle(pm[1])));
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(g.position);
    midpoint.emplace(key, id);
    return id;
  };

  for (size_t t = 0; t < mesh.elements.size(); ++t) {
    const auto& e = mesh.elements[t];
    const auto& cp = mesh.corner_params[t];
    const Eigen::Vector2d pab = 0.5 * (cp[0] + cp[1]);
    const Eigen::Vector2d pac = 0.5 * (cp[0] + cp[2]);
    const Eigen::Vector2d pbc = 0.5 * (cp[1] + cp[2]);
    const int a = mid(e[0], e[1], pab);
    const int b = mid(e[0], e[2], pac);
    const int d = mid(e[1], e[2], pbc);

    const std::array<std::array<int, 3>, 4> children = {{{e[0], a, b}, {a, e[1], d}, {b, d, e[2]}, {a, d, b}}};
    const std::array<std::array<Eigen::Vector2d, 3>, 4> params = {
        {{cp[0], pab, pac}, {pab, cp[1], pbc}, {pac, pbc, cp[2]}, {pab, pbc, pac}}};
    for (int k = 0; k < 4; ++k) {
      out.elements.push_back({children[static_cast<size_t>(k)][0], children[static_cast<size_t>(k)][1],
                              children[static_cast<size_t>(k)][2], -1});
      out.corner_params.push_back(params[static_cast<size_t>(k)]);
    }
  }
  return out;
}

}  // namespace

QuadratureRule simplex_quadrature(int order, int dim) {
  if (dim != 2 && dim != 3) throw InvalidInput("simplex_quadrature: dim must be 2 or 3");
  if (order != 1 && order != 2) throw InvalidInput("simplex_quadrature: order must be 1 or 2");

  QuadratureRule rule;
  rule.order = order;
  const int k = dim + 1;
  if (order == 1) {
    rule.points.push_back(Eigen::VectorXd::Constant(k, 1.0 / k));
    rule.weights.push_back(1.0);
    return rule;
  }
  if (dim == 2) {
    // edge midpoints, exact for quadratics
    for (int skip = 0; skip < 3; ++skip) {
      Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 0.5);
      p[skip] = 0.0;
      rule.points.push_back(p);
      rule.weights.push_back(1.0 / 3.0);
    }
    return rule;
  }
  // symmetric 4-point rule on the tetrahedron, exact for quadratics
  const double beta = (5.0 - std::sqrt(5.0)) / 20.0;
  const double alpha = 1.0 - 3.0 * beta;
  for (int corner = 0; corner < 4; ++corner) {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(4, beta);
    p[corner] = alpha;
    rule.points.push_back(p);
    rule.weights.push_back(0.25);
  }
  return rule;
}

SimplicialMesh generate_mesh(const SurfaceSpec& spec, int level) {
  spec.validate();
  if (level < 0) throw InvalidInput("generate_mesh: level must be nonnegative");

  switch (spec.kind) {
    case SurfaceKind::HyperplanePatch:
      throw Unsupported("generate_mesh: hyperplane patches are not meshable (not closed)");
    case SurfaceKind::FlatTorusR4:
    case SurfaceKind::CliffordTorusS3:
      return torus_grid(spec, level);
    case SurfaceKind::Sphere:
    case SurfaceKind::Ellipsoid: {
      SimplicialMesh mesh = spec.dim == 2 ? icosahedron_base(spec) : cross_polytope_base(spec);
      for (int l = 0; l < level; ++l) mesh = refine(mesh);
      mesh.level = level;
      return mesh;
    }
  }
  throw Unsupported("generate_mesh: unknown surface kind");
}

SimplicialMesh refine(const SimplicialMesh& mesh) {
  if (mesh.surface.parametric()) return refine_parametric(mesh);
  return mesh.dim == 2 ? refine_triangles_implicit(mesh) : refine_tetrahedra_implicit(mesh);
}

double element_measure(const SimplicialMesh& mesh, int element) {
  const auto& e = mesh.elements[static_cast<size_t>(element)];
  const int n = mesh.dim;
  const auto& v0 = mesh.vertices[static_cast<size_t>(e[0])];
  Eigen::MatrixXd edges(v0.size(), n);
  for (int k = 1; k <= n; ++k)
    edges.col(k - 1) = mesh.vertices[static_cast<size_t>(e[static_cast<size_t>(k)])] - v0;
  const double det = (edges.transpose() * edges).determinant();
  static const double kFact[4] = {1.0, 1.0, 2.0, 6.0};
  const double measure = std::sqrt(std::max(det, 0.0)) / kFact[n];
  if (!(measure > kMinMeasure))
    throw DegenerateElement("element_measure: vanishing simplex measure");
  return measure;
}

double total_measure(const SimplicialMesh& mesh) {
  double acc = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) acc += element_measure(mesh, e);
  return acc;
}

Eigen::VectorXd element_surface_point(const SimplicialMesh& mesh, int element,
                                      const Eigen::VectorXd& barycentric) {
  const auto& e = mesh.elements[static_cast<size_t>(element)];
  if (barycentric.size() != mesh.dim + 1)
    throw InvalidInput("element_surface_point: barycentric size mismatch");
  if (mesh.surface.parametric()) {
    const auto& cp = mesh.corner_params[static_cast<size_t>(element)];
    Eigen::Vector2d t = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) t += barycentric[k] * cp[static_cast<size_t>(k)];
    return sample_geometry(mesh.surface, SurfacePoint::params(t[0], t[1])).position;
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(mesh.vertices[0].size());
  for (int k = 0; k <= mesh.dim; ++k)
    p += barycentric[k] * mesh.vertices[static_cast<size_t>(e[static_cast<size_t>(k)])];
  return project_to_surface(mesh.surface, p);
}

GeometrySample element_sample(const SimplicialMesh& mesh, int element,
                              const Eigen::VectorXd& barycentric) {
  if (barycentric.size() != mesh.dim + 1)
    throw InvalidInput("element_sample: barycentric size mismatch");
  if (mesh.surface.parametric()) {
    const auto& cp = mesh.corner_params[static_cast<size_t>(element)];
    Eigen::Vector2d t = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) t += barycentric[k] * cp[static_cast<size_t>(k)];
    return sample_geometry(mesh.surface, SurfacePoint::params(t[0], t[1]));
  }
  return sample_geometry(mesh.surface,
                         SurfacePoint::ambient(element_surface_point(mesh, element, barycentric)));
}

void write_mesh(const SimplicialMesh& mesh, std::ostream& os) {
  const int coord_dim = static_cast<int>(mesh.vertices.empty() ? 0 : mesh.vertices[0].size());
  os << "newtonspec-mesh 1 " << mesh.dim << " " << coord_dim << " " << mesh.vertex_count() << " "
     << mesh.element_count() << "\n";
  char buf[40];
  for (const auto& v : mesh.vertices) {
    os << "v";
    for (int a = 0; a < v.size(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", v[a]);
      os << " " << buf;
    }
    os << "\n";
  }
  for (const auto& e : mesh.elements) {
    os << "s";
    for (int k = 0; k <= mesh.dim; ++k) os << " " << e[static_cast<size_t>(k)];
    os << "\n";
  }
}

void write_mesh(const SimplicialMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ReportWriteError("write_mesh: cannot open " + path);
  write_mesh(mesh, os);
  if (!os.good()) throw ReportWriteError("write_mesh: write failed for " + path);
}

void validate_closed(const SimplicialMesh& mesh) {
  std::map<std::array<int, 3>, int> face_count;
  const int n = mesh.dim;
  for (const auto& e : mesh.elements) {
    for (int skip = 0; skip <= n; ++skip) {
      std::array<int, 3> face{-1, -1, -1};
      int idx = 0;
      for (int k = 0; k <= n; ++k)
        if (k != skip) face[static_cast<size_t>(idx++)] = e[static_cast<size_t>(k)];
      std::sort(face.begin(), face.begin() + n);
      ++face_count[face];
    }
  }
  for (const auto& [face, count] : face_count)
    if (count != 2)
      throw InvalidInput("validate_closed: boundary or non-manifold face detected");
}

}  // namespace newtonspec
