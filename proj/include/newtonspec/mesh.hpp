#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "newtonspec/surface.hpp"

namespace newtonspec {

/// Closed simplicial approximation of a catalog surface. Vertices lie on the
/// surface exactly (up to rounding); elements are flat n-simplices with
/// consistent orientation. Parametric meshes additionally carry chart
/// coordinates, stored per element corner in unwrapped form so barycentric
/// interpolation never crosses a period seam.
struct SimplicialMesh {
  SurfaceSpec surface;
  int dim = 2;    // n; elements have dim+1 vertices
  int level = 0;  // refinement generation
  std::vector<Eigen::VectorXd> vertices;
  std::vector<std::array<int, 4>> elements;  // first dim+1 entries valid
  std::vector<std::array<Eigen::Vector2d, 3>> corner_params;  // parametric only

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
};

/// Barycentric quadrature rule on the reference n-simplex; weights sum to 1.
struct QuadratureRule {
  int order = 1;
  std::vector<Eigen::VectorXd> points;  // barycentric, dim+1 entries
  std::vector<double> weights;
};

/// Midpoint rule (order 1) or a symmetric rule exact for quadratics (order 2).
QuadratureRule simplex_quadrature(int order, int dim);

/// Base discretizations: icosphere for n = 2 implicit surfaces, the boundary
/// complex of the 16-cell for n = 3, structured periodic grids for the tori.
SimplicialMesh generate_mesh(const SurfaceSpec& spec, int level);

/// One uniform refinement: edge midpoints projected back to the surface
/// (implicit) or evaluated from chart midpoints (parametric).
SimplicialMesh refine(const SimplicialMesh& mesh);

/// Flat n-simplex measure sqrt(det G)/n! from the edge Gram matrix.
double element_measure(const SimplicialMesh& mesh, int element);

double total_measure(const SimplicialMesh& mesh);

/// Geometry of the surface point associated with a barycentric location in an
/// element: chart interpolation for parametric meshes, ambient interpolation
/// plus projection for implicit ones.
GeometrySample element_sample(const SimplicialMesh& mesh, int element,
                              const Eigen::VectorXd& barycentric);

/// The on-surface point used by element_sample, without the frame build.
Eigen::VectorXd element_surface_point(const SimplicialMesh& mesh, int element,
                                      const Eigen::VectorXd& barycentric);

/// Plain-text export: header "newtonspec-mesh 1 <n> <coord_dim> <V> <E>",
/// then one "v x..." line per vertex and one "s i..." line per element.
void write_mesh(const SimplicialMesh& mesh, std::ostream& os);
void write_mesh(const SimplicialMesh& mesh, const std::string& path);

/// Throws if some (n-1)-face is not shared by exactly two elements.
void validate_closed(const SimplicialMesh& mesh);

}  // namespace newtonspec
