#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "doctest.h"
#include "newtonspec/assembly.hpp"
#include "oracles.hpp"

using namespace newtonspec;

namespace {

double rel_fro_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

bool bitwise_equal(const SparseSymMatrix& a, const SparseSymMatrix& b) {
  if (a.rows() != b.rows() || a.nonZeros() != b.nonZeros()) return false;
  return std::memcmp(a.valuePtr(), b.valuePtr(),
                     sizeof(double) * static_cast<size_t>(a.nonZeros())) == 0 &&
         std::memcmp(a.innerIndexPtr(), b.innerIndexPtr(),
                     sizeof(int) * static_cast<size_t>(a.nonZeros())) == 0;
}

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("order-0 stiffness reproduces the cotangent weights") {
  for (const auto& spec : {SurfaceSpec::sphere(2, 1.0), SurfaceSpec::flat_torus(1.0, 1.0)}) {
    const SimplicialMesh mesh = generate_mesh(spec, spec.parametric() ? 0 : 1);
    const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_stiffness(mesh, 0));
    const Eigen::MatrixXd ref = oracles::cotangent_stiffness(mesh);
    CHECK(rel_fro_diff(k, ref) <= 1e-10);
  }
}

TEST_CASE("constants span the stiffness kernel") {
  const double s2 = std::numbers::sqrt2 / 2.0;
  struct Case {
    SurfaceSpec spec;
    int r;
  };
  const Case cases[] = {{SurfaceSpec::sphere(2, 1.0), 0},
                        {SurfaceSpec::ellipsoid({1.0, 1.0, 1.5}), 0},
                        {SurfaceSpec::ellipsoid({1.0, 1.0, 1.0, 1.3}), 2},
                        {SurfaceSpec::flat_torus(1.0, 1.0), 0},
                        {SurfaceSpec::clifford_torus(s2, s2), 0}};
  for (const auto& c : cases) {
    const SimplicialMesh mesh = generate_mesh(c.spec, 1);
    const SparseSymMatrix k = assemble_stiffness(mesh, c.r);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.vertex_count());
    double scale = 0.0;
    for (int i = 0; i < k.rows(); ++i) scale = std::max(scale, std::abs(k.coeff(i, i)));
    CHECK((k * ones).cwiseAbs().maxCoeff() <= 1e-12 * scale);

    // positive semidefinite
    const Eigen::MatrixXd k_dense(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_dense);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * scale);
  }
}

TEST_CASE("unit 3-sphere order-2 operator coincides with the Laplacian") {
  // T^2 is the identity there, so both orders assemble the same bilinear form.
  const SimplicialMesh mesh = generate_mesh(SurfaceSpec::ellipsoid({1.0, 1.0, 1.0, 1.0}), 2);
  const Eigen::MatrixXd k0 = Eigen::MatrixXd(assemble_stiffness(mesh, 0));
  const Eigen::MatrixXd k2 = Eigen::MatrixXd(assemble_stiffness(mesh, 2));
  CHECK(rel_fro_diff(k2, k0) <= 1e-12);
}

TEST_CASE("mass matrices on a single reference triangle") {
  SimplicialMesh tri;
  tri.surface = SurfaceSpec::hyperplane_patch(2, 0.0);
  tri.dim = 2;
  tri.vertices = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)};
  tri.elements.push_back({0, 1, 2, 0});

  const double area = 0.5;
  Eigen::Matrix3d consistent_ref;
  consistent_ref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  consistent_ref *= area / 12.0;

  const Eigen::MatrixXd mc = Eigen::MatrixXd(assemble_mass(tri, MassType::Consistent));
  CHECK((mc - consistent_ref).cwiseAbs().maxCoeff() <= 1e-15);

  const Eigen::MatrixXd ml = Eigen::MatrixXd(assemble_mass(tri, MassType::Lumped));
  CHECK(ml.isApprox(Eigen::MatrixXd(Eigen::Vector3d::Constant(area / 3.0).asDiagonal()), 1e-15));
}

TEST_CASE("total mass equals the mesh measure") {
  for (const auto& spec :
       {SurfaceSpec::sphere(2, 1.0), SurfaceSpec::ellipsoid({1.0, 1.0, 1.0, 1.3}),
        SurfaceSpec::flat_torus(1.0, 2.0)}) {
    const SimplicialMesh mesh = generate_mesh(spec, 1);
    const double measure = total_measure(mesh);
    for (MassType t : {MassType::Lumped, MassType::Consistent}) {
      const SparseSymMatrix m = assemble_mass(mesh, t);
      double total = 0.0;
      for (int o = 0; o < m.outerSize(); ++o)
        for (SparseSymMatrix::InnerIterator it(m, o); it; ++it) total += it.value();
      CHECK(total == doctest::Approx(measure).epsilon(1e-12));
    }
    // lumped diagonal equals consistent row sums
    const Eigen::MatrixXd mc = Eigen::MatrixXd(assemble_mass(mesh, MassType::Consistent));
    const Eigen::MatrixXd ml = Eigen::MatrixXd(assemble_mass(mesh, MassType::Lumped));
    CHECK((mc.rowwise().sum() - ml.diagonal()).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("assembly is deterministic across thread counts") {
  const SimplicialMesh mesh = generate_mesh(SurfaceSpec::ellipsoid({1.0, 1.0, 1.0, 1.3}), 2);
  AssemblyOptions one;
  one.threads = 1;
  AssemblyOptions four;
  four.threads = 4;
  const SparseSymMatrix k1 = assemble_stiffness(mesh, 2, one);
  const SparseSymMatrix k4 = assemble_stiffness(mesh, 2, four);
  CHECK(bitwise_equal(k1, k4));
}

TEST_CASE("flat coefficient tensor is rejected") {
  // a flat patch has vanishing curvature, so the order-2 tensor is zero
  SimplicialMesh tet;
  tet.surface = SurfaceSpec::hyperplane_patch(3, 0.0);
  tet.dim = 3;
  tet.vertices = {Eigen::Vector4d(0, 0, 0, 0), Eigen::Vector4d(1, 0, 0, 0),
                  Eigen::Vector4d(0, 1, 0, 0), Eigen::Vector4d(0, 0, 1, 0)};
  tet.elements.push_back({0, 1, 2, 3});
  CHECK_THROWS_AS(assemble_stiffness(tet, 2), NotElliptic);
  CHECK_NOTHROW(assemble_stiffness(tet, 0));
}

TEST_CASE("order validation") {
  const SimplicialMesh mesh = generate_mesh(SurfaceSpec::sphere(2, 1.0), 0);
  CHECK_THROWS_AS(assemble_stiffness(mesh, 1), InvalidOrder);
  CHECK_THROWS_AS(assemble_stiffness(mesh, 2), InvalidOrder);  // r <= n-1 fails for n=2
  CHECK_THROWS_AS(assemble_stiffness(mesh, -2), InvalidOrder);
}

TEST_CASE("ellipticity scan margins") {
  const SimplicialMesh ico = generate_mesh(SurfaceSpec::sphere(2, 1.0), 2);
  const EllipticityScan s0 = ellipticity_scan(ico, 0);
  CHECK(s0.min_margin == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s0.trace_residual_max <= 1e-12);

  const SimplicialMesh ell = generate_mesh(SurfaceSpec::ellipsoid({1.0, 1.0, 1.0, 1.3}), 2);
  const EllipticityScan s2 = ellipticity_scan(ell, 2);
  CHECK(s2.min_margin > 0.5);
  CHECK(s2.min_margin < 0.7);
  CHECK(s2.trace_residual_max <= 1e-12);
  CHECK(s2.contraction_residual_max <= 1e-12);
  CHECK(s2.worst_point.size() == 4);
}

TEST_CASE("weak coordinate residual is exact on the structured torus") {
  const SimplicialMesh mesh = generate_mesh(SurfaceSpec::flat_torus(1.0, 1.0), 1);
  const WeakResidual w = weak_coordinate_residual(mesh, 0);
  CHECK(w.per_coordinate.size() == 4);
  CHECK(w.summary <= 1e-10);
}

TEST_CASE("weak coordinate residual shrinks under refinement") {
  double prev = 0.0;
  for (int lvl = 2; lvl <= 3; ++lvl) {
    const SimplicialMesh mesh = generate_mesh(SurfaceSpec::sphere(2, 1.0), lvl);
    const WeakResidual w = weak_coordinate_residual(mesh, 0);
    double l2 = 0.0;
    for (double v : w.per_coordinate) l2 += v * v;
    CHECK(w.summary == doctest::Approx(std::sqrt(l2)).epsilon(1e-13));
    if (lvl > 2) CHECK(w.summary < 0.7 * prev);
    prev = w.summary;
  }
}

TEST_CASE("matrix market export") {
  const SimplicialMesh mesh = generate_mesh(SurfaceSpec::sphere(2, 1.0), 0);
  const SparseSymMatrix k = assemble_stiffness(mesh, 0);
  const std::string path = "mm_test_out.mtx";
  write_matrix_market(k, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
  int rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  CHECK(rows == mesh.vertex_count());
  CHECK(cols == mesh.vertex_count());

  // reconstruct and compare against the assembled lower triangle
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(rows, cols);
  for (int e = 0; e < nnz; ++e) {
    int i = 0, j = 0;
    double v = 0.0;
    in >> i >> j >> v;
    REQUIRE(i >= j);  // lower triangle, 1-based
    dense(i - 1, j - 1) = v;
    dense(j - 1, i - 1) = v;
  }
  CHECK(rel_fro_diff(dense, Eigen::MatrixXd(k)) <= 1e-15);
  in.close();
  std::remove(path.c_str());

  CHECK_THROWS_AS(write_matrix_market(k, "no_such_dir/out.mtx"), ReportWriteError);
}

}  // TEST_SUITE
