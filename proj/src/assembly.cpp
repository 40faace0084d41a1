#include "newtonspec/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

namespace newtonspec {

namespace {

struct ElementFrame {
  Eigen::MatrixXd edges;      // D x n
  Eigen::MatrixXd gram_inv;   // n x n
  Eigen::MatrixXd gradients;  // D x (n+1), P1 hat gradients in the element plane
  double measure = 0.0;
};

ElementFrame element_frame(const SimplicialMesh& mesh, int element) {
  const auto& e = mesh.elements[static_cast<size_t>(element)];
  const int n = mesh.dim;
  const auto& v0 = mesh.vertices[static_cast<size_t>(e[0])];
  const int d = static_cast<int>(v0.size());

  ElementFrame fr;
  fr.edges.resize(d, n);
  for (int k = 1; k <= n; ++k)
    fr.edges.col(k - 1) = mesh.vertices[static_cast<size_t>(e[static_cast<size_t>(k)])] - v0;
  const Eigen::MatrixXd gram = fr.edges.transpose() * fr.edges;
  const double det = gram.determinant();
  static const double kFact[4] = {1.0, 1.0, 2.0, 6.0};
  fr.measure = std::sqrt(std::max(det, 0.0)) / kFact[n];
  if (!(fr.measure > 1e-14)) throw DegenerateElement("assembly: vanishing simplex measure");
  fr.gram_inv = gram.inverse();

  fr.gradients.resize(d, n + 1);
  fr.gradients.rightCols(n) = fr.edges * fr.gram_inv;
  fr.gradients.col(0) = -fr.gradients.rightCols(n).rowwise().sum();
  return fr;
}

// Rotation carrying the analytic tangent frame into the element plane: polar
// factor of the projected frame. Keeps the pushforward congruent to T^r, so
// definiteness survives and r = 0 collapses to the plain element projector.
Eigen::MatrixXd aligned_frame(const ElementFrame& fr, const Eigen::MatrixXd& tangent_frame) {
  const Eigen::MatrixXd w =
      fr.edges * (fr.gram_inv * (fr.edges.transpose() * tangent_frame));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() < 1e-8)
    throw DegenerateFrame("assembly: tangent plane nearly orthogonal to element plane");
  return svd.matrixU() * svd.matrixV().transpose();
}

struct ChunkResult {
  std::vector<Eigen::Triplet<double>> triplets;
  double min_margin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd worst_point;
  std::exception_ptr error;
};

void assemble_chunk(const SimplicialMesh& mesh, int r, const QuadratureRule& rule, int begin,
                    int end, ChunkResult& out) {
  try {
    const int n = mesh.dim;
    for (int el = begin; el < end; ++el) {
      const ElementFrame fr = element_frame(mesh, el);
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n + 1, n + 1);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const GeometrySample g = element_sample(mesh, el, rule.points[q]);
        const NewtonData nd = newton_tensor(g, r);
        if (nd.ellipticity_margin < out.min_margin) {
          out.min_margin = nd.ellipticity_margin;
          out.worst_point = g.position;
        }
        const Eigen::MatrixXd rot = aligned_frame(fr, g.tangent_frame);
        const Eigen::MatrixXd t_eff = rot * nd.tensor * rot.transpose();
        const double scale = rule.weights[q] * fr.measure;
        const Eigen::MatrixXd th = t_eff * fr.gradients;
        for (int a = 0; a <= n; ++a)
          for (int b = a; b <= n; ++b) {
            const double v = scale * fr.gradients.col(a).dot(th.col(b));
            local(a, b) += v;
            if (a != b) local(b, a) += v;
          }
      }
      const auto& e = mesh.elements[static_cast<size_t>(el)];
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
          out.triplets.emplace_back(e[static_cast<size_t>(a)], e[static_cast<size_t>(b)],
                                    local(a, b));
    }
  } catch (...) {
    out.error = std::current_exception();
  }
}

}  // namespace

SparseSymMatrix assemble_stiffness(const SimplicialMesh& mesh, int r,
                                   const AssemblyOptions& opts) {
  const int n = mesh.dim;
  if (r < 0 || r % 2 != 0 || r > n - 1)
    throw InvalidOrder("assemble_stiffness: need r even with 0 <= r <= n-1");
  const QuadratureRule rule = simplex_quadrature(opts.quadrature_order, n);

  const int count = mesh.element_count();
  const int threads = std::max(1, std::min(opts.threads, count));
  std::vector<ChunkResult> chunks(static_cast<size_t>(threads));
  if (threads == 1) {
    assemble_chunk(mesh, r, rule, 0, count, chunks[0]);
  } else {
    std::vector<std::thread> pool;
    const int per = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * per;
      const int end = std::min(count, begin + per);
      pool.emplace_back(assemble_chunk, std::cref(mesh), r, std::cref(rule), begin, end,
                        std::ref(chunks[static_cast<size_t>(t)]));
    }
    for (auto& th : pool) th.join();
  }

  // merge in chunk order so the triplet sequence is independent of the
  // thread count; rethrow the earliest failure deterministically
  std::vector<Eigen::Triplet<double>> triplets;
  double min_margin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd worst_point;
  for (const auto& c : chunks) {
    if (c.error) std::rethrow_exception(c.error);
    triplets.insert(triplets.end(), c.triplets.begin(), c.triplets.end());
    if (c.min_margin < min_margin) {
      min_margin = c.min_margin;
      worst_point = c.worst_point;
    }
  }
  if (!(min_margin > 0.0))
    throw NotElliptic("assemble_stiffness: coefficient tensor not positive definite",
                      worst_point, min_margin);

  SparseSymMatrix k(mesh.vertex_count(), mesh.vertex_count());
  k.setFromTriplets(triplets.begin(), triplets.end());
  k.makeCompressed();
  return k;
}

SparseSymMatrix assemble_mass(const SimplicialMesh& mesh, MassType type) {
  const int n = mesh.dim;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(mesh.element_count()) * (n + 1) * (n + 1));
  for (int el = 0; el < mesh.element_count(); ++el) {
    const double measure = element_measure(mesh, el);
    const auto& e = mesh.elements[static_cast<size_t>(el)];
    if (type == MassType::Lumped) {
      const double v = measure / (n + 1);
      for (int a = 0; a <= n; ++a)
        triplets.emplace_back(e[static_cast<size_t>(a)], e[static_cast<size_t>(a)], v);
    } else {
      const double unit = measure / static_cast<double>((n + 1) * (n + 2));
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
          triplets.emplace_back(e[static_cast<size_t>(a)], e[static_cast<size_t>(b)],
                                (a == b ? 2.0 : 1.0) * unit);
    }
  }
  SparseSymMatrix m(mesh.vertex_count(), mesh.vertex_count());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

EllipticityScan ellipticity_scan(const SimplicialMesh& mesh, int r, int quadrature_order) {
  const int n = mesh.dim;
  if (r < 0 || r % 2 != 0 || r > n - 1)
    throw InvalidOrder("ellipticity_scan: need r even with 0 <= r <= n-1");
  const QuadratureRule rule = simplex_quadrature(quadrature_order, n);

  EllipticityScan scan;
  scan.min_margin = std::numeric_limits<double>::infinity();
  for (int el = 0; el < mesh.element_count(); ++el)
    for (const auto& point : rule.points) {
      const GeometrySample g = element_sample(mesh, el, point);
      const NewtonData nd = newton_tensor(g, r);
      if (nd.ellipticity_margin < scan.min_margin) {
        scan.min_margin = nd.ellipticity_margin;
        scan.worst_point = g.position;
      }
      const double trace_res = std::abs(nd.tensor.trace() - (n - r) * nd.scalar);
      scan.trace_residual_max = std::max(scan.trace_residual_max, trace_res);
      if (r >= 2) {
        const MixedNewtonData md = mixed_newton_tensor(g, r - 1);
        double contracted = 0.0;
        for (int a = 0; a < g.codim(); ++a)
          contracted += (md.tensors[static_cast<size_t>(a)].array() *
                         g.second_fundamental[static_cast<size_t>(a)].array())
                            .sum();
        contracted /= static_cast<double>(r);
        scan.contraction_residual_max =
            std::max(scan.contraction_residual_max, std::abs(contracted - nd.scalar));
      }
    }
  return scan;
}

WeakResidual weak_coordinate_residual(const SimplicialMesh& mesh, int r,
                                      const AssemblyOptions& opts, MassType mass) {
  const SparseSymMatrix k = assemble_stiffness(mesh, r, opts);
  const SparseSymMatrix m = assemble_mass(mesh, mass);
  const int vcount = mesh.vertex_count();
  const int d = static_cast<int>(mesh.vertices[0].size());
  const int n = mesh.dim;
  const int c = mesh.surface.ambient.curvature;

  Eigen::MatrixXd coords(vcount, d);
  Eigen::MatrixXd rhs(vcount, d);
  for (int v = 0; v < vcount; ++v) {
    const Eigen::VectorXd& x = mesh.vertices[static_cast<size_t>(v)];
    const GeometrySample g = sample_geometry(mesh.surface, SurfacePoint::ambient(x));
    const NewtonData nd = newton_tensor(g, r);
    const Eigen::VectorXd next_ambient = g.normal_frame * nd.next_vector;
    coords.row(v) = x.transpose();
    rhs.row(v) =
        ((r + 1) * next_ambient - static_cast<double>(c * (n - r)) * nd.scalar * x).transpose();
  }

  Eigen::SimplicialLDLT<SparseSymMatrix> mass_solver(m);
  if (mass_solver.info() != Eigen::Success)
    throw InvalidMass("weak_coordinate_residual: mass matrix not SPD");

  WeakResidual res;
  res.per_coordinate.resize(static_cast<size_t>(d));
  double acc = 0.0;
  for (int a = 0; a < d; ++a) {
    const Eigen::VectorXd rho = k * coords.col(a) + m * rhs.col(a);
    const double norm2 = rho.dot(mass_solver.solve(rho));
    const double value = std::sqrt(std::max(norm2, 0.0));
    res.per_coordinate[static_cast<size_t>(a)] = value;
    acc += value * value;
  }
  res.summary = std::sqrt(acc);
  return res;
}

void write_matrix_market(const SparseSymMatrix& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ReportWriteError("write_matrix_market: cannot open " + path);
  std::vector<Eigen::Triplet<double>> lower;
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseSymMatrix::InnerIterator it(m, col); it; ++it)
      if (it.row() >= it.col()) lower.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << m.rows() << " " << m.cols() << " " << lower.size() << "\n";
  char buf[40];
  for (const auto& t : lower) {
    std::snprintf(buf, sizeof buf, "%.17g", t.value());
    os << (t.row() + 1) << " " << (t.col() + 1) << " " << buf << "\n";
  }
  if (!os.good()) throw ReportWriteError("write_matrix_market: write failed for " + path);
}

}  // namespace newtonspec
