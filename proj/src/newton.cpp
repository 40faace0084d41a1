#include "newtonspec/newton.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace newtonspec {

namespace {

constexpr double kFactorial[9] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320};

// Inner products <B_ij, B_kl> = sum_a h^a_ij h^a_kl, memoized over all index
// pairs of one sample.
class PairTable {
 public:
  explicit PairTable(const GeometrySample& s) : n_(s.dim()), data_(n_ * n_ * n_ * n_, 0.0) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l) {
            double v = 0.0;
            for (const auto& h : s.second_fundamental) v += h(i, j) * h(k, l);
            data_[((i * n_ + j) * n_ + k) * n_ + l] = v;
          }
  }

  double operator()(int i, int j, int k, int l) const {
    return data_[((i * n_ + j) * n_ + k) * n_ + l];
  }

 private:
  int n_;
  std::vector<double> data_;
};

// Visits every ordered tuple of `len` distinct entries drawn from `pool`.
template <class F>
void for_each_arrangement(const std::vector<int>& pool, int len, F&& fn) {
  std::vector<int> tup(static_cast<size_t>(len));
  std::vector<char> used(pool.size(), 0);
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == len) {
      fn(tup);
      return;
    }
    for (size_t p = 0; p < pool.size(); ++p) {
      if (used[p]) continue;
      used[p] = 1;
      tup[static_cast<size_t>(depth)] = pool[p];
      self(self, depth + 1);
      used[p] = 0;
    }
  };
  rec(rec, 0);
}

// Sign of the permutation carrying `from` onto `to` (distinct entries, equal sets).
int perm_sign(const std::vector<int>& from, const std::vector<int>& to) {
  const size_t k = from.size();
  int inversions = 0;
  std::vector<int> pos(k);
  for (size_t p = 0; p < k; ++p)
    pos[p] = static_cast<int>(std::find(from.begin(), from.end(), to[p]) - from.begin());
  for (size_t a = 0; a < k; ++a)
    for (size_t b = a + 1; b < k; ++b)
      if (pos[a] > pos[b]) ++inversions;
  return (inversions % 2 == 0) ? 1 : -1;
}

// One entry of T^r via the signed arrangement sum. The delta symbol restricts
// the lower tuple (I, i) to distinct indices and the upper tuple (J, j) to a
// permutation of it; the permutation sign is the symbol's value.
double tensor_entry(const PairTable& pt, int n, int r, int i, int j) {
  if (r == 0) return (i == j) ? 1.0 : 0.0;
  std::vector<int> pool_i;
  pool_i.reserve(static_cast<size_t>(n) - 1);
  for (int a = 0; a < n; ++a)
    if (a != i) pool_i.push_back(a);

  double acc = 0.0;
  for_each_arrangement(pool_i, r, [&](const std::vector<int>& I) {
    std::vector<int> base = I;
    base.push_back(i);
    if (std::find(base.begin(), base.end(), j) == base.end()) return;
    std::vector<int> pool_j;
    pool_j.reserve(base.size() - 1);
    for (int v : base)
      if (v != j) pool_j.push_back(v);
    for_each_arrangement(pool_j, r, [&](const std::vector<int>& J) {
      std::vector<int> target = J;
      target.push_back(j);
      double prod = static_cast<double>(perm_sign(base, target));
      for (int p = 0; p + 1 < r; p += 2) prod *= pt(I[p], J[p], I[p + 1], J[p + 1]);
      acc += prod;
    });
  });
  return acc / kFactorial[r];
}

double scalar_entry(const PairTable& pt, int n, int r) {
  if (r == 0) return 1.0;
  std::vector<int> pool(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) pool[static_cast<size_t>(a)] = a;

  double acc = 0.0;
  for_each_arrangement(pool, r, [&](const std::vector<int>& I) {
    for_each_arrangement(I, r, [&](const std::vector<int>& J) {
      double prod = static_cast<double>(perm_sign(I, J));
      for (int p = 0; p + 1 < r; p += 2) prod *= pt(I[p], J[p], I[p + 1], J[p + 1]);
      acc += prod;
    });
  });
  return acc / kFactorial[r];
}

int det_sign(std::vector<std::vector<int>> m) {
  // integer determinant by Laplace expansion; matrices are at most 33 x 33
  // in principle but tuples that long are rejected upstream.
  const size_t k = m.size();
  if (k == 0) return 1;
  if (k == 1) return m[0][0];
  int acc = 0;
  for (size_t c = 0; c < k; ++c) {
    if (m[0][c] == 0) continue;
    std::vector<std::vector<int>> minor(k - 1, std::vector<int>(k - 1));
    for (size_t a = 1; a < k; ++a) {
      size_t bc = 0;
      for (size_t b = 0; b < k; ++b) {
        if (b == c) continue;
        minor[a - 1][bc++] = m[a][b];
      }
    }
    const int term = m[0][c] * det_sign(minor);
    acc += (c % 2 == 0) ? term : -term;
  }
  return acc;
}

}  // namespace

int generalized_kronecker(const std::vector<int>& upper, const std::vector<int>& lower) {
  if (upper.size() != lower.size())
    throw InvalidIndex("generalized_kronecker: tuple lengths differ");
  if (upper.size() > 32) throw InvalidIndex("generalized_kronecker: tuple too long");
  for (int v : upper)
    if (v < 1) throw InvalidIndex("generalized_kronecker: indices are 1-based positive");
  for (int v : lower)
    if (v < 1) throw InvalidIndex("generalized_kronecker: indices are 1-based positive");

  const size_t k = upper.size();
  std::vector<std::vector<int>> m(k, std::vector<int>(k, 0));
  for (size_t p = 0; p < k; ++p)
    for (size_t q = 0; q < k; ++q) m[p][q] = (upper[p] == lower[q]) ? 1 : 0;
  return det_sign(std::move(m));
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double acc = 1.0;
  for (int i = 0; i < k; ++i) acc = acc * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return std::round(acc);
}

NewtonData newton_tensor(const GeometrySample& sample, int r) {
  const int n = sample.dim();
  if (r < 0 || r % 2 != 0 || r > n - 1)
    throw InvalidOrder("newton_tensor: need r even with 0 <= r <= n-1");

  const PairTable pt(sample);
  NewtonData nd;
  nd.order = r;
  nd.tensor.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = tensor_entry(pt, n, r, i, j);
      nd.tensor(i, j) = v;
      nd.tensor(j, i) = v;
    }
  nd.scalar = scalar_entry(pt, n, r);
  nd.mean_scalar = nd.scalar / binomial(n, r);

  const int codim = sample.codim();
  nd.next_vector = Eigen::VectorXd::Zero(codim);
  for (int a = 0; a < codim; ++a) {
    double acc = 0.0;
    const Eigen::MatrixXd& h = sample.second_fundamental[static_cast<size_t>(a)];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) acc += nd.tensor(i, j) * h(i, j);
    nd.next_vector[a] = acc / static_cast<double>(r + 1);
  }
  const double c_next = binomial(n, r + 1);
  nd.next_mean_norm2 = nd.next_vector.squaredNorm() / (c_next * c_next);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nd.tensor);
  nd.ellipticity_margin = es.eigenvalues().minCoeff();
  return nd;
}

MixedNewtonData mixed_newton_tensor(const GeometrySample& sample, int r_minus_1) {
  const int n = sample.dim();
  const int m = r_minus_1;
  if (m < 1 || m % 2 != 1 || m > n - 1)
    throw InvalidOrder("mixed_newton_tensor: need r-1 odd with 1 <= r-1 <= n-1");

  const PairTable pt(sample);
  MixedNewtonData md;
  md.order = m;
  md.tensors.assign(static_cast<size_t>(sample.codim()), Eigen::MatrixXd::Zero(n, n));

  for (int a = 0; a < sample.codim(); ++a) {
    const Eigen::MatrixXd& h = sample.second_fundamental[static_cast<size_t>(a)];
    Eigen::MatrixXd& out = md.tensors[static_cast<size_t>(a)];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        std::vector<int> pool_i;
        for (int b = 0; b < n; ++b)
          if (b != i) pool_i.push_back(b);
        double acc = 0.0;
        for_each_arrangement(pool_i, m, [&](const std::vector<int>& I) {
          std::vector<int> base = I;
          base.push_back(i);
          if (std::find(base.begin(), base.end(), j) == base.end()) return;
          std::vector<int> pool_j;
          for (int v : base)
            if (v != j) pool_j.push_back(v);
          for_each_arrangement(pool_j, m, [&](const std::vector<int>& J) {
            std::vector<int> target = J;
            target.push_back(j);
            double prod = static_cast<double>(perm_sign(base, target));
            for (int p = 0; p + 1 < m - 1; p += 2) prod *= pt(I[p], J[p], I[p + 1], J[p + 1]);
            prod *= h(I[m - 1], J[m - 1]);
            acc += prod;
          });
        });
        const double v = acc / kFactorial[m];
        out(i, j) = v;
        out(j, i) = v;
      }
  }
  return md;
}

double curvature_scalar(const GeometrySample& sample, int r) {
  const int n = sample.dim();
  if (r < 0 || r % 2 != 0 || r > n)
    throw InvalidOrder("curvature_scalar: need r even with 0 <= r <= n");
  const PairTable pt(sample);
  return scalar_entry(pt, n, r);
}

Eigen::MatrixXd hypersurface_newton_recursion(const Eigen::VectorXd& principal_curvatures,
                                              int r) {
  return hypersurface_newton_recursion(
      Eigen::MatrixXd(principal_curvatures.asDiagonal()), r);
}

Eigen::MatrixXd hypersurface_newton_recursion(const Eigen::MatrixXd& shape_operator, int r) {
  const int n = static_cast<int>(shape_operator.rows());
  if (shape_operator.cols() != n) throw InvalidInput("hypersurface_newton_recursion: not square");
  if (r < 0 || r > n - 1)
    throw InvalidOrder("hypersurface_newton_recursion: need 0 <= r <= n-1");

  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  for (int s = 1; s <= r; ++s) {
    const Eigen::MatrixXd PA = P * shape_operator;
    const double S_s = PA.trace() / static_cast<double>(s);  // Newton's identity
    P = S_s * Eigen::MatrixXd::Identity(n, n) - PA;
  }
  return P;
}

Eigen::MatrixXd ambient_pushforward(const GeometrySample& sample, const NewtonData& data) {
  return sample.tangent_frame * data.tensor * sample.tangent_frame.transpose();
}

}  // namespace newtonspec
