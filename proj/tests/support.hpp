#pragma once

// Helpers shared by the unit tests. Generators here use their own engine so
// that test inputs do not depend on the library's random source.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "opensub/subspace.hpp"

namespace testing {

using opensub::Complex;
using opensub::Matrix;
using opensub::Vector;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  // [lo, hi]
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double real(double lo = -1.0, double hi = 1.0) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  Complex complex() { return {real(), real()}; }
  Matrix matrix(Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = complex();
    return m;
  }
  Vector vector(Eigen::Index n) { return matrix(n, 1).col(0); }
  Matrix hermitian(Eigen::Index n) {
    const Matrix g = matrix(n, n);
    return 0.5 * (g + g.adjoint());
  }
  Matrix unitary(Eigen::Index n) {
    Eigen::HouseholderQR<Matrix> qr(matrix(n, n));
    return qr.householderQ() * Matrix::Identity(n, n);
  }

 private:
  std::mt19937_64 engine_;
};

// Orthonormal basis of the column span via SVD: an oracle independent of the
// library's Gram-Schmidt.
inline Matrix span_basis(const Matrix& m, double rel = 1e-10) {
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cut = rel * std::max(1.0, s.size() ? s(0) : 0.0);
  const Eigen::Index r = (s.array() > cut).count();
  return svd.matrixU().leftCols(r);
}

// ||P_a - P_b||_2 formed from explicit dense projectors.
inline double dense_projector_distance(const Matrix& qa, const Matrix& qb) {
  const Matrix d = qa * qa.adjoint() - qb * qb.adjoint();
  if (d.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Krylov matrix [S, AS, ..., A^(n-1) S] reduced to an orthonormal basis,
// scaling each block to unit norm to keep powers comparable.
inline Matrix brute_orbit(const Matrix& a, const Matrix& seed) {
  const Eigen::Index n = a.rows();
  if (seed.cols() == 0) return Matrix(n, 0);
  Matrix k(n, seed.cols() * n);
  Matrix block = seed;
  for (Eigen::Index p = 0; p < n; ++p) {
    k.middleCols(p * seed.cols(), seed.cols()) = block;
    block = a * block;
    const double s = block.norm();
    if (s > 0) block /= s;
  }
  return span_basis(k, 1e-9);
}

inline opensub::SubspaceBasis basis_of(const Matrix& orthonormal) {
  return opensub::SubspaceBasis(orthonormal, opensub::kDefaultTol);
}

}  // namespace testing
