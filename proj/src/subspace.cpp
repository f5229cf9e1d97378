#include "opensub/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "opensub/errors.hpp"

namespace opensub {

namespace {

// Grows an orthonormal column set in place. Holds the first `size` columns of
// a preallocated n x n buffer.
class GramSchmidt {
 public:
  GramSchmidt(Eigen::Index n, double threshold)
      : q_(Matrix::Zero(n, n)), threshold_(threshold) {}

  // Orthogonalizes v against the accepted columns (two passes) and appends
  // the normalized residual if its norm exceeds the threshold.
  bool push(Vector v) {
    if (size_ == q_.cols()) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (size_ > 0) {
        const auto accepted = q_.leftCols(size_);
        v -= accepted * (accepted.adjoint() * v);
      }
    }
    const double norm = v.norm();
    if (!(norm > threshold_)) return false;
    q_.col(size_++) = v / norm;
    return true;
  }

  // Takes columns that are already orthonormal.
  void adopt(const Matrix& orthonormal) {
    q_.leftCols(orthonormal.cols()) = orthonormal;
    size_ = orthonormal.cols();
  }

  Eigen::Index size() const { return size_; }
  auto column(Eigen::Index i) const { return q_.col(i); }
  Matrix take() const { return q_.leftCols(size_); }

 private:
  Matrix q_;
  Eigen::Index size_ = 0;
  double threshold_;
};

void require_positive_tol(double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
}

void require_same_ambient(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw DimensionMismatch("subspaces live in C^" +
                            std::to_string(a.ambient_dim()) + " and C^" +
                            std::to_string(b.ambient_dim()));
  }
}

void require_hermitian(const Matrix& a, double tol) {
  const double defect = hermitian_defect(a);
  if (defect > tol) {
    throw SymmetryViolation("operator is not Hermitian (relative defect " +
                            std::to_string(defect) + ")");
  }
}

}  // namespace

SubspaceBasis::SubspaceBasis(Eigen::Index ambient_dim, double tol)
    : ambient_dim_(ambient_dim), columns_(ambient_dim, 0), tol_(tol) {}

SubspaceBasis::SubspaceBasis(Matrix columns, double tol)
    : ambient_dim_(columns.rows()), columns_(std::move(columns)), tol_(tol) {
  if (columns_.cols() > columns_.rows()) {
    throw DimensionMismatch("more basis vectors than the ambient dimension");
  }
}

SubspaceBasis SubspaceBasis::coordinate(Eigen::Index ambient_dim,
                                        Eigen::Index first, Eigen::Index count,
                                        double tol) {
  if (first < 0 || count < 0 || first + count > ambient_dim) {
    throw DimensionMismatch("coordinate block outside the ambient space");
  }
  Matrix cols = Matrix::Zero(ambient_dim, count);
  for (Eigen::Index i = 0; i < count; ++i) cols(first + i, i) = 1.0;
  return SubspaceBasis(std::move(cols), tol);
}

Matrix SubspaceBasis::projector() const {
  return columns_ * columns_.adjoint();
}

Vector SubspaceBasis::residual(const Vector& x) const {
  if (x.size() != ambient_dim_) throw DimensionMismatch("vector length");
  if (empty()) return x;
  return x - columns_ * (columns_.adjoint() * x);
}

double SubspaceBasis::orthogonality_error() const {
  if (empty()) return 0.0;
  const Matrix gram = columns_.adjoint() * columns_;
  return (gram - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double hermitian_defect(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix is not square");
  const double scale = a.norm();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / scale;
}

SubspaceBasis orthonormalize(std::span<const Vector> vectors, double tol) {
  require_positive_tol(tol);
  if (vectors.empty()) return SubspaceBasis(0, tol);
  const Eigen::Index n = vectors.front().size();
  double max_norm = 0.0;
  for (const auto& v : vectors) {
    if (v.size() != n) {
      throw DimensionMismatch("orthonormalize: vectors of length " +
                              std::to_string(n) + " and " +
                              std::to_string(v.size()));
    }
    max_norm = std::max(max_norm, v.norm());
  }
  GramSchmidt gs(n, tol * std::max(max_norm, 1.0));
  for (const auto& v : vectors) gs.push(v);
  return SubspaceBasis(gs.take(), tol);
}

SubspaceBasis orthonormalize(const Matrix& columns, double tol) {
  std::vector<Vector> vectors;
  vectors.reserve(static_cast<std::size_t>(columns.cols()));
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    vectors.emplace_back(columns.col(j));
  }
  if (vectors.empty()) return SubspaceBasis(columns.rows(), tol);
  return orthonormalize(std::span<const Vector>(vectors), tol);
}

HermitianSpectrum::HermitianSpectrum(const Matrix& a, double tol) : tol_(tol) {
  require_positive_tol(tol);
  if (a.rows() != a.cols()) throw DimensionMismatch("operator is not square");
  require_hermitian(a, tol);
  if (a.rows() == 0) {
    eigenvectors_ = Matrix(0, 0);
    starts_ = {0};
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error("eigendecomposition did not converge");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  norm_ = eigenvalues_.cwiseAbs().maxCoeff();
  const double gap = tol * std::max(norm_, 1.0);
  starts_.push_back(0);
  for (Eigen::Index i = 1; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_(i) - eigenvalues_(i - 1) > gap) starts_.push_back(i);
  }
  starts_.push_back(eigenvalues_.size());
}

Eigen::Index HermitianSpectrum::largest_cluster() const {
  Eigen::Index m = 0;
  for (std::size_t k = 0; k + 1 < starts_.size(); ++k) {
    m = std::max(m, starts_[k + 1] - starts_[k]);
  }
  return m;
}

SubspaceBasis orbit(const HermitianSpectrum& spectrum,
                    const SubspaceBasis& seed) {
  const double tol = spectrum.tol();
  if (seed.ambient_dim() != spectrum.dim()) {
    throw DimensionMismatch("orbit: seed lives in C^" +
                            std::to_string(seed.ambient_dim()) +
                            ", operator acts on C^" +
                            std::to_string(spectrum.dim()));
  }
  const SubspaceBasis s = seed.orthogonality_error() <= tol
                              ? seed
                              : orthonormalize(seed.matrix(), tol);
  if (s.empty()) return SubspaceBasis(spectrum.dim(), tol);

  const Matrix& u = spectrum.eigenvectors();
  const Matrix coords = u.adjoint() * s.matrix();
  const auto& starts = spectrum.cluster_starts();
  std::vector<Matrix> blocks;
  Eigen::Index total = 0;
  for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
    const Eigen::Index first = starts[k];
    const Eigen::Index size = starts[k + 1] - first;
    const Matrix c = coords.middleRows(first, size);
    Eigen::BDCSVD<Matrix> svd(c, Eigen::ComputeThinU);
    const Eigen::Index r = (svd.singularValues().array() > tol).count();
    if (r == 0) continue;
    blocks.emplace_back(u.middleCols(first, size) * svd.matrixU().leftCols(r));
    total += r;
  }
  Matrix basis(spectrum.dim(), total);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    basis.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return SubspaceBasis(std::move(basis), tol);
}

SubspaceBasis orbit(const Matrix& a, const SubspaceBasis& seed, double tol) {
  if (a.rows() != a.cols()) throw DimensionMismatch("orbit: A is not square");
  if (seed.ambient_dim() != a.rows()) {
    throw DimensionMismatch("orbit: seed lives in C^" +
                            std::to_string(seed.ambient_dim()) +
                            ", operator acts on C^" + std::to_string(a.rows()));
  }
  return orbit(HermitianSpectrum(a, tol), seed);
}

SubspaceBasis krylov_orbit(const Matrix& a, const SubspaceBasis& seed, double tol) {
  require_positive_tol(tol);
  if (a.rows() != a.cols()) throw DimensionMismatch("orbit: A is not square");
  if (seed.ambient_dim() != a.rows()) {
    throw DimensionMismatch("orbit: seed lives in C^" +
                            std::to_string(seed.ambient_dim()) +
                            ", operator acts on C^" + std::to_string(a.rows()));
  }
  require_hermitian(a, tol);

  GramSchmidt gs(a.rows(), tol * std::max(operator_norm(a), 1.0));
  if (seed.orthogonality_error() <= tol) {
    gs.adopt(seed.matrix());
  } else {
    for (Eigen::Index j = 0; j < seed.dim(); ++j) gs.push(seed.vector(j));
  }

  Eigen::Index processed = 0;
  while (processed < gs.size()) {
    const Eigen::Index frontier = gs.size();
    for (Eigen::Index j = processed; j < frontier; ++j) {
      gs.push(a * gs.column(j));
    }
    processed = frontier;
  }
  return SubspaceBasis(gs.take(), tol);
}

double invariance_residual(const Matrix& a, const SubspaceBasis& basis) {
  if (basis.empty()) return 0.0;
  const Matrix& q = basis.matrix();
  const Matrix image = a * q;
  return operator_norm(image - q * (q.adjoint() * image));
}

double containment_residual(const SubspaceBasis& whole,
                            const SubspaceBasis& part) {
  require_same_ambient(whole, part);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < part.dim(); ++j) {
    worst = std::max(worst, whole.residual(part.vector(j)).norm());
  }
  return worst;
}

SubspaceBasis complement(const SubspaceBasis& whole, const SubspaceBasis& part,
                         double tol) {
  require_same_ambient(whole, part);
  const double outside = containment_residual(whole, part);
  if (outside > tol) {
    throw ContainmentError("complement: part leaves the whole by " +
                           std::to_string(outside));
  }
  const Eigen::Index k = whole.dim();
  const Eigen::Index m = part.dim();
  if (m > k) throw ContainmentError("complement: part has larger dimension");
  if (m == 0) return SubspaceBasis(whole.matrix(), tol);

  // Coordinates of the part inside the whole; the trailing Householder
  // columns span their orthogonal complement in C^k.
  const Matrix coords = whole.matrix().adjoint() * part.matrix();
  Eigen::HouseholderQR<Matrix> qr(coords);
  const Matrix q = qr.householderQ() * Matrix::Identity(k, k);
  return SubspaceBasis(Matrix(whole.matrix() * q.rightCols(k - m)), tol);
}

double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
  require_same_ambient(a, b);
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return 1.0;
  const Matrix& qa = a.matrix();
  const Matrix& qb = b.matrix();
  // For orthogonal projectors ||Pa - Pb|| = max(||(I-Pa)Pb||, ||(I-Pb)Pa||).
  const double ab = operator_norm(qb - qa * (qa.adjoint() * qb));
  const double ba = operator_norm(qa - qb * (qb.adjoint() * qa));
  return std::clamp(std::max(ab, ba), 0.0, 1.0);
}

SubspaceBasis direct_sum(const SubspaceBasis& a, const SubspaceBasis& b,
                         double tol) {
  require_same_ambient(a, b);
  Matrix cols(a.ambient_dim(), a.dim() + b.dim());
  cols << a.matrix(), b.matrix();
  return orthonormalize(cols, tol);
}

SubspaceBasis embed(const SubspaceBasis& basis, Eigen::Index ambient_dim,
                    Eigen::Index offset) {
  if (offset < 0 || offset + basis.ambient_dim() > ambient_dim) {
    throw DimensionMismatch("embed: block does not fit");
  }
  Matrix cols = Matrix::Zero(ambient_dim, basis.dim());
  cols.middleRows(offset, basis.ambient_dim()) = basis.matrix();
  return SubspaceBasis(std::move(cols), basis.tol());
}

Eigen::Index numeric_rank(const Matrix& m, double tol) {
  require_positive_tol(tol);
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  return (sv.array() > tol * sv(0)).count();
}

}  // namespace opensub
