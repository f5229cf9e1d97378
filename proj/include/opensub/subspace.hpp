#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace opensub {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Default relative tolerance for rank and orthogonality decisions.
inline constexpr double kDefaultTol = 1e-10;

// Orthonormal basis of a subspace of C^n, stored column-wise.
//
// The columns are orthonormal to within tol. A basis with zero columns
// represents the trivial subspace {0}.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  // Empty subspace of C^ambient_dim.
  explicit SubspaceBasis(Eigen::Index ambient_dim, double tol = kDefaultTol);
  // Adopts `columns` as-is; they must already be orthonormal within tol.
  SubspaceBasis(Matrix columns, double tol);

  // Canonical basis e_first, ..., e_{first+count-1} of C^ambient_dim.
  static SubspaceBasis coordinate(Eigen::Index ambient_dim, Eigen::Index first,
                                  Eigen::Index count, double tol = kDefaultTol);

  Eigen::Index ambient_dim() const { return ambient_dim_; }
  Eigen::Index dim() const { return columns_.cols(); }
  bool empty() const { return columns_.cols() == 0; }
  double tol() const { return tol_; }

  const Matrix& matrix() const { return columns_; }
  Vector vector(Eigen::Index i) const { return columns_.col(i); }

  // Orthogonal projector onto the subspace (ambient_dim x ambient_dim).
  Matrix projector() const;
  // Component of x orthogonal to the subspace.
  Vector residual(const Vector& x) const;
  // Largest |<v_i, v_j> - delta_ij|.
  double orthogonality_error() const;

 private:
  Eigen::Index ambient_dim_ = 0;
  Matrix columns_;
  double tol_ = kDefaultTol;
};

// Spectral norm.
double operator_norm(const Matrix& m);

// Relative Hermiticity defect ||A - A^H||_F / max(||A||_F, tiny).
double hermitian_defect(const Matrix& a);

// Gram-Schmidt with one reorthogonalization pass. Vectors are processed in
// input order; a vector is dropped when its residual after projection onto
// the accepted ones has norm <= tol * max(max input norm, 1).
SubspaceBasis orthonormalize(std::span<const Vector> vectors, double tol);
// Same, for the columns of `columns`.
SubspaceBasis orthonormalize(const Matrix& columns, double tol);

// Eigendecomposition of a Hermitian matrix with its eigenvalues grouped into
// clusters: consecutive eigenvalues closer than tol * max(||A||_2, 1) share a
// cluster. Reusable across many orbit computations with the same operator.
class HermitianSpectrum {
 public:
  // Throws SymmetryViolation if hermitian_defect(a) > tol.
  HermitianSpectrum(const Matrix& a, double tol);

  Eigen::Index dim() const { return eigenvectors_.rows(); }
  double tol() const { return tol_; }
  double norm() const { return norm_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  // cluster k spans eigenvalue indices [starts[k], starts[k+1]).
  const std::vector<Eigen::Index>& cluster_starts() const { return starts_; }
  Eigen::Index largest_cluster() const;

 private:
  Eigen::VectorXd eigenvalues_;
  Matrix eigenvectors_;
  std::vector<Eigen::Index> starts_;
  double norm_ = 0.0;
  double tol_;
};

// Smallest A-invariant subspace containing span(seed).
//
// Computed from the functional-calculus description of the orbit,
//     O_A(S) = closure{ f(A) s : f smooth, s in S },
// which for a finite Hermitian matrix is the span of P_k S over the spectral
// projectors P_k of the eigenvalue clusters. Per cluster the projected seed
// is rank-reduced by SVD (singular values <= tol are dropped), so the basis
// is orthonormal by construction and the result does not suffer from the
// roundoff growth of long Krylov sequences on degenerate spectra.
//
// Invariance certificate: ||(I - P) A P|| <= (m - 1)/2 * tol * max(||A||, 1)
// plus eigensolver roundoff, m the largest merged cluster (m = 1 for simple
// spectra).
SubspaceBasis orbit(const HermitianSpectrum& spectrum, const SubspaceBasis& seed);
SubspaceBasis orbit(const Matrix& a, const SubspaceBasis& seed, double tol);

// Same subspace by polynomial (Krylov) closure: B_0 = seed,
// B_{k+1} = orthonormalize(B_k u A B_k) until the dimension is stable. Only
// images of the newest block are formed at each pass; images of older columns
// already lie in the span up to the drop threshold tol * max(||A||_2, 1).
// Accurate for well-separated spectra; on large, highly degenerate spectra
// accepted directions with tiny residuals can carry roundoff into spurious
// new directions, so orbit() is the primary route.
SubspaceBasis krylov_orbit(const Matrix& a, const SubspaceBasis& seed,
                           double tol);

// ||(I - P) A P||_2 for P the projector onto `basis`.
double invariance_residual(const Matrix& a, const SubspaceBasis& basis);

// Orthonormal basis of whole (-) part. Throws ContainmentError if some part
// vector lies farther than tol from span(whole).
SubspaceBasis complement(const SubspaceBasis& whole, const SubspaceBasis& part,
                         double tol);

// Largest distance from a vector of `part` to span(whole).
double containment_residual(const SubspaceBasis& whole,
                            const SubspaceBasis& part);

// Spectral-norm distance ||P_a - P_b||_2, in [0, 1]. Equals the sine of the
// largest principal angle when dimensions agree and 1 when they differ.
double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b);

// Orthogonal direct sum of two subspaces (concatenate and re-orthonormalize).
SubspaceBasis direct_sum(const SubspaceBasis& a, const SubspaceBasis& b,
                         double tol);

// Embeds a subspace of C^k into C^n at coordinate offset `offset`.
SubspaceBasis embed(const SubspaceBasis& basis, Eigen::Index ambient_dim,
                    Eigen::Index offset);

// Number of singular values above tol * sigma_max.
Eigen::Index numeric_rank(const Matrix& m, double tol);

}  // namespace opensub
