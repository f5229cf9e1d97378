#include "opensub/system.hpp"

#include <cmath>
#include <string>

#include "opensub/errors.hpp"

namespace opensub {

namespace {

Matrix validated_hermitian(Matrix m, double tol, const char* name) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(name) + " is not square");
  }
  const double defect = hermitian_defect(m);
  if (defect > tol) {
    throw SymmetryViolation(std::string(name) +
                            " is not Hermitian (relative defect " +
                            std::to_string(defect) + ")");
  }
  Matrix sym = 0.5 * (m + m.adjoint());
  return sym;
}

Matrix random_hermitian(UniformSource& rng, Eigen::Index n) {
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.complex();
  }
  const double scale = 0.5 / std::sqrt(static_cast<double>(n));
  return scale * (g + g.adjoint());
}

}  // namespace

BlockSystem::BlockSystem(Matrix omega1, Matrix omega2, Matrix gamma, double tol)
    : omega1_(validated_hermitian(std::move(omega1), tol, "omega1")),
      omega2_(validated_hermitian(std::move(omega2), tol, "omega2")),
      gamma_(std::move(gamma)),
      tol_(tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (gamma_.rows() != d1() || gamma_.cols() != d2()) {
    throw DimensionMismatch("gamma is " + std::to_string(gamma_.rows()) + "x" +
                            std::to_string(gamma_.cols()) + ", expected " +
                            std::to_string(d1()) + "x" + std::to_string(d2()));
  }
}

FullOperator assemble_full(const BlockSystem& sys) {
  const Eigen::Index d1 = sys.d1();
  const Eigen::Index d2 = sys.d2();
  Matrix omega(d1 + d2, d1 + d2);
  omega.topLeftCorner(d1, d1) = sys.omega1();
  omega.topRightCorner(d1, d2) = sys.gamma();
  omega.bottomLeftCorner(d2, d1) = sys.gamma().adjoint();
  omega.bottomRightCorner(d2, d2) = sys.omega2();
  return {std::move(omega), d1, d2};
}

BlockSystem extract_blocks(const FullOperator& full, double tol) {
  const Eigen::Index n = full.d1 + full.d2;
  if (full.omega.rows() != n || full.omega.cols() != n) {
    throw DimensionMismatch("full operator does not match its split");
  }
  return BlockSystem(full.omega.topLeftCorner(full.d1, full.d1),
                     full.omega.bottomRightCorner(full.d2, full.d2),
                     full.omega.topRightCorner(full.d1, full.d2), tol);
}

DecoupledParts decoupled_parts(const BlockSystem& sys) {
  const Eigen::Index d1 = sys.d1();
  const Eigen::Index d2 = sys.d2();
  const Eigen::Index n = d1 + d2;
  DecoupledParts parts{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  parts.uncoupled.topLeftCorner(d1, d1) = sys.omega1();
  parts.uncoupled.bottomRightCorner(d2, d2) = sys.omega2();
  parts.coupling.topRightCorner(d1, d2) = sys.gamma();
  parts.coupling.bottomLeftCorner(d2, d1) = sys.gamma().adjoint();
  return parts;
}

BlockSystem random_system(Eigen::Index d1, Eigen::Index d2,
                          Eigen::Index coupling_rank, std::uint64_t seed,
                          double tol) {
  if (d1 < 1 || d2 < 1) throw InvalidArgument("random_system: d1, d2 >= 1");
  if (coupling_rank < 0 || coupling_rank > std::min(d1, d2)) {
    throw InvalidArgument("random_system: coupling rank " +
                          std::to_string(coupling_rank) + " outside [0, " +
                          std::to_string(std::min(d1, d2)) + "]");
  }
  UniformSource rng(seed);
  Matrix omega1 = random_hermitian(rng, d1);
  Matrix omega2 = random_hermitian(rng, d2);
  Matrix gamma = Matrix::Zero(d1, d2);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d1));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(d2));
  for (Eigen::Index k = 0; k < coupling_rank; ++k) {
    const Vector u = s1 * rng.complex_vector(d1);
    const Vector w = s2 * rng.complex_vector(d2);
    gamma += u * w.adjoint();
  }
  return BlockSystem(std::move(omega1), std::move(omega2), std::move(gamma),
                     tol);
}

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double UniformSource::symmetric() { return 2.0 * unit() - 1.0; }

Complex UniformSource::complex() {
  const double re = symmetric();
  const double im = symmetric();
  return {re, im};
}

Vector UniformSource::complex_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex();
  return v;
}

}  // namespace opensub
