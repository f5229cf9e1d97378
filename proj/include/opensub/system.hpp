#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "opensub/subspace.hpp"

namespace opensub {

// Conservative system split into observable (H1 = C^d1) and hidden
// (H2 = C^d2) variables:
//
//     Omega = [ omega1   gamma  ]
//             [ gamma^H  omega2 ]
//
// gamma maps H2 -> H1. The diagonal blocks are validated to be Hermitian
// within tol and then symmetrized, so they are exactly Hermitian afterwards.
class BlockSystem {
 public:
  BlockSystem(Matrix omega1, Matrix omega2, Matrix gamma,
              double tol = kDefaultTol);

  Eigen::Index d1() const { return omega1_.rows(); }
  Eigen::Index d2() const { return omega2_.rows(); }
  Eigen::Index dim() const { return d1() + d2(); }
  double tol() const { return tol_; }

  const Matrix& omega1() const { return omega1_; }
  const Matrix& omega2() const { return omega2_; }
  const Matrix& gamma() const { return gamma_; }

 private:
  Matrix omega1_;
  Matrix omega2_;
  Matrix gamma_;
  double tol_;
};

struct FullOperator {
  Matrix omega;
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
};

// [[omega1, gamma], [gamma^H, omega2]].
FullOperator assemble_full(const BlockSystem& sys);

// Inverse of assemble_full: reads the blocks back out of the full operator.
BlockSystem extract_blocks(const FullOperator& full, double tol = kDefaultTol);

// The split Omega = uncoupled + coupling with
//   uncoupled = diag(omega1, omega2),  coupling = [[0, gamma], [gamma^H, 0]].
struct DecoupledParts {
  Matrix uncoupled;
  Matrix coupling;
};

DecoupledParts decoupled_parts(const BlockSystem& sys);

// Deterministic pseudo-random system: Hermitian omega1, omega2 with spectra
// of order one and gamma = sum of `coupling_rank` random outer products.
// Identical arguments give bit-identical matrices on every platform
// (mt19937_64 raw output, no library distributions).
BlockSystem random_system(Eigen::Index d1, Eigen::Index d2,
                          Eigen::Index coupling_rank, std::uint64_t seed,
                          double tol = kDefaultTol);

// Portable uniform source shared by the random generators of the library.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed);
  // Uniform on [-1, 1).
  double symmetric();
  // Uniform on [0, 1).
  double unit();
  Complex complex();
  Vector complex_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace opensub
