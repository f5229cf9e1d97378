#include <cmath>

#include "doctest.h"
#include "opensub/decomposition.hpp"
#include "opensub/dynamics.hpp"
#include "opensub/errors.hpp"
#include "opensub/lattice.hpp"
#include "support.hpp"

using namespace opensub;
using testing::Gen;

namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

Matrix diag(std::initializer_list<double> xs) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(xs.size()),
                          static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) { m(i, i) = x; ++i; }
  return m;
}

// Omega1 = [0], Omega2 = diag(1, 1), Gamma = [1, 0].
BlockSystem one_of_two() {
  Matrix g(1, 2);
  g << 1, 0;
  return BlockSystem(scalar(0), diag({1, 1}), g);
}

// Coupled subspaces from an eigendecomposition of the full operator,
// independent of the orbit code: span of the spectral projections of H1
// onto each eigenspace of Omega, minus H1.
SubspaceBasis oracle_h2c(const BlockSystem& sys) {
  const Matrix omega = assemble_full(sys).omega;
  const Eigen::Index n = omega.rows();
  const Eigen::Index d1 = sys.d1();
  Eigen::SelfAdjointEigenSolver<Matrix> es(omega);
  const Matrix& u = es.eigenvectors();
  const auto& ev = es.eigenvalues();
  Matrix cols(n, 0);
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i < n && ev(i) - ev(i - 1) < 1e-9) continue;
    const Matrix uk = u.middleCols(start, i - start);
    const Matrix proj = uk * (uk.adjoint() * Matrix::Identity(n, d1));
    const Matrix b = testing::span_basis(proj, 1e-9);
    Matrix grown(n, cols.cols() + b.cols());
    grown << cols, b;
    cols = grown;
    start = i;
  }
  const Matrix lower = cols.bottomRows(n - d1);
  // orbit = H1 (+) h2c, so the H2 rows of the orbit span h2c
  return testing::basis_of(testing::span_basis(lower, 1e-9));
}

}  // namespace

TEST_CASE("no coupling leaves everything decoupled") {
  Gen g(1);
  const BlockSystem sys(g.hermitian(3), g.hermitian(4), Matrix::Zero(3, 4));
  const FourWayDecomposition dec = decompose(sys);
  CHECK(dec.h1c.dim() == 0);
  CHECK(dec.h2c.dim() == 0);
  CHECK(dec.h1d.dim() == 3);
  CHECK(dec.h2d.dim() == 4);
  CHECK(verify_block_form(sys, dec) < 1e-14);
  CHECK_FALSE(is_reconstructible(sys));

  const TheoremReport r = verify_theorem(sys);
  CHECK(r.max_equality_distance() == 0.0);
  CHECK(r.bound == 0);
  CHECK(r.multiplicity_omega_c == 0);
  CHECK(r.bound_satisfied);
  CHECK(r.reconstructible_core);
  CHECK(r.passed());
}

TEST_CASE("one hidden mode of two is seen") {
  const BlockSystem sys = one_of_two();
  const FourWayDecomposition dec = decompose(sys);
  CHECK(dec.h1c.dim() == 1);
  CHECK(dec.h1d.dim() == 0);
  CHECK(dec.h2c.dim() == 1);
  CHECK(dec.h2d.dim() == 1);
  CHECK(projector_distance(dec.h2c, SubspaceBasis::coordinate(2, 0, 1)) < 1e-14);
  CHECK(projector_distance(dec.h2d, SubspaceBasis::coordinate(2, 1, 1)) < 1e-14);
  CHECK_FALSE(is_reconstructible(sys));
}

TEST_CASE("the two-site system is reconstructible") {
  const BlockSystem sys(scalar(0), scalar(0), scalar(1));
  CHECK(is_reconstructible(sys));
  const TheoremReport r = verify_theorem(sys);
  CHECK(r.multiplicity_omega_c == 1);
  CHECK(r.bound == 1);
  CHECK(r.passed());
}

TEST_CASE("a 2x2x2 cube in a 4-box is fully coupled") {
  const BlockSystem sys = build_lattice_system({4, 2, {1, 1, 1}, 3});
  const FourWayDecomposition dec = decompose(sys);
  CHECK(dec.h1c.dim() == 8);
  CHECK(dec.h1d.dim() == 0);
}

TEST_CASE("random system block form") {
  const BlockSystem sys = random_system(4, 6, 2, 11);
  const FourWayDecomposition dec = decompose(sys);
  CHECK(verify_block_form(sys, dec) <=
        1e-10 * operator_norm(assemble_full(sys).omega));
}

TEST_CASE("corrupted basis is flagged") {
  // omega1 with a triple eigenvalue and rank-one coupling: two observable
  // modes of the eigenspace cannot be reached
  Gen g(12);
  const Matrix u = g.unitary(4);
  Matrix o1 = u * diag({1, 1, 1, 2}) * u.adjoint();
  o1 = 0.5 * (o1 + o1.adjoint());
  const BlockSystem sys(o1, g.hermitian(6), g.matrix(4, 1) * g.matrix(1, 6));
  const FourWayDecomposition dec = decompose(sys);
  const double norm = operator_norm(assemble_full(sys).omega);
  CHECK(verify_block_form(sys, dec) <= 1e-10 * norm);
  REQUIRE(dec.h1d.dim() == 2);
  REQUIRE(dec.h1c.dim() > 0);
  FourWayDecomposition bad = dec;
  Matrix d = bad.h1d.matrix();
  Matrix c = bad.h1c.matrix();
  d.col(0).swap(c.col(0));
  bad.h1d = SubspaceBasis(d, dec.tol);
  bad.h1c = SubspaceBasis(c, dec.tol);
  CHECK(verify_block_form(sys, bad) > 1e-3 * norm);
}

TEST_CASE("multiplicity examples") {
  CHECK(multiplicity(Matrix::Identity(4, 4)) == 4);
  CHECK(multiplicity(diag({1, 1, 2})) == 2);
  CHECK(multiplicity(Matrix(0, 0)) == 0);

  Gen g(8);
  const SpectralClusters c = spectral_clusters(g.hermitian(12), kDefaultClusterTol);
  CHECK(c.multiplicity == 1);
  CHECK(c.smallest_split_gap > c.threshold);
  CHECK_THROWS_AS(multiplicity(diag({1}), 0.0), InvalidArgument);
}

TEST_CASE("cluster threshold is relative to the norm") {
  // gap 1e-7 at scale 1e3 is below 1e-8 * 1e3
  const Matrix a = diag({1000.0, 1000.0 + 1e-7, -3.0});
  CHECK(multiplicity(a, 1e-8) == 2);
  CHECK(multiplicity(a, 1e-12) == 1);
}

TEST_CASE("theorem report on a mid-sized random system") {
  const BlockSystem sys = random_system(5, 8, 2, 42);
  const TheoremReport r = verify_theorem(sys);
  CHECK(r.orbit_equalities.size() == 6);
  CHECK(r.max_equality_distance() <= 1e-9);
  CHECK(r.max_chain_distance() <= 1e-9);
  CHECK(r.rank_gamma == 2);
  CHECK(r.multiplicity_omega_c <= std::min<Eigen::Index>({4, r.dim_h1c, r.dim_h2c}));
  CHECK(r.passed());
}

TEST_CASE("decomposition matches a spectral-projection oracle") {
  Gen g(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int d1 = g.integer(1, 5);
    const int d2 = g.integer(1, 7);
    // degenerate hidden block so that some hidden modes decouple
    const Matrix u = g.unitary(d2);
    Eigen::VectorXd ev(d2);
    for (int i = 0; i < d2; ++i) ev(i) = static_cast<double>(g.integer(0, 2));
    Matrix o2 = u * ev.cast<Complex>().asDiagonal() * u.adjoint();
    o2 = 0.5 * (o2 + o2.adjoint());
    const int rank = g.integer(0, std::min(d1, d2));
    const Matrix gamma = g.matrix(d1, rank) * g.matrix(rank, d2);
    const BlockSystem sys(g.hermitian(d1), o2, gamma);
    const FourWayDecomposition dec = decompose(sys);
    const SubspaceBasis oracle = oracle_h2c(sys);
    CAPTURE(trial);
    CHECK(dec.h2c.dim() == oracle.dim());
    CHECK(projector_distance(dec.h2c, oracle) < 1e-8);
  }
}

// Properties over random systems.

TEST_CASE("property: four-way decomposition invariants") {
  Gen g(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int d1 = g.integer(1, 10);
    const int d2 = g.integer(1, 14);
    const int rank = g.integer(0, std::min(d1, d2));
    const BlockSystem sys = random_system(d1, d2, rank, 1000 + trial);
    const FourWayDecomposition dec = decompose(sys);
    const double tol = sys.tol();
    const double norm = operator_norm(assemble_full(sys).omega);
    CAPTURE(trial);
    CHECK(dec.h1d.dim() + dec.h1c.dim() == d1);
    CHECK(dec.h2c.dim() + dec.h2d.dim() == d2);
    CHECK(operator_norm(dec.h1d.matrix().adjoint() * dec.h1c.matrix()) <=
          kCheckFactor * tol);
    CHECK(operator_norm(dec.h2c.matrix().adjoint() * dec.h2d.matrix()) <=
          kCheckFactor * tol);
    CHECK(verify_block_form(sys, dec) <= kCheckFactor * tol * norm);
    CHECK(dec.h1c_route_distance <= kCheckFactor * tol);
    CHECK(dec.h2c_route_distance <= kCheckFactor * tol);
    CHECK(containment_residual(dec.h1c, orthonormalize(sys.gamma(), tol)) <=
          kCheckFactor * tol);
    CHECK(dec.omega1c == dec.omega1c.adjoint());

    const TheoremReport r = verify_theorem(sys);
    CHECK(r.max_equality_distance() <= kCheckFactor * tol);
    CHECK(r.bound_satisfied);
    CHECK(r.multiplicity_omega_c <= std::min({2 * r.rank_gamma, r.dim_h1c, r.dim_h2c}));
    CHECK(r.passed());
  }
}

TEST_CASE("property: trajectories from H1 stay in the coupled orbit") {
  Gen g(5);
  for (int trial = 0; trial < 15; ++trial) {
    const int d1 = g.integer(1, 5);
    const int d2 = g.integer(2, 9);
    const BlockSystem sys = random_system(d1, d2, g.integer(1, std::min(d1, d2)),
                                          trial);
    const FourWayDecomposition dec = decompose(sys);
    const Eigen::Index n = d1 + d2;
    // orbit(Omega, H1) = H1 (+) h2c
    const SubspaceBasis reach = direct_sum(SubspaceBasis::coordinate(n, 0, d1),
                                           embed(dec.h2c, n, d1), sys.tol());
    Vector v0 = Vector::Zero(n);
    v0.head(d1) = g.vector(d1);
    const Trajectory t = propagate_full(assemble_full(sys), v0,
                                        ForcingSignal::zero(), TimeGrid(5.0, 50));
    double worst = 0.0;
    for (const auto& s : t.states) worst = std::max(worst, reach.residual(s).norm());
    CHECK(worst <= kCheckFactor * sys.tol() * v0.norm());
  }
}
