#pragma once

#include <string>
#include <vector>

#include "opensub/subspace.hpp"
#include "opensub/system.hpp"

namespace opensub {

// Slack factor c in the "<= c * tol" checks of this module. Distances between
// subspaces obtained along different numerical routes, invariance residuals
// and vanishing blocks are all compared against kCheckFactor * tol (scaled by
// max(||Omega||, 1) where the quantity carries units of Omega).
inline constexpr double kCheckFactor = 100.0;

// Default relative gap below which neighbouring eigenvalues are merged when
// counting multiplicities.
inline constexpr double kDefaultClusterTol = 1e-8;

// H = H1d (+) H1c (+) H2c (+) H2d, with the restricted operators. The four
// bases are expressed in their own side's coordinates: h1d, h1c in C^d1 and
// h2c, h2d in C^d2.
struct FourWayDecomposition {
  SubspaceBasis h1d;
  SubspaceBasis h1c;
  SubspaceBasis h2c;
  SubspaceBasis h2d;
  Matrix omega1d;
  Matrix omega1c;
  Matrix omega2c;
  Matrix omega2d;
  Matrix gamma_c;  // dim(h1c) x dim(h2c)
  double tol = kDefaultTol;

  // Distances between the definitional subspaces and the ones obtained from
  // orbit(omega1, Ran gamma), orbit(omega2, Ran gamma^H).
  double h1c_route_distance = 0.0;
  double h2c_route_distance = 0.0;

  // Columns [h1d | h1c | h2c | h2d] embedded in C^(d1+d2).
  Matrix full_basis() const;
  // [[omega1c, gamma_c], [gamma_c^H, omega2c]], the restriction of Omega to
  // the coupled part H1c (+) H2c.
  Matrix omega_c() const;
};

// Computes
//   h2c = orbit(Omega, H1) (-) H1,   h2d = H2 (-) h2c,
//   h1c = orbit(Omega, H2) (-) H2,   h1d = H1 (-) h1c,
// and cross-checks h1c against orbit(omega1, Ran gamma) and h2c against
// orbit(omega2, Ran gamma^H). Throws ConsistencyError carrying both
// distances when the two routes disagree by more than kCheckFactor * tol.
FourWayDecomposition decompose(const BlockSystem& sys);

// Largest spectral norm among the blocks of B^H Omega B that must vanish,
// B = dec.full_basis(): every block coupling H1d or H2d to another part, and
// the H1d/H1c, H2c/H2d cross blocks. Absolute units (compare with
// ||Omega||).
double verify_block_form(const BlockSystem& sys,
                         const FourWayDecomposition& dec);

struct SpectralClusters {
  std::vector<double> eigenvalues;       // ascending
  std::vector<Eigen::Index> sizes;       // cluster sizes, in eigenvalue order
  Eigen::Index multiplicity = 0;         // largest cluster
  double threshold = 0.0;                // absolute merge threshold used
  double largest_merged_gap = 0.0;       // widest gap inside a cluster
  double smallest_split_gap = 0.0;       // narrowest gap between clusters,
                                         // infinite with < 2 clusters
};

// Sorted eigenvalues grouped where consecutive gaps are
// <= cluster_tol * max(1, ||A||).
SpectralClusters spectral_clusters(const Matrix& a, double cluster_tol);

// Largest eigenvalue-cluster size of a Hermitian matrix (0 for an empty
// matrix). For a finite Hermitian matrix this is the spectral multiplicity,
// the least number of cyclic vectors generating the space.
Eigen::Index multiplicity(const Matrix& a,
                          double cluster_tol = kDefaultClusterTol);

struct NamedDistance {
  std::string name;
  double value = 0.0;
};

struct TheoremReport {
  // Pairwise distances among H1c(+)H2c, O(H1c), O(H2c), O(Ran Gamma0).
  std::vector<NamedDistance> orbit_equalities;
  // Supporting identities from the argument: the uncoupled-operator orbit
  // splitting, range containments and the two-route checks.
  std::vector<NamedDistance> proof_chain;
  Eigen::Index dim_h1d = 0;
  Eigen::Index dim_h1c = 0;
  Eigen::Index dim_h2c = 0;
  Eigen::Index dim_h2d = 0;
  Eigen::Index rank_gamma = 0;
  Eigen::Index multiplicity_omega_c = 0;
  Eigen::Index bound = 0;  // min(2 rank gamma, dim h1c, dim h2c)
  bool bound_satisfied = true;
  bool reconstructible_core = true;
  double block_form_residual = 0.0;
  double omega_norm = 0.0;
  double threshold = 0.0;  // distances must stay below this
  double tol = kDefaultTol;
  double cluster_tol = kDefaultClusterTol;
  SpectralClusters omega_c_clusters;

  double max_equality_distance() const;
  double max_chain_distance() const;
  // True when every distance is below `threshold`, the block form holds,
  // the bound holds and the core is reconstructible.
  bool passed() const;
};

TheoremReport verify_theorem(const BlockSystem& sys,
                             double cluster_tol = kDefaultClusterTol);

// True iff both decoupled parts vanish.
bool is_reconstructible(const BlockSystem& sys);

}  // namespace opensub
