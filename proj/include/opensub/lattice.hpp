#pragma once

#include <array>
#include <vector>

#include "opensub/decomposition.hpp"
#include "opensub/system.hpp"

namespace opensub {

// Cube of N^dims sites placed inside a box of M^dims sites of Z^dims.
struct LatticeSpec {
  int box = 1;                      // M, sites per axis of the box
  int cube = 1;                     // N, sites per axis of the cube
  std::array<int, 3> offset{};      // low corner of the cube in the box
  int dims = 3;                     // 1, 2 or 3

  // Throws InvalidArgument unless 1 <= N <= M and the cube fits in the box.
  void validate() const;
  // offset_j >= 1 and offset_j + N <= M - 1 on every axis.
  bool interior() const;
  int total_sites() const;
  int cube_sites() const;
};

// Site bookkeeping of a lattice system: which box sites form the cube and in
// which order they appear in the H1 / H2 coordinates.
struct LatticeLayout {
  std::vector<int> observable_sites;  // box index of each H1 coordinate
  std::vector<int> hidden_sites;      // box index of each H2 coordinate
};

LatticeLayout lattice_layout(const LatticeSpec& spec);

// Omega = sum_j Delta_j, (Delta_j f)(n) = f(n + e_j) - 2 f(n) + f(n - e_j),
// on the box with f = 0 outside it. Sites are ordered lexicographically
// (last axis fastest); cube sites go to H1, all others to H2, each in that
// order. The sign convention of the Laplacian is kept (Omega <= 0).
BlockSystem build_lattice_system(const LatticeSpec& spec,
                                 double tol = kDefaultTol);

// Number of cube sites with a neighbour outside the cube:
// N^dims - (N-2)^dims for N >= 2 (6N^2 - 12N + 8 in three dimensions) and
// 1 for N = 1. Throws for N <= 0.
int surface_count(int n, int dims = 3);

// 2 * surface_count(n, dims); 12N^2 - 24N + 16 in three dimensions.
int multiplicity_bound(int n, int dims = 3);

// Cube sites with at least one nearest neighbour inside the box but outside
// the cube, counted directly on the generated layout.
int count_surface_sites(const LatticeSpec& spec);

struct LatticeReport {
  LatticeSpec spec;
  int surface = 0;            // surface_count(N, dims)
  int surface_sites = 0;      // count_surface_sites(spec)
  int bound = 0;              // multiplicity_bound(N, dims)
  Eigen::Index rank_gamma = 0;
  bool rank_equals_surface = false;
  bool rank_within_surface = false;
  bool multiplicity_within_bound = false;
  bool hidden_decoupled_nonzero = false;  // dim(h2d) > 0
  TheoremReport theorem;

  bool passed() const {
    return rank_within_surface && multiplicity_within_bound &&
           theorem.passed();
  }
};

// Builds the lattice system and runs the decomposition and theorem checks.
// Requires an interior cube.
LatticeReport verify_example(const LatticeSpec& spec, double tol = kDefaultTol,
                             double cluster_tol = kDefaultClusterTol);

}  // namespace opensub
