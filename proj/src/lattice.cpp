#include "opensub/lattice.hpp"

#include <string>

#include "opensub/errors.hpp"

namespace opensub {

namespace {

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::array<int, 3> coords_of(int index, const LatticeSpec& spec) {
  std::array<int, 3> c{};
  for (int k = spec.dims - 1; k >= 0; --k) {
    c[static_cast<std::size_t>(k)] = index % spec.box;
    index /= spec.box;
  }
  return c;
}

int index_of(const std::array<int, 3>& c, const LatticeSpec& spec) {
  int index = 0;
  for (int k = 0; k < spec.dims; ++k) {
    index = index * spec.box + c[static_cast<std::size_t>(k)];
  }
  return index;
}

bool in_cube(const std::array<int, 3>& c, const LatticeSpec& spec) {
  for (int k = 0; k < spec.dims; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (c[kk] < spec.offset[kk] || c[kk] >= spec.offset[kk] + spec.cube) {
      return false;
    }
  }
  return true;
}

// Calls fn(neighbour_index) for every nearest neighbour inside the box.
template <typename Fn>
void for_each_neighbour(int index, const LatticeSpec& spec, Fn&& fn) {
  const std::array<int, 3> c = coords_of(index, spec);
  for (int k = 0; k < spec.dims; ++k) {
    for (int step : {-1, 1}) {
      std::array<int, 3> nb = c;
      nb[static_cast<std::size_t>(k)] += step;
      const int v = nb[static_cast<std::size_t>(k)];
      if (v < 0 || v >= spec.box) continue;
      fn(index_of(nb, spec), nb);
    }
  }
}

}  // namespace

void LatticeSpec::validate() const {
  if (dims < 1 || dims > 3) throw InvalidArgument("lattice dims must be 1..3");
  if (cube < 1 || cube > box) {
    throw InvalidArgument("lattice needs 1 <= cube (" + std::to_string(cube) +
                          ") <= box (" + std::to_string(box) + ")");
  }
  for (int k = 0; k < dims; ++k) {
    const int o = offset[static_cast<std::size_t>(k)];
    if (o < 0 || o + cube > box) {
      throw InvalidArgument("cube does not fit in the box along axis " +
                            std::to_string(k));
    }
  }
}

bool LatticeSpec::interior() const {
  for (int k = 0; k < dims; ++k) {
    const int o = offset[static_cast<std::size_t>(k)];
    if (o < 1 || o + cube > box - 1) return false;
  }
  return true;
}

int LatticeSpec::total_sites() const { return ipow(box, dims); }

int LatticeSpec::cube_sites() const { return ipow(cube, dims); }

LatticeLayout lattice_layout(const LatticeSpec& spec) {
  spec.validate();
  LatticeLayout layout;
  for (int i = 0; i < spec.total_sites(); ++i) {
    (in_cube(coords_of(i, spec), spec) ? layout.observable_sites
                                       : layout.hidden_sites)
        .push_back(i);
  }
  return layout;
}

BlockSystem build_lattice_system(const LatticeSpec& spec, double tol) {
  const LatticeLayout layout = lattice_layout(spec);
  const int total = spec.total_sites();

  // Position of each box site in the [H1 | H2] ordering.
  std::vector<int> position(static_cast<std::size_t>(total));
  const auto d1 = static_cast<Eigen::Index>(layout.observable_sites.size());
  for (std::size_t i = 0; i < layout.observable_sites.size(); ++i) {
    position[static_cast<std::size_t>(layout.observable_sites[i])] =
        static_cast<int>(i);
  }
  for (std::size_t i = 0; i < layout.hidden_sites.size(); ++i) {
    position[static_cast<std::size_t>(layout.hidden_sites[i])] =
        static_cast<int>(d1) + static_cast<int>(i);
  }

  Matrix omega = Matrix::Zero(total, total);
  for (int i = 0; i < total; ++i) {
    const int pi = position[static_cast<std::size_t>(i)];
    omega(pi, pi) = -2.0 * spec.dims;
    for_each_neighbour(i, spec, [&](int j, const std::array<int, 3>&) {
      omega(pi, position[static_cast<std::size_t>(j)]) = 1.0;
    });
  }
  FullOperator full{std::move(omega), d1, total - d1};
  return extract_blocks(full, tol);
}

int surface_count(int n, int dims) {
  if (n <= 0) throw InvalidArgument("surface_count needs N >= 1");
  if (dims < 1 || dims > 3) throw InvalidArgument("dims must be 1..3");
  if (n == 1) return 1;
  return ipow(n, dims) - ipow(n - 2, dims);
}

int multiplicity_bound(int n, int dims) { return 2 * surface_count(n, dims); }

int count_surface_sites(const LatticeSpec& spec) {
  const LatticeLayout layout = lattice_layout(spec);
  int count = 0;
  for (int site : layout.observable_sites) {
    bool touches = false;
    for_each_neighbour(site, spec, [&](int, const std::array<int, 3>& nb) {
      if (!in_cube(nb, spec)) touches = true;
    });
    if (touches) ++count;
  }
  return count;
}

LatticeReport verify_example(const LatticeSpec& spec, double tol,
                             double cluster_tol) {
  spec.validate();
  if (!spec.interior()) {
    throw InvalidArgument("verify_example needs a cube at distance >= 1 from "
                          "the box boundary");
  }
  const BlockSystem sys = build_lattice_system(spec, tol);

  LatticeReport report;
  report.spec = spec;
  report.surface = surface_count(spec.cube, spec.dims);
  report.surface_sites = count_surface_sites(spec);
  report.bound = multiplicity_bound(spec.cube, spec.dims);
  report.theorem = verify_theorem(sys, cluster_tol);
  report.rank_gamma = report.theorem.rank_gamma;
  report.rank_equals_surface = report.rank_gamma == report.surface;
  report.rank_within_surface = report.rank_gamma <= report.surface;
  report.multiplicity_within_bound =
      report.theorem.multiplicity_omega_c <= report.bound;
  report.hidden_decoupled_nonzero = report.theorem.dim_h2d > 0;
  return report;
}

}  // namespace opensub
