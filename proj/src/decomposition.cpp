#include "opensub/decomposition.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "opensub/errors.hpp"

namespace opensub {

namespace {

Matrix restrict_to(const Matrix& op, const SubspaceBasis& basis) {
  const Matrix& b = basis.matrix();
  const Matrix r = b.adjoint() * op * b;
  return 0.5 * (r + r.adjoint());
}

// orbit(Omega, side) (-) side, re-expressed in the other side's coordinates.
// `offset`/`count` locate the other side inside C^(d1+d2).
SubspaceBasis coupled_part(const HermitianSpectrum& omega,
                           const SubspaceBasis& side, Eigen::Index offset,
                           Eigen::Index count, double tol) {
  const SubspaceBasis grown = orbit(omega, side);
  const SubspaceBasis extra = complement(grown, side, tol);
  const Matrix& cols = extra.matrix();

  // The part of `extra` along `side` must vanish.
  const double leak = operator_norm(side.matrix().adjoint() * cols);
  if (leak > kCheckFactor * tol) {
    throw ConsistencyError(
        "coupled part has a component along the seed side: " +
            std::to_string(leak),
        leak, kCheckFactor * tol);
  }
  SubspaceBasis local = orthonormalize(Matrix(cols.middleRows(offset, count)),
                                       tol);
  if (local.dim() != extra.dim()) {
    throw ConsistencyError("coupled part lost dimension in local coordinates",
                           static_cast<double>(extra.dim()),
                           static_cast<double>(local.dim()));
  }
  return local;
}

// Eigendecompositions shared by every orbit computed for one system.
struct Spectra {
  HermitianSpectrum full;
  HermitianSpectrum side1;
  HermitianSpectrum side2;

  explicit Spectra(const BlockSystem& sys)
      : full(assemble_full(sys).omega, sys.tol()),
        side1(sys.omega1(), sys.tol()),
        side2(sys.omega2(), sys.tol()) {}
};

FourWayDecomposition decompose_unchecked(const BlockSystem& sys,
                                         const Spectra& spectra) {
  const double tol = sys.tol();
  const Eigen::Index d1 = sys.d1();
  const Eigen::Index d2 = sys.d2();
  const Eigen::Index n = d1 + d2;
  const HermitianSpectrum& omega = spectra.full;

  FourWayDecomposition dec;
  dec.tol = tol;
  dec.h2c = coupled_part(omega, SubspaceBasis::coordinate(n, 0, d1, tol), d1,
                         d2, tol);
  dec.h1c = coupled_part(omega, SubspaceBasis::coordinate(n, d1, d2, tol), 0,
                         d1, tol);
  dec.h1d = complement(SubspaceBasis::coordinate(d1, 0, d1, tol), dec.h1c, tol);
  dec.h2d = complement(SubspaceBasis::coordinate(d2, 0, d2, tol), dec.h2c, tol);

  // Second route: the coupled parts are the orbits of the coupling ranges
  // under the internal dynamics of each side.
  const SubspaceBasis via_gamma =
      orbit(spectra.side1, orthonormalize(sys.gamma(), tol));
  const SubspaceBasis via_gamma_h = orbit(
      spectra.side2, orthonormalize(Matrix(sys.gamma().adjoint()), tol));
  dec.h1c_route_distance = projector_distance(dec.h1c, via_gamma);
  dec.h2c_route_distance = projector_distance(dec.h2c, via_gamma_h);

  dec.omega1d = restrict_to(sys.omega1(), dec.h1d);
  dec.omega1c = restrict_to(sys.omega1(), dec.h1c);
  dec.omega2c = restrict_to(sys.omega2(), dec.h2c);
  dec.omega2d = restrict_to(sys.omega2(), dec.h2d);
  dec.gamma_c = dec.h1c.matrix().adjoint() * sys.gamma() * dec.h2c.matrix();
  return dec;
}

}  // namespace

Matrix FourWayDecomposition::full_basis() const {
  const Eigen::Index d1 = h1d.ambient_dim();
  const Eigen::Index d2 = h2d.ambient_dim();
  Matrix b = Matrix::Zero(d1 + d2, d1 + d2);
  Eigen::Index col = 0;
  for (const auto* part : {&h1d, &h1c}) {
    b.block(0, col, d1, part->dim()) = part->matrix();
    col += part->dim();
  }
  for (const auto* part : {&h2c, &h2d}) {
    b.block(d1, col, d2, part->dim()) = part->matrix();
    col += part->dim();
  }
  return b;
}

Matrix FourWayDecomposition::omega_c() const {
  const Eigen::Index a = h1c.dim();
  const Eigen::Index b = h2c.dim();
  Matrix m(a + b, a + b);
  m.topLeftCorner(a, a) = omega1c;
  m.topRightCorner(a, b) = gamma_c;
  m.bottomLeftCorner(b, a) = gamma_c.adjoint();
  m.bottomRightCorner(b, b) = omega2c;
  return m;
}

FourWayDecomposition decompose(const BlockSystem& sys) {
  FourWayDecomposition dec = decompose_unchecked(sys, Spectra(sys));
  const double limit = kCheckFactor * sys.tol();
  if (dec.h1c_route_distance > limit || dec.h2c_route_distance > limit) {
    throw ConsistencyError(
        "coupled subspaces disagree between the orbit-of-Omega and "
        "coupling-range routes (H1c: " +
            std::to_string(dec.h1c_route_distance) +
            ", H2c: " + std::to_string(dec.h2c_route_distance) + ")",
        dec.h1c_route_distance, dec.h2c_route_distance);
  }
  return dec;
}

double verify_block_form(const BlockSystem& sys,
                         const FourWayDecomposition& dec) {
  const Matrix omega = assemble_full(sys).omega;
  const Matrix b = dec.full_basis();
  const Matrix t = b.adjoint() * omega * b;

  const std::array<Eigen::Index, 4> sizes{dec.h1d.dim(), dec.h1c.dim(),
                                          dec.h2c.dim(), dec.h2d.dim()};
  std::array<Eigen::Index, 4> starts{};
  for (std::size_t i = 1; i < 4; ++i) starts[i] = starts[i - 1] + sizes[i - 1];

  // Only the diagonal blocks and the H1c/H2c coupling survive.
  auto allowed = [](std::size_t i, std::size_t j) {
    return i == j || (i == 1 && j == 2) || (i == 2 && j == 1);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (allowed(i, j) || sizes[i] == 0 || sizes[j] == 0) continue;
      worst = std::max(
          worst, operator_norm(t.block(starts[i], starts[j], sizes[i], sizes[j])));
    }
  }
  return worst;
}

SpectralClusters spectral_clusters(const Matrix& a, double cluster_tol) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix is not square");
  if (!(cluster_tol > 0.0)) throw InvalidArgument("cluster_tol must be > 0");
  SpectralClusters out;
  out.smallest_split_gap = std::numeric_limits<double>::infinity();
  if (a.rows() == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error("eigenvalue computation did not converge");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  out.threshold = cluster_tol * std::max(1.0, norm);

  Eigen::Index run = 1;
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    const double gap = ev(i) - ev(i - 1);
    if (gap <= out.threshold) {
      ++run;
      out.largest_merged_gap = std::max(out.largest_merged_gap, gap);
    } else {
      out.sizes.push_back(run);
      out.smallest_split_gap = std::min(out.smallest_split_gap, gap);
      run = 1;
    }
  }
  out.sizes.push_back(run);
  out.multiplicity = *std::max_element(out.sizes.begin(), out.sizes.end());
  return out;
}

Eigen::Index multiplicity(const Matrix& a, double cluster_tol) {
  return spectral_clusters(a, cluster_tol).multiplicity;
}

double TheoremReport::max_equality_distance() const {
  double worst = 0.0;
  for (const auto& d : orbit_equalities) worst = std::max(worst, d.value);
  return worst;
}

double TheoremReport::max_chain_distance() const {
  double worst = 0.0;
  for (const auto& d : proof_chain) worst = std::max(worst, d.value);
  return worst;
}

bool TheoremReport::passed() const {
  return max_equality_distance() <= threshold &&
         max_chain_distance() <= threshold &&
         block_form_residual <= threshold * std::max(1.0, omega_norm) &&
         bound_satisfied && reconstructible_core;
}

TheoremReport verify_theorem(const BlockSystem& sys, double cluster_tol) {
  const double tol = sys.tol();
  const Eigen::Index d1 = sys.d1();
  const Eigen::Index d2 = sys.d2();
  const Eigen::Index n = d1 + d2;
  const Matrix omega = assemble_full(sys).omega;
  const DecoupledParts parts = decoupled_parts(sys);
  const Spectra spectra(sys);
  const FourWayDecomposition dec = decompose_unchecked(sys, spectra);

  TheoremReport report;
  report.tol = tol;
  report.cluster_tol = cluster_tol;
  report.threshold = kCheckFactor * tol;
  report.omega_norm = operator_norm(omega);
  report.dim_h1d = dec.h1d.dim();
  report.dim_h1c = dec.h1c.dim();
  report.dim_h2c = dec.h2c.dim();
  report.dim_h2d = dec.h2d.dim();

  const SubspaceBasis h1c = embed(dec.h1c, n, 0);
  const SubspaceBasis h2c = embed(dec.h2c, n, d1);
  Matrix core_cols(n, h1c.dim() + h2c.dim());
  core_cols << h1c.matrix(), h2c.matrix();
  const SubspaceBasis core(std::move(core_cols), tol);

  const SubspaceBasis range_coupling = orthonormalize(parts.coupling, tol);
  const std::array<std::pair<const char*, SubspaceBasis>, 4> spaces{{
      {"H1c+H2c", core},
      {"O(H1c)", orbit(spectra.full, h1c)},
      {"O(H2c)", orbit(spectra.full, h2c)},
      {"O(Ran Gamma0)", orbit(spectra.full, range_coupling)},
  }};
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    for (std::size_t j = i + 1; j < spaces.size(); ++j) {
      report.orbit_equalities.push_back(
          {std::string(spaces[i].first) + " vs " + spaces[j].first,
           projector_distance(spaces[i].second, spaces[j].second)});
    }
  }

  const SubspaceBasis range_gamma = orthonormalize(sys.gamma(), tol);
  const SubspaceBasis range_gamma_h =
      orthonormalize(Matrix(sys.gamma().adjoint()), tol);
  const SubspaceBasis split_ranges =
      direct_sum(embed(range_gamma, n, 0), embed(range_gamma_h, n, d1), tol);
  const SubspaceBasis uncoupled_orbit =
      orbit(parts.uncoupled, range_coupling, tol);
  const SubspaceBasis split_orbits = direct_sum(
      embed(orbit(spectra.side1, range_gamma), n, 0),
      embed(orbit(spectra.side2, range_gamma_h), n, d1), tol);
  const double scale = std::max(1.0, report.omega_norm);
  report.proof_chain = {
      {"Ran Gamma0 vs Ran Gamma + Ran Gamma^H",
       projector_distance(range_coupling, split_ranges)},
      {"O(Ran Gamma0) vs O_uncoupled(Ran Gamma0)",
       projector_distance(spaces[3].second, uncoupled_orbit)},
      {"O_uncoupled(Ran Gamma0) vs O1(Ran Gamma) + O2(Ran Gamma^H)",
       projector_distance(uncoupled_orbit, split_orbits)},
      {"H1c vs O1(Ran Gamma)", dec.h1c_route_distance},
      {"H2c vs O2(Ran Gamma^H)", dec.h2c_route_distance},
      {"Ran Gamma inside H1c", containment_residual(dec.h1c, range_gamma)},
      {"Ran Gamma^H inside H2c", containment_residual(dec.h2c, range_gamma_h)},
      {"Omega-invariance of H1c+H2c (relative)",
       invariance_residual(omega, core) / scale},
  };

  report.block_form_residual = verify_block_form(sys, dec);
  report.rank_gamma = numeric_rank(sys.gamma(), tol);
  report.omega_c_clusters = spectral_clusters(dec.omega_c(), cluster_tol);
  report.multiplicity_omega_c = report.omega_c_clusters.multiplicity;
  report.bound = std::min({2 * report.rank_gamma, report.dim_h1c,
                           report.dim_h2c});
  report.bound_satisfied = report.multiplicity_omega_c <= report.bound;

  if (report.dim_h1c + report.dim_h2c > 0) {
    const BlockSystem core_sys(dec.omega1c, dec.omega2c, dec.gamma_c, tol);
    const FourWayDecomposition core_dec =
        decompose_unchecked(core_sys, Spectra(core_sys));
    report.reconstructible_core =
        core_dec.h1d.dim() == 0 && core_dec.h2d.dim() == 0;
  }
  return report;
}

bool is_reconstructible(const BlockSystem& sys) {
  const FourWayDecomposition dec = decompose(sys);
  return dec.h1d.dim() == 0 && dec.h2d.dim() == 0;
}

}  // namespace opensub
