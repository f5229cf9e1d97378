#include "opensub/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "opensub/errors.hpp"

namespace opensub {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::VectorXcd phases(const Eigen::VectorXd& eigvals, double t) {
  return (-kI * t * eigvals.cast<Complex>()).array().exp();
}

// Forcing sample n embedded into a space of dimension `dim` whose observable
// part has size d1; zero when the signal is zero.
Vector forcing_sample(const ForcingSignal& f, Eigen::Index n, Eigen::Index dim,
                      Eigen::Index d1) {
  Vector out = Vector::Zero(dim);
  if (f.is_zero()) return out;
  const Vector& s = f.samples[static_cast<std::size_t>(n)];
  switch (f.target) {
    case ForcingTarget::full:
      out = s;
      break;
    case ForcingTarget::observable:
      out.head(s.size()) = s;
      break;
    case ForcingTarget::hidden:
      out.segment(d1, s.size()) = s;
      break;
  }
  return out;
}

void check_forcing(const ForcingSignal& f, const TimeGrid& grid,
                   Eigen::Index expected_len) {
  if (f.is_zero()) return;
  if (static_cast<Eigen::Index>(f.samples.size()) != grid.size()) {
    throw DimensionMismatch("forcing has " + std::to_string(f.samples.size()) +
                            " samples for a grid of " +
                            std::to_string(grid.size()) + " points");
  }
  for (const auto& s : f.samples) {
    if (s.size() != expected_len) {
      throw DimensionMismatch("forcing sample of length " +
                              std::to_string(s.size()) + ", expected " +
                              std::to_string(expected_len));
    }
  }
}

}  // namespace

Matrix ResponseKernel::at(double t) const {
  return coupling_modes * phases(eigvals, t).asDiagonal() *
         coupling_modes.adjoint();
}

double ResponseKernel::derivative_bound(int order) const {
  const double m = operator_norm(coupling_modes);
  const double rho =
      eigvals.size() == 0 ? 0.0 : eigvals.cwiseAbs().maxCoeff();
  return m * m * std::pow(rho, order);
}

ResponseKernel make_kernel(const BlockSystem& sys, KernelSide side) {
  const bool observable = side == KernelSide::observable;
  const Matrix& eliminated = observable ? sys.omega2() : sys.omega1();
  ResponseKernel kernel;
  kernel.side = side;
  if (eliminated.rows() == 0) {
    kernel.eigvals.resize(0);
    kernel.coupling_modes =
        Matrix::Zero(observable ? sys.d1() : sys.d2(), 0);
    return kernel;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(eliminated);
  if (solver.info() != Eigen::Success) {
    throw Error("make_kernel: eigendecomposition failed");
  }
  kernel.eigvals = solver.eigenvalues();
  kernel.coupling_modes = observable
                              ? Matrix(sys.gamma() * solver.eigenvectors())
                              : Matrix(sys.gamma().adjoint() *
                                       solver.eigenvectors());
  return kernel;
}

TimeGrid::TimeGrid(double t_max, Eigen::Index steps)
    : t_max_(t_max), steps_(steps) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw InvalidArgument("time grid needs t_max > 0");
  }
  if (steps < 1) throw InvalidArgument("time grid needs at least one step");
}

TimeGrid TimeGrid::from_times(const std::vector<double>& times) {
  if (times.size() < 2) throw InvalidArgument("time grid needs two points");
  if (times.front() != 0.0) throw InvalidArgument("time grid must start at 0");
  const auto steps = static_cast<Eigen::Index>(times.size() - 1);
  TimeGrid grid(times.back(), steps);
  const double h = grid.step();
  for (std::size_t n = 1; n < times.size(); ++n) {
    const double gap = times[n] - times[n - 1];
    if (std::abs(gap - h) > 1e-9 * h) {
      throw InvalidArgument("time grid is not uniform at index " +
                            std::to_string(n));
    }
  }
  return grid;
}

double TimeGrid::time(Eigen::Index n) const {
  return n == steps_ ? t_max_ : static_cast<double>(n) * step();
}

TimeGrid TimeGrid::refined(Eigen::Index factor) const {
  return TimeGrid(t_max_, steps_ * factor);
}

Trajectory Trajectory::slice(Eigen::Index offset, Eigen::Index count) const {
  if (offset < 0 || offset + count > space_dim) {
    throw DimensionMismatch("trajectory slice out of range");
  }
  Trajectory out{times, {}, count};
  out.states.reserve(states.size());
  for (const auto& s : states) out.states.emplace_back(s.segment(offset, count));
  return out;
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size() || a.space_dim != b.space_dim) {
    throw DimensionMismatch("trajectories on different grids or spaces");
  }
  double worst = 0.0;
  for (std::size_t n = 0; n < a.states.size(); ++n) {
    worst = std::max(worst, (a.states[n] - b.states[n]).norm());
  }
  return worst;
}

Trajectory propagate_full(const FullOperator& omega, const Vector& v0,
                          const ForcingSignal& forcing, const TimeGrid& grid) {
  const Eigen::Index n = omega.omega.rows();
  if (omega.omega.cols() != n || omega.d1 + omega.d2 != n) {
    throw DimensionMismatch("propagate_full: malformed operator");
  }
  if (v0.size() != n) {
    throw DimensionMismatch("propagate_full: initial state has length " +
                            std::to_string(v0.size()) + ", expected " +
                            std::to_string(n));
  }
  const Eigen::Index forcing_len = forcing.target == ForcingTarget::full
                                       ? n
                                       : forcing.target ==
                                                 ForcingTarget::observable
                                             ? omega.d1
                                             : omega.d2;
  check_forcing(forcing, grid, forcing_len);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(omega.omega);
  if (solver.info() != Eigen::Success) {
    throw Error("propagate_full: eigendecomposition failed");
  }
  const Matrix& u = solver.eigenvectors();
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const Vector w0 = u.adjoint() * v0;
  const double h = grid.step();
  const Eigen::VectorXcd step_phase = phases(lambda, h);

  Trajectory traj;
  traj.space_dim = n;
  traj.times.reserve(static_cast<std::size_t>(grid.size()));
  traj.states.reserve(static_cast<std::size_t>(grid.size()));

  // Modal coordinates: homogeneous part exact, Duhamel term by trapezoid.
  Vector duhamel = Vector::Zero(n);
  Vector prev_g = forcing.is_zero()
                      ? Vector(Vector::Zero(n))
                      : Vector(u.adjoint() * forcing_sample(forcing, 0, n,
                                                            omega.d1));
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    Vector w = phases(lambda, t).cwiseProduct(w0);
    if (!forcing.is_zero() && k > 0) {
      const Vector g = u.adjoint() * forcing_sample(forcing, k, n, omega.d1);
      duhamel = step_phase.cwiseProduct(duhamel) +
                (0.5 * h) * (step_phase.cwiseProduct(prev_g) + g);
      prev_g = g;
    }
    if (!forcing.is_zero()) w += duhamel;
    traj.times.push_back(t);
    traj.states.emplace_back(u * w);
  }
  return traj;
}

Trajectory propagate_reduced(const BlockSystem& sys, const Vector& v1_0,
                             const ForcingSignal& f1, const TimeGrid& grid) {
  const Eigen::Index d = sys.d1();
  if (v1_0.size() != d) {
    throw DimensionMismatch("propagate_reduced: initial state has length " +
                            std::to_string(v1_0.size()) + ", expected " +
                            std::to_string(d));
  }
  if (!f1.is_zero() && f1.target != ForcingTarget::observable) {
    throw InvalidArgument(
        "propagate_reduced: only observable forcing is allowed (f2 = 0)");
  }
  check_forcing(f1, grid, d);

  const Eigen::Index count = grid.size();
  const double h = grid.step();
  const ResponseKernel kernel = make_kernel(sys, KernelSide::observable);

  // Kernel samples as one block row [a(t_0) a(t_1) ... a(t_N)] and the
  // history stored back to front, so the memory sum
  //     sum_{j=1..n} a(t_j) v_{n+1-j}
  // is a single product of a prefix of the row with a contiguous segment.
  Matrix samples(d, d * count);
  for (Eigen::Index j = 0; j < count; ++j) {
    samples.middleCols(j * d, d) = kernel.at(grid.time(j));
  }
  const Matrix a0 = samples.leftCols(d);
  Vector history = Vector::Zero(d * count);
  auto slot = [&](Eigen::Index n) { return (count - 1 - n) * d; };

  const Matrix generator = -kI * sys.omega1();
  auto force = [&](Eigen::Index n) -> Vector {
    return f1.is_zero() ? Vector(Vector::Zero(d))
                        : f1.samples[static_cast<std::size_t>(n)];
  };

  Trajectory traj;
  traj.space_dim = d;
  traj.times.reserve(static_cast<std::size_t>(count));
  traj.states.reserve(static_cast<std::size_t>(count));

  Vector v = v1_0;
  history.segment(slot(0), d) = v;
  traj.times.push_back(0.0);
  traj.states.push_back(v);
  // Memory integral at t_0 is over an empty interval.
  Vector rate = generator * v + force(0);

  for (Eigen::Index n = 0; n + 1 < count; ++n) {
    // Trapezoidal memory at t_{n+1} without its tau = 0 term.
    Vector lagged = samples.middleCols(d, d * (n + 1)) *
                    history.segment(slot(n), d * (n + 1));
    lagged -= 0.5 * samples.middleCols(d * (n + 1), d) * v1_0;
    lagged *= h;

    const Vector predicted = v + h * rate;
    const Vector predicted_rate = generator * predicted -
                                  (lagged + 0.5 * h * (a0 * predicted)) +
                                  force(n + 1);
    v += 0.5 * h * (rate + predicted_rate);
    rate = generator * v - (lagged + 0.5 * h * (a0 * v)) + force(n + 1);

    history.segment(slot(n + 1), d) = v;
    traj.times.push_back(grid.time(n + 1));
    traj.states.push_back(v);
  }
  return traj;
}

double reduction_discrepancy(const BlockSystem& sys, const Vector& v1_0,
                             const TimeGrid& grid) {
  Vector v0 = Vector::Zero(sys.dim());
  v0.head(sys.d1()) = v1_0;
  const Trajectory full =
      propagate_full(assemble_full(sys), v0, ForcingSignal::zero(), grid);
  const Trajectory reduced =
      propagate_reduced(sys, v1_0, ForcingSignal::zero(), grid);
  return sup_distance(full.slice(0, sys.d1()), reduced);
}

ReductionComparison compare_reduction(const BlockSystem& sys,
                                      const Vector& v1_0,
                                      const TimeGrid& grid) {
  ReductionComparison out;
  out.coarse_step = grid.step();
  out.coarse_error = reduction_discrepancy(sys, v1_0, grid);
  out.fine_error = reduction_discrepancy(sys, v1_0, grid.refined(2));
  out.order = (out.coarse_error > 0.0 && out.fine_error > 0.0)
                  ? std::log2(out.coarse_error / out.fine_error)
                  : 0.0;
  return out;
}

Vector BumpSignal::at(double t, int derivative) const {
  Vector out = Vector::Zero(dim);
  for (const auto& b : bumps) {
    const double s = (t - b.center) / b.half_width;
    if (std::abs(s) >= 1.0) continue;
    const double q = 1.0 - s * s;
    const double w = b.half_width;
    const double phi = q * q * q * q;
    const double dphi = -8.0 * s * q * q * q / w;
    const double ddphi = (-8.0 * q * q * q + 48.0 * s * s * q * q) / (w * w);
    const Complex osc = std::exp(-kI * b.frequency * t);
    const Complex iw = -kI * b.frequency;
    Complex factor;
    switch (derivative) {
      case 0:
        factor = phi;
        break;
      case 1:
        factor = dphi + iw * phi;
        break;
      case 2:
        factor = ddphi + 2.0 * iw * dphi + iw * iw * phi;
        break;
      default:
        throw InvalidArgument("BumpSignal: derivative order must be 0..2");
    }
    out += (factor * osc) * b.amplitude;
  }
  return out;
}

BumpSignal BumpSignal::random(Eigen::Index dim, double t_max,
                              double max_frequency, UniformSource& rng) {
  BumpSignal sig;
  sig.dim = dim;
  const int count = 1 + static_cast<int>(rng.unit() * 3.0);
  const double lo = 0.05 * t_max;
  const double hi = 0.95 * t_max;
  for (int k = 0; k < count; ++k) {
    BumpSignal::Bump b;
    const double a = lo + (hi - lo) * rng.unit();
    const double c = lo + (hi - lo) * rng.unit();
    const double left = std::min(a, c);
    const double right = std::max(a, c);
    // Keep bumps resolvable: at least 10% of the window.
    const double width = std::max(right - left, 0.1 * (hi - lo));
    b.center = std::clamp(0.5 * (left + right), lo + 0.5 * width,
                          hi - 0.5 * width);
    b.half_width = 0.5 * width;
    b.frequency = max_frequency * rng.symmetric();
    b.amplitude = rng.complex_vector(dim);
    if (b.amplitude.norm() > 0.0) b.amplitude.normalize();
    sig.bumps.push_back(std::move(b));
  }
  return sig;
}

double no_gain_form(const ResponseKernel& kernel, const BumpSignal& signal,
                    const TimeGrid& grid) {
  if (signal.dim != kernel.dim()) {
    throw DimensionMismatch("no_gain_form: signal and kernel dimensions");
  }
  const Eigen::Index modes = kernel.eigvals.size();
  const Eigen::Index last = grid.steps();
  const double h = grid.step();
  if (modes == 0) return 0.0;

  // With u_n = M^H v(t_n) and E = diag(exp(-i lambda h)):
  //   y_n = u_n + E y_{n-1} = sum_{j<=n} E^j u_{n-j},
  //   z_n = y_n - u_n / 2 - E^n u_0 / 2   (trapezoid in tau, z_0 = 0),
  //   Q   = Re h^2 sum_n w_n u_n^H z_n    (trapezoid in t).
  const Eigen::VectorXcd step_phase = phases(kernel.eigvals, h);
  const Vector u0 = kernel.coupling_modes.adjoint() * signal.at(0.0);
  Vector y = Vector::Zero(modes);
  double sum = 0.0;
  for (Eigen::Index n = 0; n <= last; ++n) {
    const double t = grid.time(n);
    const Vector u = kernel.coupling_modes.adjoint() * signal.at(t);
    y = u + step_phase.cwiseProduct(y);
    if (n == 0) continue;
    const Vector z = y - 0.5 * u - 0.5 * phases(kernel.eigvals, t).cwiseProduct(u0);
    const double weight = n == last ? 0.5 : 1.0;
    sum += weight * u.dot(z).real();
  }
  return h * h * sum;
}

NoGainResult no_gain_check(const ResponseKernel& kernel, int trials,
                           const TimeGrid& grid, std::uint64_t seed) {
  if (trials < 0) throw InvalidArgument("no_gain_check: trials >= 0");
  const double rho =
      kernel.eigvals.size() == 0 ? 0.0 : kernel.eigvals.cwiseAbs().maxCoeff();
  const double a0 = kernel.derivative_bound(0);
  const double a1 = kernel.derivative_bound(1);
  const double a2 = kernel.derivative_bound(2);
  const double h = grid.step();
  const double span = grid.t_max();

  UniformSource rng(seed);
  NoGainResult result;
  result.min_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    const BumpSignal sig =
        BumpSignal::random(kernel.dim(), span, rho + 1.0, rng);

    // Signal derivative sup-norms, sampled four times finer than the grid.
    const TimeGrid fine = grid.refined(4);
    double v0 = 0.0, v1 = 0.0, v2 = 0.0, l1 = 0.0;
    for (Eigen::Index n = 0; n < fine.size(); ++n) {
      const double t = fine.time(n);
      v0 = std::max(v0, sig.at(t, 0).norm());
      v1 = std::max(v1, sig.at(t, 1).norm());
      v2 = std::max(v2, sig.at(t, 2).norm());
    }
    for (Eigen::Index n = 0; n < grid.size(); ++n) {
      l1 += h * sig.at(grid.time(n)).norm();
    }
    const double g_tt = a0 * (2.0 * v0 * v2 + 2.0 * v1 * v1);
    const double g_ss = v0 * (a2 * v0 + 2.0 * a1 * v1 + a0 * v2);

    NoGainTrial trial;
    trial.value = no_gain_form(kernel, sig, grid);
    trial.quadrature_bound = span * span * h * h / 12.0 * (g_tt + g_ss);
    trial.roundoff_bound = 64.0 * std::numeric_limits<double>::epsilon() *
                           static_cast<double>(grid.size()) * l1 * l1 * a0;
    result.min_value = std::min(result.min_value, trial.value);
    result.epsilon_quad = std::max(
        result.epsilon_quad, trial.quadrature_bound + trial.roundoff_bound);
    result.negative_excursion =
        std::max(result.negative_excursion,
                 std::max(0.0, -trial.value - trial.roundoff_bound));
    result.trials.push_back(trial);
  }
  if (trials == 0) result.min_value = 0.0;
  return result;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "time";
  for (Eigen::Index i = 0; i < traj.space_dim; ++i) {
    out << ",re" << i << ",im" << i;
  }
  out << '\n' << std::setprecision(17);
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    out << traj.times[n];
    for (Eigen::Index i = 0; i < traj.space_dim; ++i) {
      out << ',' << traj.states[n](i).real() << ',' << traj.states[n](i).imag();
    }
    out << '\n';
  }
}

void write_kernel_csv(std::ostream& out, const ResponseKernel& kernel,
                      const TimeGrid& grid) {
  const Eigen::Index d = kernel.dim();
  out << 't';
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out << ",a_" << i << '_' << j << "_re,a_" << i << '_' << j << "_im";
    }
  }
  out << '\n' << std::setprecision(17);
  for (Eigen::Index n = 0; n < grid.size(); ++n) {
    const double t = grid.time(n);
    const Matrix a = kernel.at(t);
    out << t;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        out << ',' << a(i, j).real() << ',' << a(i, j).imag();
      }
    }
    out << '\n';
  }
}

}  // namespace opensub
