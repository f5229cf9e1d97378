#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "opensub/subspace.hpp"
#include "opensub/system.hpp"

namespace opensub {

// Which variables are eliminated. `observable` is the kernel seen by H1,
//     a1(t) = gamma exp(-i omega2 t) gamma^H,
// `hidden` the one seen by H2,
//     a2(t) = gamma^H exp(-i omega1 t) gamma.
enum class KernelSide { observable, hidden };

// Delayed-response kernel in spectral form a(t) = M diag(exp(-i lambda t)) M^H.
struct ResponseKernel {
  KernelSide side = KernelSide::observable;
  Eigen::VectorXd eigvals;  // spectrum of the eliminated block
  Matrix coupling_modes;    // M = gamma U (observable) or gamma^H U (hidden)

  Eigen::Index dim() const { return coupling_modes.rows(); }
  Matrix at(double t) const;
  // Bound on ||d^k a / dt^k|| valid for all t: ||M||^2 * max|lambda|^k.
  double derivative_bound(int order) const;
};

ResponseKernel make_kernel(const BlockSystem& sys, KernelSide side);

// Uniform grid t_n = n * t_max / steps, n = 0..steps.
class TimeGrid {
 public:
  TimeGrid(double t_max, Eigen::Index steps);
  // Accepts explicit sample times; they must start at 0 and be uniformly
  // spaced (relative deviation <= 1e-9), otherwise InvalidArgument.
  static TimeGrid from_times(const std::vector<double>& times);

  double t_max() const { return t_max_; }
  Eigen::Index steps() const { return steps_; }
  Eigen::Index size() const { return steps_ + 1; }
  double step() const { return t_max_ / static_cast<double>(steps_); }
  double time(Eigen::Index n) const;
  TimeGrid refined(Eigen::Index factor = 2) const;

 private:
  double t_max_;
  Eigen::Index steps_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  Eigen::Index space_dim = 0;

  // Components [offset, offset + count) of every state.
  Trajectory slice(Eigen::Index offset, Eigen::Index count) const;
};

// Largest ||a(t_n) - b(t_n)|| over the common grid.
double sup_distance(const Trajectory& a, const Trajectory& b);

enum class ForcingTarget { full, observable, hidden };

// External forcing sampled on a grid; no samples means F = 0.
struct ForcingSignal {
  ForcingTarget target = ForcingTarget::full;
  std::vector<Vector> samples;

  static ForcingSignal zero(ForcingTarget target = ForcingTarget::full) {
    return {target, {}};
  }
  bool is_zero() const { return samples.empty(); }
};

// dV/dt = -i Omega V + F. The homogeneous part is propagated exactly in the
// eigenbasis of Omega; the Duhamel integral of F uses the trapezoidal rule on
// the grid. Observable or hidden forcing is embedded in the full space.
Trajectory propagate_full(const FullOperator& omega, const Vector& v0,
                          const ForcingSignal& forcing, const TimeGrid& grid);

// dv1/dt = -i omega1 v1 - int_0^t a1(tau) v1(t - tau) dtau + f1(t),
// assuming v2(0) = 0, f2 = 0 and v1 = 0 before t = 0, so the memory integral
// over [0, inf) truncates to [0, t].
//
// Time stepping is Heun's method (explicit trapezoidal, second order); the
// memory integral is the composite trapezoidal rule on the grid with the
// exact kernel samples a1(t_j). The new state enters the memory sum only
// through the tau = 0 end point, where the predictor is used.
Trajectory propagate_reduced(const BlockSystem& sys, const Vector& v1_0,
                             const ForcingSignal& f1, const TimeGrid& grid);

struct ReductionComparison {
  double coarse_error = 0.0;  // sup-norm on `grid`
  double fine_error = 0.0;    // sup-norm on grid.refined(2)
  double order = 0.0;         // log2(coarse_error / fine_error)
  double coarse_step = 0.0;
};

// Sup-norm gap between propagate_reduced and the H1 block of
// propagate_full (unforced, hidden part starting at rest).
double reduction_discrepancy(const BlockSystem& sys, const Vector& v1_0,
                             const TimeGrid& grid);

// Runs reduction_discrepancy on `grid` and on the twice finer grid.
ReductionComparison compare_reduction(const BlockSystem& sys,
                                      const Vector& v1_0, const TimeGrid& grid);

// Compactly supported test signal: a sum of polynomial bumps
//     v(t) = sum_b (1 - ((t - c_b)/w_b)^2)^4 exp(-i omega_b t) amp_b
// (zero outside |t - c_b| < w_b), with closed-form derivatives.
struct BumpSignal {
  struct Bump {
    double center = 0.0;
    double half_width = 1.0;
    double frequency = 0.0;
    Vector amplitude;
  };
  std::vector<Bump> bumps;
  Eigen::Index dim = 0;

  // derivative order 0, 1 or 2
  Vector at(double t, int derivative = 0) const;

  // Random signal supported in [0.05 t_max, 0.95 t_max].
  static BumpSignal random(Eigen::Index dim, double t_max,
                           double max_frequency, UniformSource& rng);
};

// Trapezoidal value of Re int_0^inf int_0^inf v(t)^H a(tau) v(t - tau) dt dtau
// on the grid, with v = 0 for t < 0. Evaluated through the modal recursion of
// the spectral kernel, which reproduces the plain double sum exactly.
double no_gain_form(const ResponseKernel& kernel, const BumpSignal& signal,
                    const TimeGrid& grid);

struct NoGainTrial {
  double value = 0.0;
  // A-priori trapezoid error bound T^2 h^2 / 12 (|g_tt| + |g_tautau|), from
  // the kernel derivative bounds and the signal derivative sup-norms.
  double quadrature_bound = 0.0;
  // Floating-point allowance: 64 * eps * (steps + 1) * (h sum |v|)^2 ||a||.
  double roundoff_bound = 0.0;
};

struct NoGainResult {
  std::vector<NoGainTrial> trials;
  double min_value = 0.0;
  // max over trials of quadrature_bound + roundoff_bound
  double epsilon_quad = 0.0;
  // max over trials of max(0, -value - roundoff_bound)
  double negative_excursion = 0.0;

  bool passed() const { return min_value >= -epsilon_quad; }
};

NoGainResult no_gain_check(const ResponseKernel& kernel, int trials,
                           const TimeGrid& grid, std::uint64_t seed);

// CSV: header "time,re0,im0,re1,im1,...", one row per grid point.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
// CSV: header "t,a_0_0_re,a_0_0_im,...", row-major matrix entries.
void write_kernel_csv(std::ostream& out, const ResponseKernel& kernel,
                      const TimeGrid& grid);

}  // namespace opensub
