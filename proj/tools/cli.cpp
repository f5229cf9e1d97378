#include "cli.hpp"

#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opensub/decomposition.hpp"
#include "opensub/dynamics.hpp"
#include "opensub/errors.hpp"
#include "opensub/io.hpp"
#include "opensub/lattice.hpp"
#include "opensub/system.hpp"

namespace opensub::cli {

namespace {

double default_tol() {
  if (const char* env = std::getenv(kTolEnv)) {
    try {
      const double v = std::stod(env);
      if (v > 0.0) return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string(kTolEnv) + " must be a positive number");
  }
  return kDefaultTol;
}

// Options shared by the commands that read a system file.
struct InputOptions {
  std::string input;
  std::string output;
  std::optional<double> tol;
};

struct GridOptions {
  double t_max = 10.0;
  long steps = 2000;
};

void add_input(CLI::App* cmd, InputOptions& o, bool output_required = false) {
  cmd->add_option("-i,--input", o.input, "System file (JSON)")->required();
  auto* out = cmd->add_option("-o,--output", o.output, "Output file");
  if (output_required) out->required();
  cmd->add_option("--tol", o.tol, "Relative tolerance (overrides the file)");
}

void add_grid(CLI::App* cmd, GridOptions& g) {
  cmd->add_option("--t-max", g.t_max, "Final time")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--steps", g.steps, "Number of time steps")
      ->check(CLI::Range(2L, 100000000L));
}

KernelSide parse_side(const std::string& s) {
  if (s == "observable" || s == "a1") return KernelSide::observable;
  if (s == "hidden" || s == "a2") return KernelSide::hidden;
  throw InvalidArgument("--side must be observable or hidden");
}

BlockSystem load(const InputOptions& o) {
  const BlockSystem sys = io::read_system_file(o.input);
  // --tol, then the environment, then the file.
  const double tol = o.tol                     ? *o.tol
                     : std::getenv(kTolEnv) != nullptr ? default_tol()
                                                       : sys.tol();
  return BlockSystem(sys.omega1(), sys.omega2(), sys.gamma(), tol);
}

// Deterministic unit vector used as the observable initial state.
Vector initial_state(Eigen::Index d, std::uint64_t seed) {
  UniformSource rng(seed);
  Vector v = rng.complex_vector(d);
  if (v.norm() > 0.0) v.normalize();
  return v;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    io::write_file_atomic(path, text);
  }
}

std::string dump(const io::Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Observable/hidden decomposition of conservative linear systems"};
  app.require_subcommand(1);

  // gen-random
  long d1 = 3, d2 = 5, rank = 1;
  std::uint64_t seed = 42;
  std::string output;
  std::optional<double> gen_tol;
  auto* gen_random = app.add_subcommand("gen-random", "Random block system");
  gen_random->add_option("--d1", d1, "Observable dimension")
      ->check(CLI::Range(1L, 100000L));
  gen_random->add_option("--d2", d2, "Hidden dimension")
      ->check(CLI::Range(1L, 100000L));
  gen_random->add_option("--rank", rank, "Coupling rank");
  gen_random->add_option("--seed", seed, "Generator seed");
  gen_random->add_option("-o,--output", output, "System file")->required();
  gen_random->add_option("--tol", gen_tol, "Tolerance stored in the file");

  // gen-lattice / verify-lattice
  LatticeSpec lattice;
  std::vector<int> offset;
  auto add_lattice = [&](CLI::App* cmd) {
    cmd->add_option("--box", lattice.box, "Sites per axis of the box (M)")
        ->required();
    cmd->add_option("--cube", lattice.cube, "Sites per axis of the cube (N)")
        ->required();
    cmd->add_option("--offset", offset,
                    "Low corner of the cube (default: centred)");
    cmd->add_option("--dims", lattice.dims, "Lattice dimension (1..3)")
        ->check(CLI::Range(1, 3));
    cmd->add_option("--tol", gen_tol, "Tolerance");
  };
  auto* gen_lattice =
      app.add_subcommand("gen-lattice", "Discrete Laplacian with a cube subsystem");
  add_lattice(gen_lattice);
  gen_lattice->add_option("-o,--output", output, "System file")->required();
  double cluster_tol = kDefaultClusterTol;
  auto* verify_lattice = app.add_subcommand(
      "verify-lattice", "Dimension and multiplicity checks for a lattice");
  add_lattice(verify_lattice);
  verify_lattice->add_option("-o,--output", output, "Report file");
  verify_lattice->add_option("--cluster-tol", cluster_tol,
                             "Relative eigenvalue merge gap");

  InputOptions in;
  auto* decompose_cmd =
      app.add_subcommand("decompose", "Four-way coupled/decoupled split");
  add_input(decompose_cmd, in);

  auto* verify_cmd =
      app.add_subcommand("verify-theorem", "Orbit equalities and multiplicity bound");
  add_input(verify_cmd, in);
  verify_cmd->add_option("--cluster-tol", cluster_tol,
                         "Relative eigenvalue merge gap");

  GridOptions grid_opts;
  std::string side_name = "observable";
  auto* kernel_cmd = app.add_subcommand("kernel", "Sample a delayed-response kernel");
  add_input(kernel_cmd, in);
  add_grid(kernel_cmd, grid_opts);
  kernel_cmd->add_option("--side", side_name, "observable (a1) or hidden (a2)");

  auto* full_cmd = app.add_subcommand("simulate-full", "Exact conservative propagation");
  add_input(full_cmd, in);
  add_grid(full_cmd, grid_opts);
  full_cmd->add_option("--seed", seed, "Seed of the observable initial state");

  auto* reduced_cmd =
      app.add_subcommand("simulate-reduced", "Open-system propagation with memory");
  add_input(reduced_cmd, in);
  add_grid(reduced_cmd, grid_opts);
  reduced_cmd->add_option("--seed", seed, "Seed of the observable initial state");

  std::optional<double> max_discrepancy;
  auto* compare_cmd =
      app.add_subcommand("compare", "Reduced vs. projected full dynamics");
  add_input(compare_cmd, in);
  add_grid(compare_cmd, grid_opts);
  compare_cmd->add_option("--seed", seed, "Seed of the observable initial state");
  compare_cmd->add_option("--max-discrepancy", max_discrepancy,
                          "Fail when the sup-norm gap exceeds this value");

  int trials = 50;
  GridOptions no_gain_grid{10.0, 400};
  auto* no_gain_cmd = app.add_subcommand("no-gain", "Dissipation-condition check");
  add_input(no_gain_cmd, in);
  add_grid(no_gain_cmd, no_gain_grid);
  no_gain_cmd->add_option("--side", side_name, "observable (a1) or hidden (a2)");
  no_gain_cmd->add_option("--trials", trials, "Number of random test signals")
      ->check(CLI::NonNegativeNumber);
  no_gain_cmd->add_option("--seed", seed, "Signal generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const double base_tol = gen_tol ? *gen_tol : default_tol();

    if (gen_random->parsed()) {
      const BlockSystem sys = random_system(d1, d2, rank, seed, base_tol);
      io::write_file_atomic(output, dump(io::system_to_json(sys)));
      return kExitOk;
    }

    if (gen_lattice->parsed() || verify_lattice->parsed()) {
      if (!offset.empty() && static_cast<int>(offset.size()) != lattice.dims) {
        throw InvalidArgument("--offset needs one entry per axis");
      }
      for (int k = 0; k < lattice.dims; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        lattice.offset[kk] =
            offset.empty() ? (lattice.box - lattice.cube) / 2 : offset[kk];
      }
      if (gen_lattice->parsed()) {
        const BlockSystem sys = build_lattice_system(lattice, base_tol);
        io::Json j = io::system_to_json(sys);
        j["lattice"] = io::lattice_metadata(lattice);
        io::write_file_atomic(output, dump(j));
        return kExitOk;
      }
      const LatticeReport report = verify_example(lattice, base_tol, cluster_tol);
      emit(output, dump(io::lattice_report(report)), out);
      if (!report.passed()) {
        err << "lattice verification failed: rank " << report.rank_gamma
            << " (surface " << report.surface << "), multiplicity "
            << report.theorem.multiplicity_omega_c << " (bound "
            << report.bound << "), max orbit distance "
            << report.theorem.max_equality_distance() << "\n";
        return kExitVerificationFailed;
      }
      return kExitOk;
    }

    const BlockSystem sys = load(in);

    if (decompose_cmd->parsed()) {
      const FourWayDecomposition dec = decompose(sys);
      const double block = verify_block_form(sys, dec);
      emit(in.output, dump(io::decomposition_report(sys, dec, block)), out);
      const double limit = kCheckFactor * sys.tol() *
                           std::max(1.0, operator_norm(assemble_full(sys).omega));
      if (block > limit) {
        err << "block form violated: residual " << block << " > " << limit
            << "\n";
        return kExitVerificationFailed;
      }
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      const TheoremReport report = verify_theorem(sys, cluster_tol);
      emit(in.output, dump(io::theorem_report(report)), out);
      for (const auto& d : report.orbit_equalities) {
        err << d.name << ": " << d.value << "\n";
      }
      if (!report.passed()) {
        err << "theorem check failed (threshold " << report.threshold
            << "): max equality distance " << report.max_equality_distance()
            << ", max chain distance " << report.max_chain_distance()
            << ", multiplicity " << report.multiplicity_omega_c << " vs bound "
            << report.bound << "\n";
        return kExitVerificationFailed;
      }
      return kExitOk;
    }

    const TimeGrid grid(grid_opts.t_max, grid_opts.steps);

    if (kernel_cmd->parsed()) {
      std::ostringstream csv;
      write_kernel_csv(csv, make_kernel(sys, parse_side(side_name)), grid);
      emit(in.output, csv.str(), out);
      return kExitOk;
    }

    if (full_cmd->parsed()) {
      Vector v0 = Vector::Zero(sys.dim());
      v0.head(sys.d1()) = initial_state(sys.d1(), seed);
      std::ostringstream csv;
      write_trajectory_csv(
          csv, propagate_full(assemble_full(sys), v0, ForcingSignal::zero(), grid));
      emit(in.output, csv.str(), out);
      return kExitOk;
    }

    if (reduced_cmd->parsed()) {
      std::ostringstream csv;
      write_trajectory_csv(csv, propagate_reduced(sys, initial_state(sys.d1(), seed),
                                                  ForcingSignal::zero(), grid));
      emit(in.output, csv.str(), out);
      return kExitOk;
    }

    if (compare_cmd->parsed()) {
      const ReductionComparison cmp =
          compare_reduction(sys, initial_state(sys.d1(), seed), grid);
      io::Json j = io::comparison_report(cmp, grid, sys.tol());
      if (max_discrepancy) j["max_discrepancy"] = *max_discrepancy;
      emit(in.output, dump(j), out);
      err << "sup-norm discrepancy " << cmp.coarse_error << " (h = "
          << cmp.coarse_step << "), " << cmp.fine_error
          << " (h/2), order " << cmp.order << "\n";
      if (max_discrepancy && cmp.coarse_error > *max_discrepancy) {
        err << "discrepancy exceeds " << *max_discrepancy << "\n";
        return kExitVerificationFailed;
      }
      return kExitOk;
    }

    if (no_gain_cmd->parsed()) {
      const TimeGrid ng_grid(no_gain_grid.t_max, no_gain_grid.steps);
      const KernelSide side = parse_side(side_name);
      const NoGainResult result =
          no_gain_check(make_kernel(sys, side), trials, ng_grid, seed);
      emit(in.output,
           dump(io::no_gain_report(result, ng_grid, side, trials, seed,
                                     sys.tol())),
           out);
      if (!result.passed()) {
        err << "no-gain violated: min " << result.min_value << " < -"
            << result.epsilon_quad << "\n";
        return kExitVerificationFailed;
      }
      return kExitOk;
    }
  } catch (const ConsistencyError& e) {
    err << "verification failed: " << e.what() << " (" << e.first() << ", "
        << e.second() << ")\n";
    return kExitVerificationFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace opensub::cli
