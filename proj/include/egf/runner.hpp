#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "egf/flow.hpp"
#include "egf/invariants.hpp"
#include "egf/io.hpp"
#include "egf/scenario.hpp"

namespace egf {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitHypothesis = 3,
  kExitNumerical = 4,
};

/// Command-line overrides applied on top of a scenario file.
struct RunOptions {
  std::optional<std::string> out;
  std::optional<int> grid;
  bool no_oracle = false;
  bool plot = false;
};

inline const std::set<std::string>& known_checks() {
  static const std::set<std::string> names{
      "divergence_identity", "codim1_identity",  "harmonic_rigidity", "preservation",
      "decay_rate",          "normalization_rate", "volume_drift",    "rescaling",
      "oracle",              "limit_average",    "prescribed_limit",  "monotonicity",
      "volume_ode",          "bperp_scaling",    "uniform_equivalence"};
  return names;
}

/// Everything a scenario run needs, validated before any flow work.
struct PreparedRun {
  ScenarioConfig config;
  ProductState initial;
  std::optional<ProductScalar> tau1;
};

inline PreparedRun prepare(ScenarioConfig config, const RunOptions& opts) {
  if (opts.grid) {
    config.base_points = *opts.grid;
    config.fiber_points = *opts.grid;
  }
  if (opts.out) config.out = *opts.out;
  if (opts.plot) config.plot = true;
  if (opts.no_oracle) config.flow.oracle_check = false;

  for (const auto& c : config.checks) {
    if (!known_checks().count(c.name)) throw InputError("unknown check '" + c.name + "'");
    if (c.name == "oracle" && !config.flow.oracle_check && !opts.no_oracle) {
      throw InputError("the oracle check needs flow.oracleCheck = true");
    }
    const bool normalized = config.flow.variant == FlowVariant::normalized;
    if ((c.name == "volume_ode" || c.name == "bperp_scaling" || c.name == "monotonicity") &&
        normalized) {
      throw InputError("check '" + c.name + "' applies to unnormalised runs");
    }
    if (c.name == "limit_average" && config.flow.variant != FlowVariant::plain) {
      throw InputError("limit_average applies to plain runs");
    }
    if (c.name == "prescribed_limit" && config.flow.variant != FlowVariant::prescribed) {
      throw InputError("prescribed_limit applies to prescribed runs");
    }
    if (c.name == "rescaling" && config.flow.variant == FlowVariant::prescribed) {
      throw InputError("rescaling compares plain and normalized runs");
    }
    if (c.name == "codim1_identity" && config.p != 1) {
      throw InputError("codim1_identity needs p = 1");
    }
  }

  const ProductGrid g = scenario_grid(config);
  PreparedRun run{config, ProductState::flat(g), std::nullopt};
  const ProductScalar psi = config.psi.empty() ? ProductScalar(g) : sample_series(config.psi, config, g);
  if (config.kind == ScenarioKind::codim1_fibration) {
    run.tau1 = sample_series(config.tau1, config, g);
  } else {
    run.initial = ProductState(sample_series(config.phi0, config, g), psi);
  }
  if (config.X.size() == static_cast<std::size_t>(config.p)) {
    ProductVector x(g, Along::fiber);
    for (int a = 0; a < config.p; ++a) x.comps[a] = sample_series(config.X[a], config, g);
    run.config.flow.X = x;
  }
  if (!run.tau1) run.config.flow.validate(run.initial);
  if (!run.initial.psi.fiberwise_constant()) {
    for (const auto& c : config.checks) {
      if (c.name == "volume_ode" || c.name == "bperp_scaling" || c.name == "monotonicity") {
        throw InputError("check '" + c.name + "' needs psi constant along each fibre");
      }
    }
  }
  return run;
}

inline Trajectory execute(const PreparedRun& run) {
  if (run.tau1) return run_codim1(*run.tau1, run.config.flow);
  return run_egf(run.initial, run.config.flow);
}

namespace detail {

inline ProductScalar fiber_test_function(const ProductGrid& g) {
  const double len = g.fiber.side(0);
  return ProductScalar::sample(g, [len](auto, auto y) { return std::sin(kTwoPi * y[0] / len); });
}

}  // namespace detail

/// Runs the requested checks against a finished trajectory.
inline std::vector<CheckReport> run_checks(const PreparedRun& run, const Trajectory& traj) {
  std::vector<CheckReport> out;
  const auto& flow_cfg = run.config.flow;
  const std::optional<ProductVector>& x = traj.X;
  std::vector<double> times;
  for (const auto& s : traj.states) times.push_back(s.t);
  const ProductState& initial = traj.states.front();
  std::optional<SpectralFlow> spectral;
  if (traj.method == EvolutionMethod::spectral) spectral.emplace(initial, x);

  for (const auto& req : run.config.checks) {
    const auto tol = [&](double fallback) { return req.tolerance.value_or(fallback); };
    const std::string& name = req.name;
    if (name == "divergence_identity") {
      const ProductScalar f = detail::fiber_test_function(initial.grid);
      for (const auto& s : traj.states) {
        out.push_back(check_divergence_identity(s, twisted_mean_curvature(s), tol(1e-8)));
        out.back().name = "divergence_identity_h";
        out.push_back(check_divergence_identity(s, grad_perp(f, s), tol(1e-8)));
        out.back().name = "divergence_identity_grad";
      }
    } else if (name == "codim1_identity") {
      for (const auto& s : traj.states) {
        out.push_back(check_codim1_identity(s, ProductScalar(s.grid, 1.0), tol(1e-8)));
        out.back().name = "codim1_identity_reeb";
        out.push_back(check_codim1_identity(s, codim1_tau(s), tol(1e-8)));
        out.back().name = "codim1_identity_tau";
      }
    } else if (name == "harmonic_rigidity") {
      const ProductScalar f = detail::fiber_test_function(initial.grid);
      for (const auto& s : traj.states) {
        out.push_back(check_harmonic_function_rigidity(s, f, tol(1e-8)));
      }
    } else if (name == "preservation") {
      const auto reps = check_preservation(traj, tol(1e-10), tol(1e-10));
      out.insert(out.end(), reps.begin(), reps.end());
    } else if (name == "decay_rate") {
      if (req.expected) {
        out.push_back(check_decay_rate(traj, *req.expected, tol(0.01), req.t_min));
      } else {
        // Contract without an expected rate: slope ≤ -a_min λ₁ (within 2%).
        double a_min = 1.0;
        if (spectral) {
          const auto& a = spectral->diffusivity();
          a_min = *std::min_element(a.begin(), a.end());
        }
        const double bound = a_min * spectral_gap(initial.grid.fiber);
        const double slope = estimate_decay_rate(traj, req.t_min);
        out.push_back(make_report("decay_rate_bound", std::max(0.0, slope + bound),
                                  tol(0.02 * bound), traj.states.back().t));
      }
    } else if (name == "normalization_rate") {
      for (const auto& s : traj.states) {
        const auto reps = check_normalization_rate(s, tol(1e-8));
        out.insert(out.end(), reps.begin(), reps.end());
      }
    } else if (name == "volume_drift") {
      const auto reps = check_volume_drift(traj, tol(1e-8));
      out.insert(out.end(), reps.begin(), reps.end());
    } else if (name == "rescaling") {
      FlowConfig other = flow_cfg;
      other.samples = times;
      other.oracle_check = false;
      const bool normalized = traj.variant == FlowVariant::normalized;
      other.variant = normalized ? FlowVariant::plain : FlowVariant::normalized;
      const Trajectory partner = run.tau1 ? run_codim1(*run.tau1, other) : run_egf(initial, other);
      const auto reps = normalized ? check_rescaling(traj, partner, tol(1e-8))
                                   : check_rescaling(partner, traj, tol(1e-8));
      out.insert(out.end(), reps.begin(), reps.end());
    } else if (name == "oracle") {
      if (!flow_cfg.oracle_check) continue;  // disabled from the command line
      out.push_back(check_oracle_agreement(traj, tol(1e-3)));
    } else if (name == "limit_average") {
      out.push_back(check_limit_average(traj, tol(1e-8)));
    } else if (name == "prescribed_limit") {
      const auto reps = check_prescribed_limit(traj, tol(1e-8));
      out.insert(out.end(), reps.begin(), reps.end());
    } else if (name == "monotonicity") {
      const auto reps = check_monotonicity(evaluator(*spectral), times, x, 1e-4, tol(1e-6));
      out.insert(out.end(), reps.begin(), reps.end());
    } else if (name == "volume_ode") {
      const auto reps = check_volume_ode(evaluator(*spectral), times, x, 1e-3, tol(1e-4));
      out.insert(out.end(), reps.begin(), reps.end());
    } else if (name == "bperp_scaling") {
      const auto reps = check_bperp_scaling(evaluator(*spectral), times, x, tol(1e-8));
      out.insert(out.end(), reps.begin(), reps.end());
    } else if (name == "uniform_equivalence") {
      out.push_back(check_uniform_equivalence(traj));
    }
  }
  return out;
}

/// Writes diagnostics.csv, phi_<k>.csv with snapshots.csv, checks.csv and
/// optionally diagnostics.svg under `dir`.
inline void write_outputs(const std::filesystem::path& dir, const Trajectory& traj,
                          const std::vector<CheckReport>& reports, bool plot) {
  std::filesystem::create_directories(dir);
  write_text(dir / "diagnostics.csv", diagnostics_csv(traj.diagnostics));
  std::string index = "index,t,file\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const std::string file = fmt::format("phi_{:03d}.csv", k);
    write_text(dir / file, field_csv(traj.states[k].phi));
    index += fmt::format("{},{},{}\n", k, format_real(traj.states[k].t), file);
  }
  write_text(dir / "snapshots.csv", index);
  write_text(dir / "checks.csv", checks_csv(reports));
  if (plot) write_text(dir / "diagnostics.svg", diagnostics_svg(traj.diagnostics));
}

/// Loads, validates, runs and reports one scenario; returns the exit code.
/// Nothing is written unless the config validates and the flow completes.
inline int run_scenario(const std::string& config_path, const RunOptions& opts,
                        std::ostream& log = std::cerr) {
  try {
    const PreparedRun run = prepare(load_scenario(config_path), opts);
    const Trajectory traj = execute(run);
    const auto reports = run_checks(run, traj);
    write_outputs(run.config.out, traj, reports, run.config.plot);
    int failed = 0;
    for (const auto& r : reports) {
      if (!r.pass) {
        ++failed;
        log << "check failed: " << r.name << " at t=" << r.sample_time
            << " residual=" << r.residual << " tolerance=" << r.tolerance << '\n';
      }
    }
    log << to_string(run.config.kind) << ": " << reports.size() << " checks, " << failed
        << " failed, method " << to_string(traj.method) << '\n';
    return failed == 0 ? kExitOk : kExitCheckFailed;
  } catch (const InputError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const UnsupportedScenario& e) {
    log << "unsupported scenario: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const HypothesisViolation& e) {
    log << "hypothesis violation: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "output error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace egf
