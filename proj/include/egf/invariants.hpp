#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "egf/flow.hpp"
#include "egf/geometry.hpp"

namespace egf {

/// Outcome of one identity or preservation check.
struct CheckReport {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double sample_time = 0.0;
};

inline CheckReport make_report(std::string name, double residual, double tolerance, double t) {
  return {std::move(name), residual, tolerance, residual <= tolerance, t};
}

inline bool all_pass(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Single-state identities.
// ---------------------------------------------------------------------------

/// ∫ Div⊥ξ dvol = ∫ g(H, ξ) dvol on the closed product.
inline CheckReport check_divergence_identity(const ProductState& state, const ProductVector& xi,
                                             double tol = 1e-8) {
  const double lhs = integrate(div_perp(xi, state), state);
  const double rhs = integrate(perp_inner(twisted_mean_curvature(state), xi, state), state);
  return make_report("divergence_identity", std::abs(lhs - rhs), tol, state.t);
}

/// Unit normal N = e^{-ψ} ∂_y and τ₁ = g(N, H) for p = 1.
inline ProductScalar codim1_tau(const ProductState& state) {
  if (state.p() != 1) throw InputError("codimension-one quantities need p = 1");
  return exp_of(state.psi) * twisted_mean_curvature(state).comps[0];
}

inline ProductScalar normal_derivative(const ProductScalar& f, const ProductState& state) {
  return exp_of(state.psi, -1.0) * fiber_derivative(f, 0);
}

/// ∫ N(f) dvol = ∫ τ₁ f dvol; f = 1 is Reeb's vanishing of ∫ τ₁ dvol.
inline CheckReport check_codim1_identity(const ProductState& state, const ProductScalar& f,
                                         double tol = 1e-8) {
  const double lhs = integrate(normal_derivative(f, state), state);
  const double rhs = integrate(codim1_tau(state) * f, state);
  return make_report("codim1_identity", std::abs(lhs - rhs), tol, state.t);
}

/// Pointwise Div(f∇⊥f) + f(H(f) - Δ⊥f) = g(∇⊥f, ∇⊥f), with Div the full
/// divergence of (M, g): Div ξ = e^{-(nφ+pψ)} Σ ∂_{y_k}(e^{nφ+pψ} ξ^k).
inline CheckReport check_harmonic_function_rigidity(const ProductState& state,
                                                    const ProductScalar& f, double tol = 1e-8) {
  const ProductVector grad = grad_perp(f, state);
  const ProductScalar density = volume_form_weight(state);
  const ProductScalar inv_density = pointwise(density, [](double w) { return 1.0 / w; });
  ProductScalar full_div(state.grid);
  for (int k = 0; k < state.p(); ++k) {
    full_div += fiber_derivative(density * (f * grad.comps[k]), k);
  }
  full_div = inv_density * full_div;
  const ProductScalar h_of_f = fiber_directional(twisted_mean_curvature(state), f);
  const ProductScalar lap = div_perp(grad, state);
  const ProductScalar lhs = full_div + f * (h_of_f - lap);
  const ProductScalar rhs = perp_inner(grad, grad, state);
  return make_report("harmonic_rigidity", max_abs_diff(lhs, rhs), tol, state.t);
}

/// |r - r_energy| where r uses ∫Div⊥H and r_energy uses ∫g(H,H); plus r ≤ 0.
inline std::vector<CheckReport> check_normalization_rate(const ProductState& state,
                                                         double tol = 1e-8,
                                                         double sign_tol = 1e-12) {
  const double r = normalization_rate(state);
  const double r_energy = normalization_rate_from_energy(state);
  return {make_report("normalization_rate_identity", std::abs(r - r_energy), tol, state.t),
          make_report("normalization_rate_sign", std::max(0.0, r), sign_tol, state.t)};
}

// ---------------------------------------------------------------------------
// Trajectory checks.
// ---------------------------------------------------------------------------

/// Per sample: D-umbilicity residual, constancy of the D⊥ flags, ‖d⊥θ_H‖∞,
/// and (for totally geodesic initial D) persistence of that flag.
inline std::vector<CheckReport> check_preservation(const Trajectory& traj, double tol_umbilic = 1e-10,
                                                   double tol_closed = 1e-10) {
  if (traj.diagnostics.size() < 3) throw InputError("preservation checks need >= 3 samples");
  std::vector<CheckReport> out;
  const auto& first = traj.diagnostics.front().flags;
  for (const auto& d : traj.diagnostics) {
    out.push_back(make_report("d_umbilical", d.umbilical_residual, tol_umbilic, d.t));
    const double mismatches = (d.flags.dperp.umbilical != first.dperp.umbilical) +
                              (d.flags.dperp.harmonic != first.dperp.harmonic) +
                              (d.flags.dperp.totally_geodesic != first.dperp.totally_geodesic);
    out.push_back(make_report("dperp_flags", mismatches, 0.0, d.t));
    out.push_back(make_report("closedness", d.d_theta_h, tol_closed, d.t));
    if (first.d.totally_geodesic) {
      out.push_back(
          make_report("d_totally_geodesic", d.flags.d.second_fundamental_norm, tol_umbilic, d.t));
    }
  }
  return out;
}

/// Least-squares slope of log max|Div⊥(H_t - X)| over samples with t ≥ t_min.
inline double estimate_decay_rate(const Trajectory& traj, double t_min = 0.0) {
  std::vector<double> ts;
  std::vector<double> ys;
  for (const auto& d : traj.diagnostics) {
    if (d.t >= t_min && d.max_div_h > 0.0 && std::isfinite(d.t)) {
      ts.push_back(d.t);
      ys.push_back(std::log(d.max_div_h));
    }
  }
  double peak = 0.0;
  for (const auto& d : traj.diagnostics) peak = std::max(peak, d.max_div_h);
  if (peak == 0.0) throw InputError("decay rate undefined: the driving field vanishes");
  if (ts.size() < 4) throw InputError("decay rate needs >= 4 samples past the transient");
  const double m = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
  }
  const double tbar = st / m;
  const double ybar = sy / m;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    num += (ts[i] - tbar) * (ys[i] - ybar);
    den += (ts[i] - tbar) * (ts[i] - tbar);
  }
  return num / den;
}

inline CheckReport check_decay_rate(const Trajectory& traj, double expected_rate, double rel_tol,
                                    double t_min = 0.0) {
  const double slope = estimate_decay_rate(traj, t_min);
  return make_report("decay_rate", std::abs(slope + expected_rate) / expected_rate, rel_tol,
                     traj.diagnostics.back().t);
}

/// sup |φ∞ - leaf-volume-weighted fibre average of φ₀|.
inline CheckReport check_limit_average(const Trajectory& traj, double tol = 1e-8) {
  const ProductState& initial = traj.states.front();
  double m = 0.0;
  const std::size_t nf = initial.grid.fiber.size();
  for (std::size_t b = 0; b < initial.grid.base.size(); ++b) {
    const double avg = leaf_average(initial.phi, initial, b);
    for (std::size_t j = 0; j < nf; ++j) {
      m = std::max(m, std::abs(traj.limit.phi.values[b * nf + j] - avg));
    }
  }
  return make_report("limit_average", m, tol, traj.limit.t);
}

/// ‖Div⊥(H∞ - X)‖∞ and ‖d⊥θ_{H∞-X}‖∞ of the limit.
inline std::vector<CheckReport> check_prescribed_limit(const Trajectory& traj, double tol = 1e-8) {
  if (!traj.X) throw InputError("prescribed-limit check needs a prescribed trajectory");
  const ProductVector diff = twisted_mean_curvature(traj.limit) - *traj.X;
  return {make_report("prescribed_limit_divergence", div_perp(diff, traj.limit).max_abs(), tol,
                      traj.limit.t),
          make_report("prescribed_limit_closed", closedness_defect(diff, traj.limit), tol,
                      traj.limit.t)};
}

/// ‖ĝ̃_t - (vol(g_t)/vol(g_0))^{-2/n} ĝ_t‖∞ between a normalised run and an
/// unnormalised run from the same initial metric.
inline std::vector<CheckReport> check_rescaling(const Trajectory& normalized,
                                                const Trajectory& plain, double tol = 1e-8) {
  if (normalized.states.size() != plain.states.size()) {
    throw InputError("rescaling check needs trajectories with matching samples");
  }
  std::vector<CheckReport> out;
  const double vol0 = volume(plain.states.front());
  for (std::size_t k = 0; k < plain.states.size(); ++k) {
    const ProductState& s = plain.states[k];
    const double factor = std::pow(volume(s) / vol0, -2.0 / s.n());
    double m = 0.0;
    for (std::size_t i = 0; i < s.phi.values.size(); ++i) {
      m = std::max(m, std::abs(std::exp(2.0 * normalized.states[k].phi.values[i]) -
                               factor * std::exp(2.0 * s.phi.values[i])));
    }
    out.push_back(make_report("rescaling", m, tol, s.t));
  }
  return out;
}

/// Relative drift |vol_t - vol_0| / vol_0 along a run.
inline std::vector<CheckReport> check_volume_drift(const Trajectory& traj, double tol = 1e-8) {
  std::vector<CheckReport> out;
  const double v0 = traj.diagnostics.front().volume;
  for (const auto& d : traj.diagnostics) {
    out.push_back(make_report("volume_drift", std::abs(d.volume - v0) / v0, tol, d.t));
  }
  return out;
}

inline CheckReport check_oracle_agreement(const Trajectory& traj, double tol = 1e-3) {
  if (!traj.oracle_gap) throw InputError("trajectory carries no oracle comparison");
  return make_report("oracle_agreement", *traj.oracle_gap, tol, traj.states.back().t);
}

// ---------------------------------------------------------------------------
// Checks that differentiate or integrate in time need the solution at
// arbitrary t, supplied as an evaluator.
// ---------------------------------------------------------------------------

using StateEvaluator = std::function<ProductState(double)>;

/// s_t = -(2/n) Div⊥(H_t - X), the D-conformal speed of the unnormalised flow.
inline ProductScalar conformal_speed(const ProductState& state,
                                     const std::optional<ProductVector>& x) {
  ProductVector driving = twisted_mean_curvature(state);
  if (x) driving -= *x;
  ProductScalar s = div_perp(driving, state);
  s *= -2.0 / state.n();
  return s;
}

/// d vol/dt by central differences of step h (one-sided near t = 0)
/// against (n/2) ∫ s dvol.
inline std::vector<CheckReport> check_volume_ode(const StateEvaluator& at,
                                                 const std::vector<double>& times,
                                                 const std::optional<ProductVector>& x,
                                                 double h = 1e-3, double rel_tol = 1e-4) {
  std::vector<CheckReport> out;
  for (double t : times) {
    const double fd = t < h ? (-3.0 * volume(at(t)) + 4.0 * volume(at(t + h)) -
                               volume(at(t + 2.0 * h))) / (2.0 * h)
                            : (volume(at(t + h)) - volume(at(t - h))) / (2.0 * h);
    const ProductState s = at(t);
    const double exact = 0.5 * s.n() * integrate(conformal_speed(s, x), s);
    const double scale = std::max(std::abs(exact), 1e-300);
    out.push_back(make_report("volume_ode", std::abs(fd - exact) / scale, rel_tol, t));
  }
  return out;
}

namespace detail {

// Leafwise L² pairing ∫_base ∫_leaf f e^{pψ} dy dx (flat base measure).
inline double leafwise_integral(const ProductScalar& f, const ProductState& state) {
  const ProductScalar w = exp_of(state.psi, static_cast<double>(state.p()));
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * w.values[i];
  return s * state.grid.cell_volume();
}

inline double theta_energy(const ProductState& state, const std::optional<ProductVector>& x) {
  ProductVector v = twisted_mean_curvature(state);
  if (x) v -= *x;
  return leafwise_integral(perp_inner(v, v, state), state);
}

}  // namespace detail

/// d/dt ‖θ_{H-X}‖² + 2 ‖δ⊥θ_{H-X}‖² by a five-point difference, central
/// away from t = 0.
inline std::vector<CheckReport> check_monotonicity(const StateEvaluator& at,
                                                   const std::vector<double>& times,
                                                   const std::optional<ProductVector>& x,
                                                   double h = 1e-4, double tol = 1e-6) {
  std::vector<CheckReport> out;
  for (double t : times) {
    const auto e = [&](double s) { return detail::theta_energy(at(s), x); };
    const double deriv =
        t < 2 * h
            ? (-25 * e(t) + 48 * e(t + h) - 36 * e(t + 2 * h) + 16 * e(t + 3 * h) - 3 * e(t + 4 * h)) /
                  (12 * h)
            : (e(t - 2 * h) - 8 * e(t - h) + 8 * e(t + h) - e(t + 2 * h)) / (12 * h);
    const ProductState s = at(t);
    ProductVector v = twisted_mean_curvature(s);
    if (x) v -= *x;
    const ProductScalar codiff = div_perp(v, s);
    const double dissipation = detail::leafwise_integral(codiff * codiff, s);
    out.push_back(make_report("monotonicity", std::abs(deriv + 2.0 * dissipation), tol, t));
    out.push_back(make_report("monotonicity_sign", std::max(0.0, deriv), tol, t));
  }
  return out;
}

/// b⊥_t against b⊥₀ exp((2/n) ∫₀ᵗ Div⊥(H_s - X) ds), the time integral taken
/// by composite Gauss–Legendre quadrature of the state's own Div⊥.
inline std::vector<CheckReport> check_bperp_scaling(const StateEvaluator& at,
                                                    const std::vector<double>& times,
                                                    const std::optional<ProductVector>& x,
                                                    double tol = 1e-8, int panels = 64) {
  const ProductState s0 = at(0.0);
  const auto b0 = second_fundamental(s0).bperp;
  const int n = s0.n();
  std::vector<CheckReport> out;
  for (double t : times) {
    ProductScalar exponent(s0.grid);
    if (t > 0.0) {
      // Geometric panels resolve the fast initial decay of high modes.
      const double ratio = 1.15;
      double width = t * (ratio - 1.0) / (std::pow(ratio, panels) - 1.0);
      double a = 0.0;
      for (int k = 0; k < panels; ++k) {
        const double b = k + 1 == panels ? t : a + width;
        using Rule = boost::math::quadrature::gauss<double, 10>;
        const auto& nodes = Rule::abscissa();
        const auto& weights = Rule::weights();
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        for (std::size_t q = 0; q < nodes.size(); ++q) {
          for (int sign : {-1, 1}) {
            if (sign < 0 && nodes[q] == 0.0) continue;
            const ProductState st = at(mid + sign * half * nodes[q]);
            ProductScalar d = conformal_speed(st, x);
            d *= -0.5 * n * half * weights[q];  // Div⊥(H - X) = -(n/2) s
            exponent += d;
          }
        }
        a = b;
        width *= ratio;
      }
    }
    const ProductScalar growth = exp_of(exponent, 2.0 / n);
    const auto bt = second_fundamental(at(t)).bperp;
    double m = 0.0;
    for (std::size_t e = 0; e < bt.size(); ++e) {
      for (int i = 0; i < bt[e].dim(); ++i) {
        m = std::max(m, max_abs_diff(bt[e].comps[i], growth * b0[e].comps[i]));
      }
    }
    out.push_back(make_report("bperp_scaling", m, tol, t));
  }
  return out;
}

/// Certifies c⁻¹ ĝ₀ ≤ ĝ_t ≤ c ĝ₀ at every sample, residual = log overshoot.
inline CheckReport check_uniform_equivalence(const Trajectory& traj) {
  const ProductState& s0 = traj.states.front();
  const double log_c = std::log(traj.equivalence_constant);
  double worst = 0.0;
  for (const auto& s : traj.states) {
    for (std::size_t i = 0; i < s.phi.values.size(); ++i) {
      const double log_ratio = 2.0 * std::abs(s.phi.values[i] - s0.phi.values[i]);
      worst = std::max(worst, log_ratio - log_c);
    }
  }
  return make_report("uniform_equivalence", std::max(0.0, worst), 0.0, traj.states.back().t);
}

/// Evaluator of the unnormalised spectral solution.
inline StateEvaluator evaluator(const SpectralFlow& flow) {
  return [&flow](double t) { return flow.state_at(t); };
}

}  // namespace egf
