#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "egf/fd_oracle.hpp"
#include "egf/geometry.hpp"
#include "egf/one_form.hpp"
#include "egf/spectral.hpp"

namespace egf {

enum class FlowVariant { plain, normalized, prescribed };
enum class EvolutionMethod { spectral, finite_difference };

inline std::string to_string(FlowVariant v) {
  switch (v) {
    case FlowVariant::plain: return "plain";
    case FlowVariant::normalized: return "normalized";
    case FlowVariant::prescribed: return "prescribed";
  }
  return "?";
}

inline std::string to_string(EvolutionMethod m) {
  return m == EvolutionMethod::spectral ? "spectral" : "finite_difference";
}

struct FlowConfig {
  FlowVariant variant = FlowVariant::plain;
  int n = 0;  // 0: take from the initial state
  int p = 0;
  std::optional<ProductVector> X;  // prescribed fibre field, variant == prescribed only
  double t_end = 5.0;
  std::vector<double> samples;  // empty: 11 equispaced samples on [0, t_end]
  double tol_converge = 1e-10;
  double tol_closed = 1e-9;
  double tol_classify = 1e-8;
  bool oracle_check = false;
  FdScheme fd{};

  [[nodiscard]] std::vector<double> sample_times() const {
    if (!samples.empty()) return samples;
    std::vector<double> out;
    for (int k = 0; k <= 10; ++k) out.push_back(t_end * k / 10.0);
    return out;
  }

  void validate(const ProductState& initial) const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InputError("tEnd must be positive");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (samples[k] < 0.0 || samples[k] > t_end) {
        throw InputError("sample times must lie in [0, tEnd]");
      }
      if (k > 0 && samples[k] < samples[k - 1]) throw InputError("sample times must be sorted");
    }
    if (n != 0 && n != initial.n()) throw InputError("config n does not match the base dimension");
    if (p != 0 && p != initial.p()) throw InputError("config p does not match the fibre dimension");
    if ((variant == FlowVariant::prescribed) != X.has_value()) {
      throw InputError("X must be given exactly when the variant is prescribed");
    }
    if (X && (!(X->grid == initial.grid) || X->along != Along::fiber)) {
      throw InputError("X must be a fibre vector field on the state's grid");
    }
  }
};

/// Per-sample diagnostics of a trajectory.
struct DiagnosticRecord {
  double t = 0.0;
  double volume = 0.0;
  double int_h2 = 0.0;     // ∫ g(H, H) dvol
  double max_div_h = 0.0;  // sup |Div⊥(H - X)|, X = 0 unless prescribed
  double r = 0.0;          // normalisation rate
  double umbilical_residual = 0.0;
  double d_theta_h = 0.0;  // sup |d⊥θ_H|
  Classification flags;
};

struct Trajectory {
  FlowVariant variant = FlowVariant::plain;
  EvolutionMethod method = EvolutionMethod::spectral;
  std::vector<ProductState> states;
  std::vector<DiagnosticRecord> diagnostics;
  ProductState limit;
  std::optional<double> converged_at;
  double equivalence_constant = 1.0;  // c with c⁻¹ĝ₀ ≤ ĝ_t ≤ c ĝ₀
  std::optional<double> oracle_gap;   // sup |φ_spectral - φ_fd| at the last sample
  std::optional<ProductVector> X;
  std::vector<ProductScalar> tau1;    // codimension-one runs only
};

// ---------------------------------------------------------------------------
// Pointwise geometric quantities of a state.
// ---------------------------------------------------------------------------

/// Div⊥H of the state's base leaves.
inline ProductScalar div_mean_curvature(const ProductState& state) {
  return div_perp(twisted_mean_curvature(state), state);
}

/// sup over fibres of |d⊥θ_ξ| for the fibre field ξ.
inline double closedness_defect(const ProductVector& xi, const ProductState& state) {
  double m = 0.0;
  for (std::size_t b = 0; b < state.grid.base.size(); ++b) {
    m = std::max(m, d_perp(lower_on_fiber(xi, state.psi, b)).max_abs());
  }
  return m;
}

/// r(t) = -(2/n) ∫ Div⊥H dvol / vol.
inline double normalization_rate(const ProductState& state) {
  const double n = state.n();
  return -(2.0 / n) * integrate(div_mean_curvature(state), state) / volume(state);
}

/// The same rate through ∫ Div⊥H dvol = ∫ g(H, H) dvol.
inline double normalization_rate_from_energy(const ProductState& state) {
  const ProductVector h = twisted_mean_curvature(state);
  const double n = state.n();
  return -(2.0 / n) * integrate(perp_inner(h, h, state), state) / volume(state);
}

/// D-conformal projection to unit volume: ĝ ↦ vol^{-2/n} ĝ.
inline ProductState project_unit_volume(const ProductState& state) {
  ProductState out = state;
  const double shift = std::log(volume(state)) / state.n();
  for (double& v : out.phi.values) v -= shift;
  return out;
}

/// Fibre diffusivities e^{-2ψ(x)} for fibre-constant ψ.
inline std::vector<double> fiber_diffusivities(const ProductState& state) {
  if (!state.psi.fiberwise_constant()) {
    throw UnsupportedScenario("spectral evolution needs psi constant along each fibre");
  }
  std::vector<double> a(state.grid.base.size());
  for (std::size_t b = 0; b < a.size(); ++b) {
    a[b] = std::exp(-2.0 * state.psi.values[state.grid.index(b, 0)]);
  }
  return a;
}

/// ĝ_t from the initial Div⊥H datum: φ(t) = φ₀ - (1/n) ∫₀ᵗ Div⊥H_s ds with
/// Div⊥H_s the heat flow of `div_h0` on each leaf.
inline ProductState reconstruct_metric(const ProductState& initial, const ProductScalar& div_h0,
                                       double t) {
  const auto a = fiber_diffusivities(initial);
  const ProductScalar integral = map_fibers(div_h0, [&](const ScalarField& s, std::size_t b) {
    return heat_time_integral(s, t, a[b]);
  });
  ProductState out = initial;
  out.t = t;
  const double n = initial.n();
  for (std::size_t i = 0; i < out.phi.values.size(); ++i) {
    out.phi.values[i] -= integral.values[i] / n;
  }
  return out;
}

/// Closed-form solution of the plain or prescribed flow on fibres with
/// constant-coefficient Δ⊥. The driving scalar Div⊥(H - X) is carried as
/// spectral data per fibre; every query is exact in t.
class SpectralFlow {
 public:
  SpectralFlow(ProductState initial, const std::optional<ProductVector>& x)
      : initial_(std::move(initial)), diffusivity_(fiber_diffusivities(initial_)) {
    ProductVector driving = twisted_mean_curvature(initial_);
    if (x) driving -= *x;
    driving0_ = div_perp(driving, initial_);
    spectra_.reserve(initial_.grid.base.size());
    for (std::size_t b = 0; b < initial_.grid.base.size(); ++b) {
      spectra_.push_back(SpectralField::from_nodal(driving0_.fiber_slice(b)));
    }
  }

  [[nodiscard]] const ProductState& initial() const { return initial_; }
  [[nodiscard]] const ProductScalar& driving0() const { return driving0_; }
  [[nodiscard]] const std::vector<double>& diffusivity() const { return diffusivity_; }

  /// Div⊥(H_t - X).
  [[nodiscard]] ProductScalar driving_at(double t) const {
    return assemble([&](std::size_t b) { return heat_evolve(spectra_[b], t, diffusivity_[b]); });
  }

  [[nodiscard]] ProductScalar integral_at(double t) const {
    return assemble(
        [&](std::size_t b) { return heat_time_integral(spectra_[b], t, diffusivity_[b]); });
  }

  [[nodiscard]] ProductState state_at(double t) const { return shifted(integral_at(t), t); }

  /// t → ∞ state: the time integral tends to c_l / (a λ_l) mode by mode.
  [[nodiscard]] ProductState limit() const {
    return shifted(
        assemble([&](std::size_t b) { return heat_time_integral_limit(spectra_[b], diffusivity_[b]); }),
        std::numeric_limits<double>::infinity());
  }

  /// c = exp((2/n) Σ_l |c_l| / (a λ₁)), maximised over fibres; bounds
  /// |∫₀ᵗ Div⊥(H_s - X) ds| uniformly in t.
  [[nodiscard]] double equivalence_constant() const {
    double bound = 0.0;
    const double gap = spectral_gap(initial_.grid.fiber);
    for (std::size_t b = 0; b < spectra_.size(); ++b) {
      double l1 = 0.0;
      for (std::size_t i = 1; i < spectra_[b].coeffs.size(); ++i) l1 += std::abs(spectra_[b].coeffs[i]);
      bound = std::max(bound, l1 / (diffusivity_[b] * gap));
    }
    return std::exp(2.0 / initial_.n() * bound);
  }

  [[nodiscard]] bool trivial(double tol = 1e-14) const { return driving0_.max_abs() <= tol; }

 private:
  template <class Fn>
  ProductScalar assemble(Fn&& per_fiber) const {
    ProductScalar out(initial_.grid);
    parallel_for(spectra_.size(), [&](std::size_t b) { out.set_fiber_slice(b, per_fiber(b).to_nodal()); });
    return out;
  }

  ProductState shifted(const ProductScalar& integral, double t) const {
    ProductState out = initial_;
    out.t = t;
    const double n = initial_.n();
    for (std::size_t i = 0; i < out.phi.values.size(); ++i) {
      out.phi.values[i] -= integral.values[i] / n;
    }
    return out;
  }

  ProductState initial_;
  std::vector<double> diffusivity_;
  ProductScalar driving0_;
  std::vector<SpectralField> spectra_;
};

/// Plain flow with variable-coefficient Δ⊥ (ψ varying along fibres): φ obeys
/// ∂t φ = Δ⊥φ, marched per fibre by the implicit finite-difference oracle.
inline std::vector<ProductState> fd_flow_states(const ProductState& initial,
                                                const std::vector<double>& times,
                                                const FdScheme& scheme) {
  std::vector<ProductState> out(times.size(), initial);
  for (std::size_t k = 0; k < times.size(); ++k) out[k].t = times[k];
  parallel_for(initial.grid.base.size(), [&](std::size_t b) {
    const auto runs =
        fd_heat_run_samples(initial.phi.fiber_slice(b), initial.psi.fiber_slice(b), times, scheme);
    for (std::size_t k = 0; k < times.size(); ++k) out[k].phi.set_fiber_slice(b, runs[k]);
  });
  return out;
}

/// t → ∞ limit of the plain flow: φ relaxes to its leaf-volume-weighted
/// fibre average (conserved by ∂t φ = Δ⊥φ).
inline ProductState leaf_average_limit(const ProductState& initial) {
  ProductState out = initial;
  out.t = std::numeric_limits<double>::infinity();
  const std::size_t nf = initial.grid.fiber.size();
  for (std::size_t b = 0; b < initial.grid.base.size(); ++b) {
    const double avg = leaf_average(initial.phi, initial, b);
    for (std::size_t j = 0; j < nf; ++j) out.phi.values[b * nf + j] = avg;
  }
  return out;
}

inline DiagnosticRecord diagnose(const ProductState& state, const std::optional<ProductVector>& x,
                                 double tol_classify) {
  DiagnosticRecord d;
  d.t = state.t;
  d.volume = volume(state);
  const ProductVector h = twisted_mean_curvature(state);
  d.int_h2 = integrate(perp_inner(h, h, state), state);
  ProductVector driving = h;
  if (x) driving -= *x;
  d.max_div_h = div_perp(driving, state).max_abs();
  d.r = normalization_rate(state);
  const auto data = second_fundamental(state);
  d.flags = classify(state, data, tol_classify);
  d.umbilical_residual = d.flags.d.umbilical_residual;
  d.d_theta_h = state.p() == 1 ? 0.0 : closedness_defect(h, state);
  return d;
}

namespace detail {

inline void check_hypotheses(const ProductState& initial, const FlowConfig& config) {
  ProductVector theta_source = twisted_mean_curvature(initial);
  if (config.X) theta_source -= *config.X;
  if (initial.p() > 1 || config.X) {
    const double defect = closedness_defect(theta_source, initial);
    if (defect > config.tol_closed) {
      throw HypothesisViolation("d⊥θ of the driving field is " + std::to_string(defect) +
                                ", above the closedness tolerance");
    }
  }
}

inline Trajectory finish(Trajectory traj, const FlowConfig& config) {
  for (const auto& s : traj.states) {
    traj.diagnostics.push_back(diagnose(s, traj.X, config.tol_classify));
    if (!traj.converged_at && traj.diagnostics.back().max_div_h < config.tol_converge) {
      traj.converged_at = s.t;
    }
  }
  return traj;
}

inline double oracle_gap(const ProductState& initial, const std::vector<ProductState>& spectral,
                         const std::vector<double>& times, const FdScheme& scheme) {
  const PeriodicGrid& coarse = initial.grid.fiber;
  const int m = scheme.grid_points;
  const PeriodicGrid fine(coarse.dim(), coarse.sides(), {m, m});
  std::vector<double> gaps(initial.grid.base.size(), 0.0);
  parallel_for(initial.grid.base.size(), [&](std::size_t b) {
    const ScalarField phi0 = spectral_resample(initial.phi.fiber_slice(b), fine);
    const ScalarField psi = spectral_resample(initial.psi.fiber_slice(b), fine);
    const ScalarField fd = fd_heat_run_samples(phi0, psi, times, scheme).back();
    const ScalarField ref = spectral_resample(spectral.back().phi.fiber_slice(b), fine);
    gaps[b] = max_abs_diff(fd, ref);
  });
  return *std::max_element(gaps.begin(), gaps.end());
}

}  // namespace detail

/// Plain or prescribed flow without normalisation.
inline Trajectory run_unnormalized(const ProductState& initial, const FlowConfig& config) {
  config.validate(initial);
  detail::check_hypotheses(initial, config);
  const auto times = config.sample_times();
  Trajectory traj;
  traj.variant = config.variant;
  traj.X = config.X;
  if (initial.psi.fiberwise_constant()) {
    const SpectralFlow flow(initial, config.X);
    traj.method = EvolutionMethod::spectral;
    traj.equivalence_constant = flow.equivalence_constant();
    for (double t : times) {
      if (flow.trivial()) {
        ProductState s = initial;
        s.t = t;
        traj.states.push_back(std::move(s));
      } else {
        traj.states.push_back(flow.state_at(t));
      }
    }
    traj.limit = flow.trivial() ? initial : flow.limit();
    if (config.oracle_check && !flow.trivial() && !config.X) {
      traj.oracle_gap = detail::oracle_gap(initial, traj.states, times, config.fd);
    }
  } else {
    if (config.X) {
      throw UnsupportedScenario("prescribed flow needs psi constant along each fibre");
    }
    traj.method = EvolutionMethod::finite_difference;
    traj.states = fd_flow_states(initial, times, config.fd);
    traj.limit = leaf_average_limit(initial);
  }
  return detail::finish(std::move(traj), config);
}

/// Prescribed-mean-curvature flow ∂t g = -(2/n) Div⊥(H - X) ĝ.
inline Trajectory run_prescribed(const ProductState& initial, const ProductVector& x,
                                 FlowConfig config) {
  config.variant = FlowVariant::prescribed;
  config.X = x;
  return run_unnormalized(initial, config);
}

/// Normalised flow ∂t g = -((2/n) Div⊥H + r(t)) ĝ. On the spectral path the
/// shift -½∫₀ᵗ r is integrated by adaptive Gauss–Kronrod quadrature of r(s)
/// along the unnormalised solution; on the finite-difference path it is
/// taken from the volume ratio, -(1/n) log(vol_t / vol_0).
inline Trajectory run_normalized(const ProductState& initial, FlowConfig config) {
  config.variant = FlowVariant::normalized;
  config.X.reset();
  config.validate(initial);
  detail::check_hypotheses(initial, config);
  const auto times = config.sample_times();
  Trajectory traj;
  traj.variant = FlowVariant::normalized;
  const double n = initial.n();

  if (initial.psi.fiberwise_constant()) {
    const SpectralFlow flow(initial, std::nullopt);
    traj.method = EvolutionMethod::spectral;
    traj.equivalence_constant = flow.equivalence_constant();
    double prev_t = 0.0;
    double r_integral = 0.0;
    const auto rate = [&](double s) { return normalization_rate(flow.state_at(s)); };
    for (double t : times) {
      if (!flow.trivial() && t > prev_t) {
        r_integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            rate, prev_t, t, 6, 1e-11);
      }
      prev_t = t;
      ProductState s = flow.trivial() ? initial : flow.state_at(t);
      s.t = t;
      for (double& v : s.phi.values) v -= 0.5 * r_integral;
      traj.states.push_back(std::move(s));
    }
    ProductState lim = flow.trivial() ? initial : flow.limit();
    const double shift = std::log(volume(lim) / volume(initial)) / n;
    for (double& v : lim.phi.values) v -= shift;
    traj.limit = std::move(lim);
  } else {
    traj.method = EvolutionMethod::finite_difference;
    traj.states = fd_flow_states(initial, times, config.fd);
    const double vol0 = volume(initial);
    for (auto& s : traj.states) {
      const double shift = std::log(volume(s) / vol0) / n;
      for (double& v : s.phi.values) v -= shift;
    }
    ProductState lim = leaf_average_limit(initial);
    const double shift = std::log(volume(lim) / vol0) / n;
    for (double& v : lim.phi.values) v -= shift;
    traj.limit = std::move(lim);
  }
  return detail::finish(std::move(traj), config);
}

/// Entry point for all three variants.
inline Trajectory run_egf(const ProductState& initial, const FlowConfig& config) {
  switch (config.variant) {
    case FlowVariant::normalized: return run_normalized(initial, config);
    case FlowVariant::prescribed:
    case FlowVariant::plain: return run_unnormalized(initial, config);
  }
  throw InputError("unknown flow variant");
}

/// Zero-mean antiderivative along the fibre (p = 1) of a zero-mean field.
inline ScalarField fiber_antiderivative(const ScalarField& u) {
  SpectralField s = SpectralField::from_nodal(u);
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    const int l = s.mode(i)[0];
    if (l == 0 || s.grid.is_nyquist(0, static_cast<int>(i))) {
      s.coeffs[i] = 0.0;
    } else {
      s.coeffs[i] /= Complex(0.0, s.grid.wavenumber(0, l));
    }
  }
  s.enforce_conjugate_symmetry();
  return s.to_nodal();
}

/// Codimension-one flow ∂t g = -(2/n) N(τ₁) ĝ on a flat circle fibration.
///
/// τ₁ evolves by the fibre heat equation and φ(t) = φ₀ - (1/n) ∫₀ᵗ N(τ₁) ds,
/// with φ₀ the zero-mean potential of τ₁ = -n ∂_y φ₀. Each fibre slice of τ₁
/// must have zero mean (otherwise τ₁ is not the mean curvature of a twisted
/// product over that circle).
inline Trajectory run_codim1(const ProductScalar& tau1, FlowConfig config) {
  const ProductGrid& g = tau1.grid;
  if (g.fiber.dim() != 1) throw InputError("codimension-one flow needs p = 1");
  if (config.variant == FlowVariant::prescribed) {
    throw InputError("codimension-one runs support the plain and normalized variants");
  }
  const double n = g.base.dim();
  const double scale = std::max(1.0, tau1.max_abs());
  ProductScalar phi0(g);
  for (std::size_t b = 0; b < g.base.size(); ++b) {
    const ScalarField t = tau1.fiber_slice(b);
    if (std::abs(t.mean()) > 1e-12 * scale) {
      throw InputError("tau1 must have zero mean on every fibre");
    }
    ScalarField phi = fiber_antiderivative(t);
    phi *= -1.0 / n;
    phi0.set_fiber_slice(b, phi);
  }
  const ProductState initial(phi0, ProductScalar(g));
  config.validate(initial);
  const auto times = config.sample_times();

  // φ(t) from the time integral of N(τ₁) = ∂_y τ₁.
  const ProductScalar n_tau = fiber_derivative(tau1, 0);
  Trajectory traj;
  traj.variant = config.variant;
  traj.method = EvolutionMethod::spectral;
  traj.equivalence_constant = SpectralFlow(initial, std::nullopt).equivalence_constant();
  for (double t : times) {
    traj.states.push_back(reconstruct_metric(initial, n_tau, t));
    traj.tau1.push_back(map_fibers(tau1, [t](const ScalarField& s, std::size_t) {
      return heat_evolve(s, t);
    }));
  }
  traj.limit = initial;
  traj.limit.t = std::numeric_limits<double>::infinity();
  const ProductScalar lim = map_fibers(n_tau, [](const ScalarField& s, std::size_t) {
    return heat_time_integral_limit(s);
  });
  for (std::size_t i = 0; i < lim.values.size(); ++i) traj.limit.phi.values[i] -= lim.values[i] / n;
  if (config.variant == FlowVariant::normalized) {
    const double vol0 = volume(initial);
    double prev_t = 0.0;
    double r_integral = 0.0;
    const auto rate = [&](double s) { return normalization_rate(reconstruct_metric(initial, n_tau, s)); };
    for (auto& s : traj.states) {
      if (s.t > prev_t) {
        r_integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            rate, prev_t, s.t, 6, 1e-11);
      }
      prev_t = s.t;
      for (double& v : s.phi.values) v -= 0.5 * r_integral;
    }
    const double shift = std::log(volume(traj.limit) / vol0) / n;
    for (double& v : traj.limit.phi.values) v -= shift;
  }
  return detail::finish(std::move(traj), config);
}

}  // namespace egf
