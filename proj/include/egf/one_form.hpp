#pragma once

#include <vector>

#include "egf/spectral.hpp"

namespace egf {

/// 1-form θ = Σ θ_i dx^i on a flat fibre, one coefficient function per axis.
struct OneFormField {
  PeriodicGrid grid;
  std::vector<ScalarField> components;

  OneFormField() = default;
  explicit OneFormField(const PeriodicGrid& g)
      : grid(g), components(static_cast<std::size_t>(g.dim()), ScalarField(g)) {}
  OneFormField(const PeriodicGrid& g, std::vector<ScalarField> comps)
      : grid(g), components(std::move(comps)) {
    if (static_cast<int>(components.size()) != grid.dim()) {
      throw InputError("1-form needs one component per fibre dimension");
    }
    for (const auto& c : components) {
      if (!(c.grid == grid)) throw InputError("1-form component lives on a different grid");
    }
  }

  [[nodiscard]] int dim() const { return grid.dim(); }

  /// L2 norm w.r.t. the flat fibre metric.
  [[nodiscard]] double l2_norm() const {
    double s = 0.0;
    for (const auto& c : components) s += c.l2_norm() * c.l2_norm();
    return std::sqrt(s);
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& c : components) m = std::max(m, c.max_abs());
    return m;
  }

  friend OneFormField operator-(const OneFormField& a, const OneFormField& b) {
    OneFormField out = a;
    for (std::size_t k = 0; k < out.components.size(); ++k) out.components[k] -= b.components[k];
    return out;
  }
};

/// Antisymmetric 2-form coefficients (θ_{01} for dx^0∧dx^1); empty on a circle.
struct TwoFormField {
  PeriodicGrid grid;
  std::vector<ScalarField> components;

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& c : components) m = std::max(m, c.max_abs());
    return m;
  }
};

/// Heat flow ∂t θ = Δ_d θ on a flat fibre: each coefficient obeys the scalar
/// heat equation.
inline OneFormField oneform_heat_evolve(const OneFormField& w0, double t,
                                        double diffusivity = 1.0) {
  OneFormField out(w0.grid);
  for (std::size_t k = 0; k < w0.components.size(); ++k) {
    out.components[k] = heat_evolve(w0.components[k], t, diffusivity);
  }
  return out;
}

/// Harmonic representative of the form's cohomology class on a flat torus:
/// the fibre averages of the coefficients (the t → ∞ limit of the heat flow).
inline OneFormField harmonic_part(const OneFormField& w) {
  OneFormField out(w.grid);
  for (std::size_t k = 0; k < w.components.size(); ++k) {
    out.components[k] = ScalarField(w.grid, w.components[k].mean());
  }
  return out;
}

/// Exterior derivative: (dθ)_{01} = ∂_0 θ_1 - ∂_1 θ_0.
inline TwoFormField d_perp(const OneFormField& w) {
  TwoFormField out{w.grid, {}};
  if (w.dim() == 2) {
    out.components.push_back(spectral_derivative(w.components[1], 0) -
                             spectral_derivative(w.components[0], 1));
  }
  return out;
}

/// Codifferential on a flat fibre, δθ = -Div θ♯ = -Σ_k ∂_k θ_k.
inline ScalarField delta_perp(const OneFormField& w) {
  ScalarField out(w.grid);
  for (int k = 0; k < w.dim(); ++k) out -= spectral_derivative(w.components[k], k);
  return out;
}

inline bool is_harmonic(const OneFormField& w, double tol) {
  return d_perp(w).max_abs() < tol && delta_perp(w).max_abs() < tol;
}

}  // namespace egf
