#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "egf/egf.hpp"

namespace egf::testing {

inline ProductGrid circle_product(int base_points = 4, int fiber_points = 64) {
  return {PeriodicGrid::circle(kTwoPi, base_points), PeriodicGrid::circle(kTwoPi, fiber_points)};
}

inline ProductGrid torus_fiber_product(int base_points = 4, int fiber_points = 32) {
  return {PeriodicGrid::circle(kTwoPi, base_points),
          PeriodicGrid::torus(kTwoPi, kTwoPi, fiber_points)};
}

template <class F>
ProductScalar field(const ProductGrid& g, F&& f) {
  return ProductScalar::sample(g, std::forward<F>(f));
}

template <class Phi, class Psi>
ProductState make_state(const ProductGrid& g, Phi&& phi, Psi&& psi) {
  return ProductState(field(g, std::forward<Phi>(phi)), field(g, std::forward<Psi>(psi)));
}

/// φ₀ = 0.2 cos y over a circle fibre, ψ = 0.
inline ProductState cos_scenario(int base_points = 4, int fiber_points = 64) {
  const auto g = circle_product(base_points, fiber_points);
  return make_state(g, [](auto, auto y) { return 0.2 * std::cos(y[0]); },
                    [](auto, auto) { return 0.0; });
}

/// Random real trigonometric polynomial with modes |l_k| ≤ max_mode.
inline ScalarField random_trig(const PeriodicGrid& g, std::mt19937& rng, int max_mode = 3,
                               bool zero_mean = false) {
  std::normal_distribution<double> coef(0.0, 0.5);
  ScalarField u(g);
  const int l1max = g.dim() == 2 ? max_mode : 0;
  for (int l0 = 0; l0 <= max_mode; ++l0) {
    for (int l1 = -l1max; l1 <= l1max; ++l1) {
      if (l0 == 0 && l1 < 0) continue;
      if (zero_mean && l0 == 0 && l1 == 0) continue;
      const double a = coef(rng);
      const double b = coef(rng);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.coord(i);
        const double phase = g.wavenumber(0, l0) * x[0] + (g.dim() == 2 ? g.wavenumber(1, l1) * x[1] : 0.0);
        u.values[i] += a * std::cos(phase) + b * std::sin(phase);
      }
    }
  }
  return u;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace egf::testing
