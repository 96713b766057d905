#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "egf/fft.hpp"
#include "egf/grid.hpp"

namespace egf {

using Complex = std::complex<double>;

/// Fourier representation of a real field on a flat periodic fibre.
///
/// The field is u(x) = Σ_l c_l exp(i k_l·x) with k_l = 2π l / L, so the
/// mode-0 coefficient is the fibre average. Coefficients are stored in FFT
/// order (non-negative modes first, then negative ones).
struct SpectralField {
  PeriodicGrid grid;
  std::vector<Complex> coeffs;

  SpectralField() = default;
  explicit SpectralField(const PeriodicGrid& g) : grid(g), coeffs(g.size()) {}

  static SpectralField from_nodal(const ScalarField& u) {
    SpectralField s(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) s.coeffs[i] = u.values[i];
    detail::fft_inplace(u.grid, s.coeffs, FFTW_FORWARD);
    const double scale = 1.0 / static_cast<double>(u.size());
    for (auto& c : s.coeffs) c *= scale;
    return s;
  }

  [[nodiscard]] ScalarField to_nodal() const {
    std::vector<Complex> work = coeffs;
    detail::fft_inplace(grid, work, FFTW_BACKWARD);
    ScalarField out(grid);
    for (std::size_t i = 0; i < work.size(); ++i) out.values[i] = work[i].real();
    return out;
  }

  /// Signed mode vector of storage slot `idx`.
  [[nodiscard]] std::array<int, 2> mode(std::size_t idx) const {
    const auto ij = grid.unflatten(idx);
    return {grid.mode_index(0, ij[0]), grid.dim() == 2 ? grid.mode_index(1, ij[1]) : 0};
  }

  /// Coefficient of mode l; zero when l is not resolved on the grid.
  [[nodiscard]] Complex coeff(std::span<const int> l) const {
    if (static_cast<int>(l.size()) != grid.dim()) throw InputError("mode dimension mismatch");
    const int s0 = grid.slot_of_mode(0, l[0]);
    const int s1 = grid.dim() == 2 ? grid.slot_of_mode(1, l[1]) : 0;
    if (s0 < 0 || s1 < 0) return {};
    return coeffs[grid.flatten(s0, s1)];
  }

  /// Slot holding the mode -l of slot `idx`.
  [[nodiscard]] std::size_t conjugate_slot(std::size_t idx) const {
    const auto ij = grid.unflatten(idx);
    const int n0 = grid.points(0);
    const int n1 = grid.points(1);
    return grid.flatten((n0 - ij[0]) % n0, (n1 - ij[1]) % n1);
  }

  /// Projects onto coefficients of a real field: c_l = (c_l + conj(c_-l)) / 2.
  void enforce_conjugate_symmetry() {
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const std::size_t j = conjugate_slot(i);
      if (j < i) continue;
      const Complex avg = 0.5 * (coeffs[i] + std::conj(coeffs[j]));
      coeffs[i] = avg;
      coeffs[j] = std::conj(avg);
    }
  }

  [[nodiscard]] Complex mean() const { return coeffs[0]; }
};

/// Eigenvalue of -Δ on the flat fibre for integer mode vector `mode`:
/// Σ_k (2π l_k / L_k)².
inline double eigenvalue(std::span<const int> mode, const PeriodicGrid& grid) {
  if (static_cast<int>(mode.size()) != grid.dim()) {
    throw InputError("mode vector has " + std::to_string(mode.size()) +
                     " entries but the fibre has dimension " + std::to_string(grid.dim()));
  }
  double lambda = 0.0;
  for (int k = 0; k < grid.dim(); ++k) {
    const double wk = grid.wavenumber(k, mode[k]);
    lambda += wk * wk;
  }
  return lambda;
}

inline double eigenvalue(std::initializer_list<int> mode, const PeriodicGrid& grid) {
  return eigenvalue(std::span<const int>(mode.begin(), mode.size()), grid);
}

/// Smallest nonzero eigenvalue of -Δ on the fibre.
inline double spectral_gap(const PeriodicGrid& grid) {
  double gap = grid.wavenumber(0, 1) * grid.wavenumber(0, 1);
  if (grid.dim() == 2) gap = std::min(gap, grid.wavenumber(1, 1) * grid.wavenumber(1, 1));
  return gap;
}

namespace detail {

inline double slot_eigenvalue(const SpectralField& f, std::size_t idx) {
  const auto l = f.mode(idx);
  return eigenvalue(std::span<const int>(l.data(), f.grid.dim()), f.grid);
}

template <class Multiplier>
SpectralField apply_multiplier(SpectralField u, Multiplier&& m) {
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] *= m(slot_eigenvalue(u, i), i);
  u.enforce_conjugate_symmetry();
  return u;
}

inline void require_nonnegative_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("evolution time must be finite and >= 0");
}

}  // namespace detail

/// Exact solution of ∂t u = a Δu at time t: mode l scaled by exp(-a λ_l t).
///
/// `diffusivity` a covers fibres with metric e^{2c}·flat (a = e^{-2c}).
inline SpectralField heat_evolve(const SpectralField& u0, double t, double diffusivity = 1.0) {
  detail::require_nonnegative_time(t);
  return detail::apply_multiplier(u0, [&](double lambda, std::size_t) {
    return std::exp(-diffusivity * lambda * t);
  });
}

inline ScalarField heat_evolve(const ScalarField& u0, double t, double diffusivity = 1.0) {
  return heat_evolve(SpectralField::from_nodal(u0), t, diffusivity).to_nodal();
}

/// ∫₀ᵗ u(s) ds for the heat flow started at u0. Mode 0 picks up a factor t,
/// mode l ≠ 0 the factor (1 - exp(-a λ_l t)) / (a λ_l).
inline SpectralField heat_time_integral(const SpectralField& u0, double t,
                                        double diffusivity = 1.0) {
  detail::require_nonnegative_time(t);
  return detail::apply_multiplier(u0, [&](double lambda, std::size_t) {
    if (lambda == 0.0) return t;
    const double rate = diffusivity * lambda;
    return -std::expm1(-rate * t) / rate;
  });
}

inline ScalarField heat_time_integral(const ScalarField& u0, double t, double diffusivity = 1.0) {
  return heat_time_integral(SpectralField::from_nodal(u0), t, diffusivity).to_nodal();
}

/// t → ∞ limit of heat_time_integral for zero-mean data: c_l / (a λ_l).
/// The mode-0 coefficient (which would grow linearly) is dropped.
inline SpectralField heat_time_integral_limit(const SpectralField& u0, double diffusivity = 1.0) {
  return detail::apply_multiplier(u0, [&](double lambda, std::size_t) {
    return lambda == 0.0 ? 0.0 : 1.0 / (diffusivity * lambda);
  });
}

inline ScalarField heat_time_integral_limit(const ScalarField& u0, double diffusivity = 1.0) {
  return heat_time_integral_limit(SpectralField::from_nodal(u0), diffusivity).to_nodal();
}

/// Truncated heat kernel Σ_{|l_k| ≤ cutoff} e^{-λ_l t} φ_l(x) conj(φ_l(y))
/// with φ_l = exp(i k_l·x) / sqrt(vol).
inline double heat_kernel_eval(double t, std::span<const double> x, std::span<const double> y,
                               const PeriodicGrid& grid, int cutoff = 64) {
  if (!(t > 0.0)) throw InputError("heat kernel requires t > 0");
  if (cutoff < 1) throw InputError("heat kernel cutoff must be >= 1");
  if (static_cast<int>(x.size()) != grid.dim() || static_cast<int>(y.size()) != grid.dim()) {
    throw InputError("heat kernel point dimension mismatch");
  }
  const double d0 = x[0] - y[0];
  const double d1 = grid.dim() == 2 ? x[1] - y[1] : 0.0;
  const int c1 = grid.dim() == 2 ? cutoff : 0;
  double sum = 0.0;
  for (int l0 = -cutoff; l0 <= cutoff; ++l0) {
    const double k0 = grid.wavenumber(0, l0);
    for (int l1 = -c1; l1 <= c1; ++l1) {
      const double k1 = grid.dim() == 2 ? grid.wavenumber(1, l1) : 0.0;
      sum += std::exp(-(k0 * k0 + k1 * k1) * t) * std::cos(k0 * d0 + k1 * d1);
    }
  }
  return sum / grid.volume();
}

/// Spectral ∂/∂x_axis of a nodal field. The Nyquist mode is discarded.
inline ScalarField spectral_derivative(const ScalarField& u, int axis) {
  if (axis < 0 || axis >= u.grid.dim()) throw InputError("derivative axis out of range");
  SpectralField s = SpectralField::from_nodal(u);
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    const auto ij = s.grid.unflatten(i);
    if (s.grid.is_nyquist(axis, ij[axis])) {
      s.coeffs[i] = 0.0;
      continue;
    }
    const double k = s.grid.wavenumber(axis, s.mode(i)[axis]);
    s.coeffs[i] *= Complex(0.0, k);
  }
  s.enforce_conjugate_symmetry();
  return s.to_nodal();
}

/// Flat spectral Laplacian Σ_k ∂²/∂x_k².
inline ScalarField spectral_laplacian(const ScalarField& u) {
  return detail::apply_multiplier(SpectralField::from_nodal(u),
                                  [](double lambda, std::size_t) { return -lambda; })
      .to_nodal();
}

/// Trigonometric interpolation of u onto another grid of the same torus.
/// Nyquist modes of either grid are dropped.
inline ScalarField spectral_resample(const ScalarField& u, const PeriodicGrid& target) {
  if (target.dim() != u.grid.dim() || target.sides() != u.grid.sides()) {
    throw InputError("resampling needs grids on the same torus");
  }
  const SpectralField src = SpectralField::from_nodal(u);
  SpectralField out(target);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    const auto ij = target.unflatten(i);
    const auto l = out.mode(i);
    std::array<int, 2> slot{0, 0};
    bool keep = true;
    for (int k = 0; k < target.dim(); ++k) {
      slot[k] = u.grid.slot_of_mode(k, l[k]);
      keep = keep && slot[k] >= 0 && !target.is_nyquist(k, ij[k]) &&
             !u.grid.is_nyquist(k, slot[k]);
    }
    if (keep) out.coeffs[i] = src.coeffs[u.grid.flatten(slot[0], slot[1])];
  }
  out.enforce_conjugate_symmetry();
  return out.to_nodal();
}

}  // namespace egf
