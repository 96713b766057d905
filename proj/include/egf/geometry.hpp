#pragma once

#include <cmath>
#include <vector>

#include "egf/one_form.hpp"
#include "egf/product_state.hpp"
#include "egf/spectral.hpp"

namespace egf {

// ---------------------------------------------------------------------------
// Pointwise helpers and spectral derivatives along either factor.
// ---------------------------------------------------------------------------

template <class Fn>
ProductScalar pointwise(const ProductScalar& a, Fn&& fn) {
  ProductScalar out(a.grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = fn(a.values[i]);
  return out;
}

template <class Fn>
ProductScalar pointwise(const ProductScalar& a, const ProductScalar& b, Fn&& fn) {
  ProductScalar out(a.grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = fn(a.values[i], b.values[i]);
  return out;
}

inline ProductScalar operator*(const ProductScalar& a, const ProductScalar& b) {
  return pointwise(a, b, [](double x, double y) { return x * y; });
}

inline ProductScalar exp_of(const ProductScalar& a, double scale = 1.0) {
  return pointwise(a, [scale](double v) { return std::exp(scale * v); });
}

/// ∂/∂y_axis along the fibres.
inline ProductScalar fiber_derivative(const ProductScalar& u, int axis) {
  return map_fibers(u, [axis](const ScalarField& s, std::size_t) {
    return spectral_derivative(s, axis);
  });
}

/// ∂/∂x_axis along the base.
inline ProductScalar base_derivative(const ProductScalar& u, int axis) {
  return map_bases(u, [axis](const ScalarField& s) { return spectral_derivative(s, axis); });
}

/// Fibre 1-form at base point b, built from a fibre vector field by lowering
/// with g⊥ = e^{2ψ}·flat.
inline OneFormField lower_on_fiber(const ProductVector& xi, const ProductScalar& psi,
                                   std::size_t b) {
  OneFormField w(xi.grid.fiber);
  const ScalarField psi_b = psi.fiber_slice(b);
  for (int k = 0; k < xi.dim(); ++k) {
    ScalarField c = xi.comps[k].fiber_slice(b);
    for (std::size_t j = 0; j < c.size(); ++j) c.values[j] *= std::exp(2.0 * psi_b.values[j]);
    w.components[k] = std::move(c);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Leafwise operators for g⊥ = e^{2ψ}·flat. None depends on φ, so all of
// them are t-independent along a flow.
// ---------------------------------------------------------------------------

/// ∇⊥u = e^{-2ψ} Σ_k ∂_{y_k}u ∂_{y_k}.
inline ProductVector grad_perp(const ProductScalar& u, const ProductState& state) {
  ProductVector out(u.grid, Along::fiber);
  const ProductScalar w = exp_of(state.psi, -2.0);
  for (int k = 0; k < state.p(); ++k) out.comps[k] = w * fiber_derivative(u, k);
  return out;
}

/// Div⊥ξ = e^{-pψ} Σ_k ∂_{y_k}(e^{pψ} ξ^k), the divergence on each leaf.
inline ProductScalar div_perp(const ProductVector& xi, const ProductState& state) {
  const double p = state.p();
  const ProductScalar up = exp_of(state.psi, p);
  const ProductScalar down = exp_of(state.psi, -p);
  ProductScalar acc(xi.grid);
  for (int k = 0; k < xi.dim(); ++k) acc += fiber_derivative(up * xi.comps[k], k);
  return down * acc;
}

/// Δ⊥u = Div⊥(∇⊥u).
inline ProductScalar laplacian_perp(const ProductScalar& u, const ProductState& state) {
  return div_perp(grad_perp(u, state), state);
}

/// g⊥(ξ, η) for fibre vectors.
inline ProductScalar perp_inner(const ProductVector& xi, const ProductVector& eta,
                                const ProductState& state) {
  ProductScalar acc(xi.grid);
  for (int k = 0; k < xi.dim(); ++k) acc += xi.comps[k] * eta.comps[k];
  return exp_of(state.psi, 2.0) * acc;
}

/// ξ(u) = Σ ξ^k ∂_k u for a fibre vector ξ.
inline ProductScalar fiber_directional(const ProductVector& xi, const ProductScalar& u) {
  ProductScalar acc(u.grid);
  for (int k = 0; k < xi.dim(); ++k) acc += xi.comps[k] * fiber_derivative(u, k);
  return acc;
}

// ---------------------------------------------------------------------------
// Volume.
// ---------------------------------------------------------------------------

/// Density e^{nφ + pψ} of dvol_g w.r.t. the flat product measure.
inline ProductScalar volume_form_weight(const ProductState& state) {
  const double n = state.n();
  const double p = state.p();
  return pointwise(state.phi, state.psi,
                   [n, p](double phi, double psi) { return std::exp(n * phi + p * psi); });
}

/// ∫_M f dvol_g by the periodic trapezoidal rule.
inline double integrate(const ProductScalar& f, const ProductState& state) {
  const ProductScalar w = volume_form_weight(state);
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * w.values[i];
  return s * state.grid.cell_volume();
}

inline double volume(const ProductState& state) {
  return integrate(ProductScalar(state.grid, 1.0), state);
}

/// Fibre average of u at base point b, weighted by the leaf volume e^{pψ}.
inline double leaf_average(const ProductScalar& u, const ProductState& state, std::size_t b) {
  const ScalarField ub = u.fiber_slice(b);
  const ScalarField psib = state.psi.fiber_slice(b);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < ub.size(); ++j) {
    const double w = std::exp(state.p() * psib.values[j]);
    num += w * ub.values[j];
    den += w;
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Mean curvature and second fundamental forms.
// ---------------------------------------------------------------------------

/// Mean curvature H = tr b of the base leaves M₁ × {y}: H = -n ∇⊥φ.
inline ProductVector twisted_mean_curvature(const ProductState& state) {
  ProductVector h = grad_perp(state.phi, state);
  h *= -static_cast<double>(state.n());
  return h;
}

/// Index of the unordered pair (i, j), i ≤ j, in a packed symmetric block.
inline std::size_t sym_index(int i, int j, int dim) {
  if (i > j) std::swap(i, j);
  return dim == 1 ? 0 : static_cast<std::size_t>(i == 0 ? j : 2);
}

inline int sym_size(int dim) { return dim * (dim + 1) / 2; }

/// Second fundamental data of the pair (D, D⊥).
///
/// b[sym_index(i,j)] holds the D⊥-vector b(∂_{x_i}, ∂_{x_j}); bperp holds the
/// D-vectors b⊥(∂_{y_α}, ∂_{y_β}). H, Hperp are the traces.
struct SecondFundamentalData {
  ProductVector H;
  std::vector<ProductVector> b;
  ProductVector Hperp;
  std::vector<ProductVector> bperp;
};

/// Computes b, b⊥ and their traces from the metric components through the
/// Koszul formula on coordinate fields: for X, Y ∈ D and ξ ∈ D⊥ coordinate
/// fields, 2 g(∇_X Y, ξ) = -ξ(g(X, Y)); symmetrically for b⊥.
inline SecondFundamentalData second_fundamental(const ProductState& state) {
  const ProductGrid& g = state.grid;
  const int n = state.n();
  const int p = state.p();
  const ProductScalar g_base = exp_of(state.phi, 2.0);   // g_ij = e^{2φ} δ_ij
  const ProductScalar g_fiber = exp_of(state.psi, 2.0);  // g_αβ = e^{2ψ} δ_αβ
  const ProductScalar inv_base = exp_of(state.phi, -2.0);
  const ProductScalar inv_fiber = exp_of(state.psi, -2.0);

  SecondFundamentalData out;
  out.b.assign(sym_size(n), ProductVector(g, Along::fiber));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const ProductScalar gij = i == j ? g_base : ProductScalar(g);
      auto& bij = out.b[sym_index(i, j, n)];
      for (int a = 0; a < p; ++a) bij.comps[a] = -0.5 * (inv_fiber * fiber_derivative(gij, a));
    }
  }
  out.H = ProductVector(g, Along::fiber);
  for (int i = 0; i < n; ++i) {
    ProductVector term = out.b[sym_index(i, i, n)];
    for (auto& c : term.comps) c = inv_base * c;
    out.H += term;
  }

  out.bperp.assign(sym_size(p), ProductVector(g, Along::base));
  for (int a = 0; a < p; ++a) {
    for (int c = a; c < p; ++c) {
      const ProductScalar gac = a == c ? g_fiber : ProductScalar(g);
      auto& bac = out.bperp[sym_index(a, c, p)];
      for (int i = 0; i < n; ++i) bac.comps[i] = -0.5 * (inv_base * base_derivative(gac, i));
    }
  }
  out.Hperp = ProductVector(g, Along::base);
  for (int a = 0; a < p; ++a) {
    ProductVector term = out.bperp[sym_index(a, a, p)];
    for (auto& c : term.comps) c = inv_fiber * c;
    out.Hperp += term;
  }
  return out;
}

/// Second fundamental data after the D-conformal change ĝ ↦ e^{2δ} ĝ:
///   b̃ = e^{2δ}(b - (∇⊥δ) ĝ),  H̃ = H - n ∇⊥δ,
/// and b̃⊥ = e^{-2δ} b⊥, H̃⊥ = e^{-2δ} H⊥ (raising with the rescaled ĝ).
/// `state` supplies ĝ and g⊥ before the change.
inline SecondFundamentalData conformal_change(const SecondFundamentalData& data,
                                              const ProductScalar& delta,
                                              const ProductState& state) {
  const int n = state.n();
  const ProductVector grad = grad_perp(delta, state);
  const ProductScalar up = exp_of(delta, 2.0);
  const ProductScalar down = exp_of(delta, -2.0);
  const ProductScalar g_base = exp_of(state.phi, 2.0);

  SecondFundamentalData out = data;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      auto& bij = out.b[sym_index(i, j, n)];
      for (int a = 0; a < bij.dim(); ++a) {
        ProductScalar c = bij.comps[a];
        if (i == j) c -= grad.comps[a] * g_base;
        bij.comps[a] = up * c;
      }
    }
  }
  ProductVector shift = grad;
  shift *= static_cast<double>(n);
  out.H -= shift;
  for (auto& bac : out.bperp) {
    for (auto& c : bac.comps) c = down * c;
  }
  for (auto& c : out.Hperp.comps) c = down * c;
  return out;
}

/// Extrinsic property flags of one distribution with the residuals behind them.
struct ExtrinsicFlags {
  bool umbilical = false;
  bool harmonic = false;
  bool totally_geodesic = false;
  double umbilical_residual = 0.0;
  double mean_curvature_norm = 0.0;
  double second_fundamental_norm = 0.0;
};

struct Classification {
  ExtrinsicFlags d;
  ExtrinsicFlags dperp;
};

namespace detail {

// Sup over points of the g-norm of a vector field tangent to `along`.
inline double sup_norm(const ProductVector& v, const ProductState& state,
                       const ProductScalar& extra_scale) {
  const ProductScalar& conf = v.along == Along::fiber ? state.psi : state.phi;
  double m = 0.0;
  for (std::size_t idx = 0; idx < v.grid.size(); ++idx) {
    double s = 0.0;
    for (const auto& c : v.comps) s += c.values[idx] * c.values[idx];
    m = std::max(m, std::exp(conf.values[idx]) * std::sqrt(s) * extra_scale.values[idx]);
  }
  return m;
}

inline ExtrinsicFlags classify_block(const std::vector<ProductVector>& b, const ProductVector& h,
                                     const ProductScalar& metric_factor, int dim,
                                     const ProductState& state, double tol) {
  // Orthonormal frame e_i = e^{-conf} ∂_i turns b_ij into e^{-2conf} b_ij.
  const ProductScalar frame = pointwise(metric_factor, [](double g) { return 1.0 / g; });
  const ProductScalar one(h.grid, 1.0);
  ExtrinsicFlags f;
  f.mean_curvature_norm = sup_norm(h, state, one);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const auto& bij = b[sym_index(i, j, dim)];
      f.second_fundamental_norm = std::max(f.second_fundamental_norm, sup_norm(bij, state, frame));
      ProductVector r = bij;
      if (i == j) {
        for (int a = 0; a < r.dim(); ++a) {
          r.comps[a] -= (1.0 / dim) * (h.comps[a] * metric_factor);
        }
      }
      f.umbilical_residual = std::max(f.umbilical_residual, sup_norm(r, state, frame));
    }
  }
  f.umbilical = f.umbilical_residual < tol;
  f.harmonic = f.mean_curvature_norm < tol;
  f.totally_geodesic = f.umbilical && f.harmonic;
  return f;
}

}  // namespace detail

/// Umbilical / harmonic / totally geodesic flags for D and D⊥.
inline Classification classify(const ProductState& state, const SecondFundamentalData& data,
                               double tol) {
  Classification c;
  c.d = detail::classify_block(data.b, data.H, exp_of(state.phi, 2.0), state.n(), state, tol);
  c.dperp =
      detail::classify_block(data.bperp, data.Hperp, exp_of(state.psi, 2.0), state.p(), state, tol);
  return c;
}

inline Classification classify(const ProductState& state, double tol) {
  return classify(state, second_fundamental(state), tol);
}

}  // namespace egf
