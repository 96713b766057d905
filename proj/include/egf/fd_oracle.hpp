#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <vector>

#include "egf/geometry.hpp"
#include "egf/grid.hpp"
#include "egf/product_state.hpp"

namespace egf {

/// θ-scheme parameters for the implicit fibre heat solver.
struct FdScheme {
  double dt = 1e-3;
  double theta = 0.5;  // 0.5 = Crank–Nicolson, 1 = backward Euler
  int grid_points = 256;

  void validate() const {
    if (!(dt > 0.0)) throw InputError("fd scheme needs dt > 0");
    if (!(theta >= 0.5 && theta <= 1.0)) {
      throw InputError("fd scheme needs 0.5 <= theta <= 1 for unconditional stability");
    }
    if (grid_points < 4 || (grid_points & (grid_points - 1)) != 0) {
      throw InputError("fd grid points must be a power of two >= 4");
    }
  }
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Second-order periodic stencil of Δ⊥ for g⊥ = e^{2ψ}·flat.
///
/// p = 1 uses the conservative flux form e^{-ψ} ∂(e^{-ψ} ∂u) with face
/// coefficients exp(-(ψ_i + ψ_{i+1})/2), which equals e^{-2ψ}(u'' - ψ'u').
/// p = 2 uses e^{-2ψ} times the five-point Laplacian. In both cases
/// Σ_i e^{pψ_i} (L u)_i = 0, so the leaf-volume-weighted mean is conserved.
inline SparseMatrix fd_laplacian_matrix(const ScalarField& psi) {
  const PeriodicGrid& g = psi.grid;
  const auto size = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.size() * (g.dim() == 1 ? 3 : 5));
  if (g.dim() == 1) {
    const int m = g.points(0);
    const double h2 = g.spacing(0) * g.spacing(0);
    for (int i = 0; i < m; ++i) {
      const int ip = (i + 1) % m;
      const int im = (i + m - 1) % m;
      const double right = std::exp(-0.5 * (psi[i] + psi[ip]));
      const double left = std::exp(-0.5 * (psi[i] + psi[im]));
      const double scale = std::exp(-psi[i]) / h2;
      trip.emplace_back(i, ip, scale * right);
      trip.emplace_back(i, im, scale * left);
      trip.emplace_back(i, i, -scale * (right + left));
    }
  } else {
    const int m0 = g.points(0);
    const int m1 = g.points(1);
    const double h0 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double h1 = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int i = 0; i < m0; ++i) {
      for (int j = 0; j < m1; ++j) {
        const auto row = static_cast<Eigen::Index>(g.flatten(i, j));
        const double s = std::exp(-2.0 * psi[row]);
        trip.emplace_back(row, g.flatten((i + 1) % m0, j), s * h0);
        trip.emplace_back(row, g.flatten((i + m0 - 1) % m0, j), s * h0);
        trip.emplace_back(row, g.flatten(i, (j + 1) % m1), s * h1);
        trip.emplace_back(row, g.flatten(i, (j + m1 - 1) % m1), s * h1);
        trip.emplace_back(row, row, -2.0 * s * (h0 + h1));
      }
    }
  }
  SparseMatrix lap(size, size);
  lap.setFromTriplets(trip.begin(), trip.end());
  return lap;
}

inline ScalarField fd_laplacian_conformal(const ScalarField& u, const ScalarField& psi) {
  if (!(u.grid == psi.grid)) throw InputError("u and psi must share a grid");
  const SparseMatrix lap = fd_laplacian_matrix(psi);
  const Eigen::Map<const Eigen::VectorXd> uv(u.values.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::VectorXd r = lap * uv;
  return ScalarField(u.grid, std::vector<double>(r.data(), r.data() + r.size()));
}

/// Implicit θ-scheme march of ∂t u = Δ⊥u, reporting u at each requested time
/// (ascending, ≥ 0). dt is shrunk per interval so every sample is hit exactly.
inline std::vector<ScalarField> fd_heat_run_samples(const ScalarField& u0, const ScalarField& psi,
                                                    const std::vector<double>& times,
                                                    const FdScheme& scheme) {
  scheme.validate();
  if (!(u0.grid == psi.grid)) throw InputError("u0 and psi must share a grid");
  const SparseMatrix lap = fd_laplacian_matrix(psi);
  const auto size = lap.rows();
  SparseMatrix identity(size, size);
  identity.setIdentity();

  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(u0.values.data(), size);
  std::vector<ScalarField> out;
  out.reserve(times.size());
  double now = 0.0;
  double factored_dt = -1.0;
  Eigen::SparseLU<SparseMatrix> solver;
  SparseMatrix explicit_part;
  for (double target : times) {
    if (target < now - 1e-15) throw InputError("fd sample times must be ascending and >= 0");
    const double span = target - now;
    if (span > 0.0) {
      const auto steps = static_cast<long>(std::ceil(span / scheme.dt - 1e-9));
      const double dt = span / static_cast<double>(steps);
      if (std::abs(dt - factored_dt) > 1e-15 * dt) {
        const SparseMatrix implicit_part = identity - (scheme.theta * dt) * lap;
        explicit_part = identity + ((1.0 - scheme.theta) * dt) * lap;
        solver.compute(implicit_part);
        if (solver.info() != Eigen::Success) {
          throw NumericalError("sparse LU factorisation of the implicit step failed");
        }
        factored_dt = dt;
      }
      for (long s = 0; s < steps; ++s) {
        const Eigen::VectorXd rhs = explicit_part * u;
        u = solver.solve(rhs);
        if (solver.info() != Eigen::Success) throw NumericalError("implicit step solve failed");
      }
      now = target;
    }
    out.emplace_back(u0.grid, std::vector<double>(u.data(), u.data() + u.size()));
  }
  return out;
}

inline ScalarField fd_heat_run(const ScalarField& u0, const ScalarField& psi, double t_end,
                               const FdScheme& scheme) {
  if (!(t_end >= 0.0)) throw InputError("fd run needs tEnd >= 0");
  return fd_heat_run_samples(u0, psi, {t_end}, scheme).front();
}

namespace detail {

inline ScalarField central_difference(const ScalarField& u, int axis) {
  const PeriodicGrid& g = u.grid;
  ScalarField out(g);
  const double inv = 1.0 / (2.0 * g.spacing(axis));
  const int m0 = g.points(0);
  const int m1 = g.points(1);
  for (int i = 0; i < m0; ++i) {
    for (int j = 0; j < m1; ++j) {
      const std::size_t fwd = axis == 0 ? g.flatten((i + 1) % m0, j) : g.flatten(i, (j + 1) % m1);
      const std::size_t bwd =
          axis == 0 ? g.flatten((i + m0 - 1) % m0, j) : g.flatten(i, (j + m1 - 1) % m1);
      out.values[g.flatten(i, j)] = (u.values[fwd] - u.values[bwd]) * inv;
    }
  }
  return out;
}

}  // namespace detail

/// b(∂_{x_i}, ∂_{x_j}) of the base leaves by centred differences of the
/// metric components through Koszul, 2 g(∇_{∂i}∂j, ∂α) = -∂_α g_ij.
inline std::vector<ProductVector> fd_second_fundamental_from_metric(const ProductState& state) {
  const int n = state.n();
  const int p = state.p();
  const ProductScalar g_base = exp_of(state.phi, 2.0);
  const ProductScalar inv_fiber = exp_of(state.psi, -2.0);
  std::vector<ProductVector> b(sym_size(n), ProductVector(state.grid, Along::fiber));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const ProductScalar gij = i == j ? g_base : ProductScalar(state.grid);
      for (int a = 0; a < p; ++a) {
        const ProductScalar d = map_fibers(gij, [a](const ScalarField& s, std::size_t) {
          return detail::central_difference(s, a);
        });
        b[sym_index(i, j, n)].comps[a] = -0.5 * (inv_fiber * d);
      }
    }
  }
  return b;
}

/// H = Σ_i g^{ii} b(∂_i, ∂_i) from the finite-difference second fundamental form.
inline ProductVector fd_mean_curvature_from_metric(const ProductState& state) {
  const auto b = fd_second_fundamental_from_metric(state);
  const ProductScalar inv_base = exp_of(state.phi, -2.0);
  ProductVector h(state.grid, Along::fiber);
  for (int i = 0; i < state.n(); ++i) {
    const auto& bii = b[sym_index(i, i, state.n())];
    for (int a = 0; a < state.p(); ++a) h.comps[a] += inv_base * bii.comps[a];
  }
  return h;
}

}  // namespace egf
