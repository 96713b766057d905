#pragma once

#include <cmath>
#include <vector>

#include "egf/grid.hpp"
#include "egf/parallel.hpp"

namespace egf {

/// Tensor-product grid base × fibre. Node (b, f) lives at flat index
/// b * fiber.size() + f.
struct ProductGrid {
  PeriodicGrid base;
  PeriodicGrid fiber;

  [[nodiscard]] std::size_t size() const { return base.size() * fiber.size(); }
  [[nodiscard]] std::size_t index(std::size_t b, std::size_t f) const {
    return b * fiber.size() + f;
  }
  [[nodiscard]] double cell_volume() const { return base.cell_volume() * fiber.cell_volume(); }

  friend bool operator==(const ProductGrid& a, const ProductGrid& b) {
    return a.base == b.base && a.fiber == b.fiber;
  }
};

/// Real function sampled on base × fibre.
struct ProductScalar {
  ProductGrid grid;
  std::vector<double> values;

  ProductScalar() = default;
  explicit ProductScalar(const ProductGrid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}

  /// Samples f(x, y) where x, y are the base and fibre coordinate pairs.
  template <class F>
  static ProductScalar sample(const ProductGrid& g, F&& f) {
    ProductScalar out(g);
    for (std::size_t b = 0; b < g.base.size(); ++b) {
      const auto x = g.base.coord(b);
      for (std::size_t j = 0; j < g.fiber.size(); ++j) {
        out.values[g.index(b, j)] = f(x, g.fiber.coord(j));
      }
    }
    return out;
  }

  [[nodiscard]] ScalarField fiber_slice(std::size_t b) const {
    const std::size_t nf = grid.fiber.size();
    return ScalarField(grid.fiber, std::vector<double>(values.begin() + b * nf,
                                                       values.begin() + (b + 1) * nf));
  }

  void set_fiber_slice(std::size_t b, const ScalarField& s) {
    std::copy(s.values.begin(), s.values.end(), values.begin() + b * grid.fiber.size());
  }

  [[nodiscard]] ScalarField base_slice(std::size_t f) const {
    ScalarField out(grid.base);
    for (std::size_t b = 0; b < grid.base.size(); ++b) out.values[b] = values[grid.index(b, f)];
    return out;
  }

  void set_base_slice(std::size_t f, const ScalarField& s) {
    for (std::size_t b = 0; b < grid.base.size(); ++b) values[grid.index(b, f)] = s.values[b];
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  /// True when the field is constant along every fibre (within tol).
  [[nodiscard]] bool fiberwise_constant(double tol = 1e-14) const {
    const std::size_t nf = grid.fiber.size();
    for (std::size_t b = 0; b < grid.base.size(); ++b) {
      const double v0 = values[b * nf];
      for (std::size_t j = 1; j < nf; ++j) {
        if (std::abs(values[b * nf + j] - v0) > tol) return false;
      }
    }
    return true;
  }

  ProductScalar& operator+=(const ProductScalar& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  ProductScalar& operator-=(const ProductScalar& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  ProductScalar& operator*=(double a) {
    for (double& v : values) v *= a;
    return *this;
  }
  friend ProductScalar operator+(ProductScalar a, const ProductScalar& b) { return a += b; }
  friend ProductScalar operator-(ProductScalar a, const ProductScalar& b) { return a -= b; }
  friend ProductScalar operator*(double a, ProductScalar b) { return b *= a; }
};

inline double max_abs_diff(const ProductScalar& a, const ProductScalar& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

/// Applies a fibre-local map to every fibre slice, in parallel over base points.
template <class Fn>
ProductScalar map_fibers(const ProductScalar& u, Fn&& fn) {
  ProductScalar out(u.grid);
  parallel_for(u.grid.base.size(), [&](std::size_t b) {
    out.set_fiber_slice(b, fn(u.fiber_slice(b), b));
  });
  return out;
}

/// Applies a base-local map to every base slice.
template <class Fn>
ProductScalar map_bases(const ProductScalar& u, Fn&& fn) {
  ProductScalar out(u.grid);
  for (std::size_t f = 0; f < u.grid.fiber.size(); ++f) {
    out.set_base_slice(f, fn(u.base_slice(f)));
  }
  return out;
}

/// Which distribution a vector field is tangent to.
enum class Along { fiber, base };

/// Vector field tangent to the fibres (D⊥) or to the base (D), stored by its
/// coefficients with respect to the coordinate fields ∂_k.
struct ProductVector {
  ProductGrid grid;
  Along along = Along::fiber;
  std::vector<ProductScalar> comps;

  ProductVector() = default;
  ProductVector(const ProductGrid& g, Along a) : grid(g), along(a) {
    const int d = a == Along::fiber ? g.fiber.dim() : g.base.dim();
    comps.assign(static_cast<std::size_t>(d), ProductScalar(g));
  }

  [[nodiscard]] int dim() const { return static_cast<int>(comps.size()); }

  ProductVector& operator+=(const ProductVector& o) {
    for (std::size_t k = 0; k < comps.size(); ++k) comps[k] += o.comps[k];
    return *this;
  }
  ProductVector& operator-=(const ProductVector& o) {
    for (std::size_t k = 0; k < comps.size(); ++k) comps[k] -= o.comps[k];
    return *this;
  }
  ProductVector& operator*=(double a) {
    for (auto& c : comps) c *= a;
    return *this;
  }
  friend ProductVector operator+(ProductVector a, const ProductVector& b) { return a += b; }
  friend ProductVector operator-(ProductVector a, const ProductVector& b) { return a -= b; }
  friend ProductVector operator*(double a, ProductVector b) { return b *= a; }
};

/// Double-twisted product metric g = e^{2φ} g_base ⊕ e^{2ψ} g_fibre on a
/// flat base × flat fibre. D is tangent to the base (dimension n), D⊥ to
/// the fibres (dimension p). ψ never changes along a flow.
struct ProductState {
  ProductGrid grid;
  ProductScalar phi;
  ProductScalar psi;
  double t = 0.0;

  ProductState() = default;
  ProductState(ProductScalar phi_in, ProductScalar psi_in, double time = 0.0)
      : grid(phi_in.grid), phi(std::move(phi_in)), psi(std::move(psi_in)), t(time) {
    if (!(psi.grid == grid)) throw InputError("phi and psi live on different grids");
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
      if (!std::isfinite(phi.values[i]) || !std::isfinite(psi.values[i])) {
        throw InputError("phi and psi must be finite everywhere");
      }
    }
  }

  /// Flat product metric (φ = ψ = 0).
  static ProductState flat(const ProductGrid& g) {
    return ProductState(ProductScalar(g), ProductScalar(g));
  }

  [[nodiscard]] int n() const { return grid.base.dim(); }
  [[nodiscard]] int p() const { return grid.fiber.dim(); }
};

}  // namespace egf
