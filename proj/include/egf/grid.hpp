#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace egf {

/// Raised when an operation receives arguments outside its contract.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a flow's analytic hypothesis (closedness of θ) fails.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for scenarios the engine has no solver for.
class UnsupportedScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical kernel (e.g. a sparse factorisation) fails.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on a flat circle (dim 1) or flat 2-torus (dim 2).
///
/// Nodes sit at x_k = i_k * L_k / N_k. Storage of fields over the grid is
/// row-major with the last axis fastest.
class PeriodicGrid {
 public:
  PeriodicGrid() : PeriodicGrid(1, {kTwoPi, kTwoPi}, {64, 64}) {}

  PeriodicGrid(int dim, std::array<double, 2> sides, std::array<int, 2> points)
      : dim_(dim), sides_(sides), points_(points) {
    if (dim_ != 1 && dim_ != 2) {
      throw InputError("grid dimension must be 1 or 2, got " + std::to_string(dim_));
    }
    for (int k = 0; k < dim_; ++k) {
      if (!(sides_[k] > 0.0) || !std::isfinite(sides_[k])) {
        throw InputError("grid side lengths must be positive and finite");
      }
      const int m = points_[k];
      if (m < 4 || (m & (m - 1)) != 0) {
        throw InputError("grid points per dimension must be a power of two >= 4, got " +
                         std::to_string(m));
      }
    }
    if (dim_ == 1) {
      sides_[1] = 1.0;
      points_[1] = 1;
    }
  }

  /// Circle of length `length` sampled at `points` nodes.
  static PeriodicGrid circle(double length = kTwoPi, int points = 64) {
    return PeriodicGrid(1, {length, 1.0}, {points, 1});
  }

  /// Flat torus with sides (l0, l1), `points` nodes per axis.
  static PeriodicGrid torus(double l0 = kTwoPi, double l1 = kTwoPi, int points = 64) {
    return PeriodicGrid(2, {l0, l1}, {points, points});
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] double side(int k) const { return sides_[k]; }
  [[nodiscard]] int points(int k) const { return points_[k]; }
  [[nodiscard]] const std::array<double, 2>& sides() const { return sides_; }
  [[nodiscard]] const std::array<int, 2>& point_counts() const { return points_; }

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(points_[0]) * static_cast<std::size_t>(points_[1]);
  }

  [[nodiscard]] double spacing(int k) const { return sides_[k] / points_[k]; }

  [[nodiscard]] double volume() const {
    return dim_ == 1 ? sides_[0] : sides_[0] * sides_[1];
  }

  /// Quadrature weight of one node (periodic trapezoidal rule).
  [[nodiscard]] double cell_volume() const { return volume() / static_cast<double>(size()); }

  /// Multi-index of the node with flat index `idx`.
  [[nodiscard]] std::array<int, 2> unflatten(std::size_t idx) const {
    if (dim_ == 1) return {static_cast<int>(idx), 0};
    return {static_cast<int>(idx / points_[1]), static_cast<int>(idx % points_[1])};
  }

  [[nodiscard]] std::size_t flatten(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) * points_[1] + static_cast<std::size_t>(i1);
  }

  /// Coordinates of node `idx`.
  [[nodiscard]] std::array<double, 2> coord(std::size_t idx) const {
    const auto ij = unflatten(idx);
    return {ij[0] * spacing(0), dim_ == 2 ? ij[1] * spacing(1) : 0.0};
  }

  /// Signed wavenumber index l in FFT ordering for storage slot i along axis k.
  [[nodiscard]] int mode_index(int k, int i) const {
    const int m = points_[k];
    return i <= m / 2 ? i : i - m;
  }

  /// Storage slot of signed mode l along axis k; -1 when the mode is not
  /// representable on this grid.
  [[nodiscard]] int slot_of_mode(int k, int l) const {
    const int m = points_[k];
    if (m == 1) return l == 0 ? 0 : -1;
    if (l > m / 2 || l <= -m / 2) return -1;
    return l >= 0 ? l : l + m;
  }

  /// Angular wavenumber 2π l / L_k.
  [[nodiscard]] double wavenumber(int k, int l) const { return kTwoPi * l / sides_[k]; }

  /// True when slot i along axis k is the unpaired Nyquist mode.
  [[nodiscard]] bool is_nyquist(int k, int i) const {
    return points_[k] > 1 && i == points_[k] / 2;
  }

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) {
    if (a.dim_ != b.dim_) return false;
    for (int k = 0; k < a.dim_; ++k) {
      if (a.sides_[k] != b.sides_[k] || a.points_[k] != b.points_[k]) return false;
    }
    return true;
  }

 private:
  int dim_;
  std::array<double, 2> sides_;
  std::array<int, 2> points_;
};

using FiberGrid = PeriodicGrid;

/// Real field sampled on the nodes of a periodic grid.
struct ScalarField {
  PeriodicGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}
  ScalarField(const PeriodicGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw InputError("field size does not match grid");
  }

  /// Samples `f(coords)` at every node.
  template <class F>
  static ScalarField sample(const PeriodicGrid& g, F&& f) {
    ScalarField out(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto c = g.coord(i);
      if constexpr (requires { f(c[0], c[1]); }) {
        out.values[i] = f(c[0], c[1]);
      } else {
        out.values[i] = f(c[0]);
      }
    }
    return out;
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  /// Trapezoidal average over the grid.
  [[nodiscard]] double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }

  [[nodiscard]] double integral() const { return mean() * grid.volume(); }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  /// Discrete L2 norm (trapezoidal).
  [[nodiscard]] double l2_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s * grid.cell_volume());
  }

  ScalarField& operator+=(const ScalarField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  ScalarField& operator*=(double a) {
    for (double& v : values) v *= a;
    return *this;
  }
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double a, ScalarField b) { return b *= a; }
};

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

}  // namespace egf
