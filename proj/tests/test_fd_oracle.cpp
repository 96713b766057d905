#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace egf;
using egf::testing::field;
using egf::testing::make_state;

namespace {

ScalarField on_circle(int points, double (*f)(double)) {
  return ScalarField::sample(PeriodicGrid::circle(kTwoPi, points), f);
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST(FdLaplacian, FlatCircle) {
  for (int m : {64, 256}) {
    const auto u = on_circle(m, [](double y) { return std::cos(y); });
    const ScalarField lap = fd_laplacian_conformal(u, ScalarField(u.grid));
    const double h = u.grid.spacing(0);
    EXPECT_LT(max_abs_diff(lap, -1.0 * u), 1.01 * h * h / 12.0) << m;
  }
}

TEST(FdLaplacian, ConstantPsiScales) {
  const auto u = on_circle(64, [](double y) { return std::sin(3 * y) + std::cos(y); });
  const ScalarField flat = fd_laplacian_conformal(u, ScalarField(u.grid));
  const ScalarField scaled = fd_laplacian_conformal(u, ScalarField(u.grid, 0.3));
  EXPECT_LT(max_abs_diff(scaled, std::exp(-0.6) * flat), 1e-12);
}

TEST(FdLaplacian, WarpedCircleSecondOrder) {
  std::vector<double> errs;
  for (int m : {64, 128, 256}) {
    const auto u = on_circle(m, [](double y) { return std::sin(y); });
    const auto psi = on_circle(m, [](double y) { return 0.1 * std::cos(y); });
    // Spectral evaluation of e^{-2ψ}(u'' - ψ'u').
    const ScalarField du = spectral_derivative(u, 0);
    const ScalarField ddu = spectral_derivative(du, 0);
    const ScalarField dpsi = spectral_derivative(psi, 0);
    ScalarField ref(u.grid);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ref[i] = std::exp(-2 * psi[i]) * (ddu[i] - dpsi[i] * du[i]);
    }
    errs.push_back(max_abs_diff(fd_laplacian_conformal(u, psi), ref));
  }
  EXPECT_NEAR(order(errs[0], errs[1]), 2.0, 0.1);
  EXPECT_NEAR(order(errs[1], errs[2]), 2.0, 0.1);
}

TEST(FdLaplacian, ConformalTorusSecondOrder) {
  std::vector<double> errs;
  for (int m : {16, 32, 64}) {
    const PeriodicGrid g = PeriodicGrid::torus(kTwoPi, kTwoPi, m);
    const auto u = ScalarField::sample(g, [](double a, double b) { return std::sin(a) * std::cos(b); });
    const auto psi = ScalarField::sample(g, [](double a, double) { return 0.2 * std::cos(a); });
    const auto ref = ScalarField::sample(g, [](double a, double b) {
      return -2.0 * std::exp(-0.4 * std::cos(a)) * std::sin(a) * std::cos(b);
    });
    errs.push_back(max_abs_diff(fd_laplacian_conformal(u, psi), ref));
  }
  EXPECT_NEAR(order(errs[0], errs[1]), 2.0, 0.1);
  EXPECT_NEAR(order(errs[1], errs[2]), 2.0, 0.1);
}

TEST(FdLaplacian, AnnihilatesWeightedMean) {
  const auto u = on_circle(64, [](double y) { return std::exp(std::sin(y)); });
  const auto psi = on_circle(64, [](double y) { return 0.3 * std::cos(2 * y); });
  const ScalarField lap = fd_laplacian_conformal(u, psi);
  double s = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) s += std::exp(psi[i]) * lap[i];
  EXPECT_LT(std::abs(s), 1e-10);
}

TEST(FdHeatRun, ConstantIsFixed) {
  const ScalarField c(PeriodicGrid::circle(kTwoPi, 32), 1.7);
  const ScalarField out = fd_heat_run(c, ScalarField(c.grid), 1.0, FdScheme{});
  EXPECT_LT(max_abs_diff(out, c), 1e-13);
}

TEST(FdHeatRun, MatchesClosedForm) {
  const auto u0 = on_circle(256, [](double y) { return std::cos(y); });
  FdScheme scheme;
  scheme.dt = 1e-3;
  const ScalarField out = fd_heat_run(u0, ScalarField(u0.grid), 1.0, scheme);
  // Second-order stencil: the discrete eigenvalue is 1 - h²/12 + O(h⁴).
  const double h = u0.grid.spacing(0);
  const double lambda_h = 4.0 / (h * h) * std::pow(std::sin(h / 2), 2);
  const double z = lambda_h * scheme.dt;
  const double amp = std::pow((1 - z / 2) / (1 + z / 2), 1000);
  EXPECT_LT(max_abs_diff(out, amp * u0), 1e-12);
  EXPECT_LT(max_abs_diff(out, std::exp(-1.0) * u0), 1.9e-5);
}

TEST(FdHeatRun, ConservesWeightedMeanEachStep) {
  const auto u0 = on_circle(64, [](double y) { return std::sin(y) + 0.2 * std::cos(3 * y) + 1.0; });
  const auto psi = on_circle(64, [](double y) { return 0.2 * std::sin(y); });
  const auto weighted = [&](const ScalarField& u) {
    double s = 0.0, w = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      s += std::exp(psi[i]) * u[i];
      w += std::exp(psi[i]);
    }
    return s / w;
  };
  FdScheme scheme;
  scheme.dt = 0.01;
  std::vector<double> times;
  for (int k = 1; k <= 50; ++k) times.push_back(0.01 * k);
  const auto runs = fd_heat_run_samples(u0, psi, times, scheme);
  for (const auto& u : runs) EXPECT_NEAR(weighted(u), weighted(u0), 1e-12);
}

TEST(FdHeatRun, BackwardEulerMaximumPrinciple) {
  const auto u0 = on_circle(64, [](double y) { return y < M_PI ? 1.0 : -0.5; });
  const auto psi = on_circle(64, [](double y) { return 0.3 * std::cos(y); });
  FdScheme scheme;
  scheme.theta = 1.0;
  scheme.dt = 0.05;
  double hi = 1.0, lo = -0.5;
  std::vector<double> times;
  for (int k = 1; k <= 20; ++k) times.push_back(0.05 * k);
  for (const auto& u : fd_heat_run_samples(u0, psi, times, scheme)) {
    const auto [mn, mx] = std::minmax_element(u.values.begin(), u.values.end());
    EXPECT_LE(*mx, hi + 1e-14);
    EXPECT_GE(*mn, lo - 1e-14);
    hi = *mx;
    lo = *mn;
  }
}

TEST(FdHeatRun, HitsSampleTimesExactly) {
  const auto u0 = on_circle(128, [](double y) { return std::cos(2 * y); });
  FdScheme scheme;
  scheme.dt = 0.003;  // does not divide the sample spacing
  const auto runs = fd_heat_run_samples(u0, ScalarField(u0.grid), {0.0, 0.1, 0.25}, scheme);
  EXPECT_LT(max_abs_diff(runs[0], u0), 1e-15);
  const double h = u0.grid.spacing(0);
  const double lambda_h = 4.0 / (h * h) * std::pow(std::sin(h), 2);
  EXPECT_LT(max_abs_diff(runs[2], std::exp(-lambda_h * 0.25) * u0), 2e-5);
}

TEST(FdHeatRun, RejectsBadSchemes) {
  const auto u0 = on_circle(16, [](double y) { return std::cos(y); });
  FdScheme scheme;
  scheme.theta = 0.3;
  EXPECT_THROW(fd_heat_run(u0, ScalarField(u0.grid), 1.0, scheme), InputError);
  scheme = FdScheme{};
  scheme.dt = 0.0;
  EXPECT_THROW(fd_heat_run(u0, ScalarField(u0.grid), 1.0, scheme), InputError);
  EXPECT_THROW(fd_heat_run(u0, ScalarField(u0.grid), -1.0, FdScheme{}), InputError);
  EXPECT_THROW(fd_heat_run_samples(u0, ScalarField(u0.grid), {0.5, 0.2}, FdScheme{}), InputError);
}

TEST(FdHeatRun, SpatialConvergenceWithVariablePsi) {
  // Reference: the same scheme on a 1024-point grid.
  FdScheme scheme;
  scheme.dt = 1e-3;
  const auto solve = [&](int m) {
    const auto u0 = on_circle(m, [](double y) { return std::cos(y) + 0.3 * std::sin(2 * y); });
    const auto psi = on_circle(m, [](double y) { return 0.2 * std::sin(y); });
    return fd_heat_run(u0, psi, 0.5, scheme);
  };
  const ScalarField ref = solve(1024);
  std::vector<double> errs;
  for (int m : {32, 64, 128}) {
    const ScalarField u = solve(m);
    const int stride = 1024 / m;
    double e = 0.0;
    for (int i = 0; i < m; ++i) e = std::max(e, std::abs(u[i] - ref[i * stride]));
    errs.push_back(e);
  }
  EXPECT_NEAR(order(errs[0], errs[1]), 2.0, 0.2);
  EXPECT_NEAR(order(errs[1], errs[2]), 2.0, 0.2);
}

TEST(FdMeanCurvature, ProductMetricIsMinimal) {
  const ProductGrid g{PeriodicGrid::circle(kTwoPi, 4), PeriodicGrid::circle(kTwoPi, 32)};
  const auto s = make_state(g, [](auto x, auto) { return std::cos(x[0]); }, [](auto, auto) { return 0.2; });
  EXPECT_LT(fd_mean_curvature_from_metric(s).comps[0].max_abs(), 1e-15);
}

TEST(FdMeanCurvature, SecondOrderAgainstClosedForm) {
  std::vector<double> errs;
  for (int m : {32, 64, 128}) {
    const ProductGrid g{PeriodicGrid::circle(kTwoPi, 4), PeriodicGrid::circle(kTwoPi, m)};
    const auto s = make_state(g, [](auto, auto y) { return 0.2 * std::cos(y[0]); },
                              [](auto, auto) { return 0.0; });
    const auto expect = field(g, [](auto, auto y) { return 0.2 * std::sin(y[0]); });
    errs.push_back(max_abs_diff(fd_mean_curvature_from_metric(s).comps[0], expect));
  }
  EXPECT_LT(errs[1], 1e-3);
  EXPECT_NEAR(order(errs[0], errs[1]), 2.0, 0.1);
  EXPECT_NEAR(order(errs[1], errs[2]), 2.0, 0.1);
}

TEST(FdMeanCurvature, AgreesWithSpectralOnTorusFibres) {
  std::vector<double> errs;
  for (int m : {16, 32, 64}) {
    const ProductGrid g{PeriodicGrid::circle(kTwoPi, 4), PeriodicGrid::torus(kTwoPi, kTwoPi, m)};
    const auto s = make_state(g, [](auto, auto y) { return 0.1 * std::cos(y[0] - y[1]); },
                              [](auto, auto y) { return 0.1 * std::sin(y[1]); });
    const auto spectral = twisted_mean_curvature(s);
    const auto fd = fd_mean_curvature_from_metric(s);
    errs.push_back(std::max(max_abs_diff(fd.comps[0], spectral.comps[0]),
                            max_abs_diff(fd.comps[1], spectral.comps[1])));
  }
  EXPECT_NEAR(order(errs[0], errs[1]), 2.0, 0.15);
  EXPECT_NEAR(order(errs[1], errs[2]), 2.0, 0.15);
}
