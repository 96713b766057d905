#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "egf/egf.hpp"

using namespace egf;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool pass, double measured, double tol) {
  std::printf("%s %2d %-34s measured=%.3e tol=%.1e\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              measured, tol);
  if (!pass) ++failures;
}

ProductGrid circle_product(int base = 4, int fiber = 64) {
  return {PeriodicGrid::circle(kTwoPi, base), PeriodicGrid::circle(kTwoPi, fiber)};
}

template <class Phi, class Psi>
ProductState state(const ProductGrid& g, Phi phi, Psi psi) {
  return ProductState(ProductScalar::sample(g, phi), ProductScalar::sample(g, psi));
}

const auto kZero = [](auto, auto) { return 0.0; };

ProductState cos_state() {
  return state(circle_product(), [](auto, auto y) { return 0.2 * std::cos(y[0]); }, kZero);
}

FlowConfig sampled(std::vector<double> samples) {
  FlowConfig c;
  c.t_end = samples.back();
  c.samples = std::move(samples);
  return c;
}

double worst(const std::vector<CheckReport>& reports, const std::string& name = "") {
  double m = 0.0;
  for (const auto& r : reports) {
    if (name.empty() || r.name == name) m = std::max(m, r.residual);
  }
  return m;
}

void spectral_decay() {
  const auto traj = run_egf(cos_state(), sampled({0.0, 0.5, 1.0, 2.0}));
  double err = 0.0;
  for (const auto& d : traj.diagnostics) {
    if (d.t > 0.0) err = std::max(err, std::abs(d.max_div_h - 0.2 * std::exp(-d.t)));
  }
  report(1, "circle spectral decay", err < 1e-6, err, 1e-6);
}

void torus_decay() {
  const ProductGrid g{PeriodicGrid::circle(kTwoPi, 4), PeriodicGrid::torus(kTwoPi, kTwoPi, 64)};
  const auto s = state(g, [](auto, auto y) { return 0.05 * std::cos(y[0] + 2 * y[1]); }, kZero);
  const auto traj = run_egf(s, sampled({0.0, 1.0}));
  const double ratio = traj.diagnostics[1].max_div_h / traj.diagnostics[0].max_div_h;
  const double err = std::abs(ratio / std::exp(-5.0) - 1.0);
  report(2, "torus mode (1,2) decay", err < 1e-6, err, 1e-6);
}

void heat_kernel_equilibrium() {
  double dev = 0.0;
  const PeriodicGrid circle = PeriodicGrid::circle(kTwoPi, 64);
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      const double x = kTwoPi * i / 64.0;
      const double y = kTwoPi * j / 64.0;
      const double g = heat_kernel_eval(10.0, std::array{x}, std::array{y}, circle, 32);
      dev = std::max(dev, std::abs(g - 1.0 / kTwoPi));
    }
  }
  report(3, "heat kernel equilibrium at t=10", dev < 1e-8, dev, 1e-8);
}

void divergence_identity() {
  const SpectralFlow flow(cos_state(), std::nullopt);
  double res = 0.0;
  bool positive = true;
  for (double t : {0.0, 1.0}) {
    const auto s = flow.state_at(t);
    const auto h = twisted_mean_curvature(s);
    res = std::max(res, check_divergence_identity(s, h).residual);
    if (t == 0.0) {
      const double lhs = integrate(div_perp(h, s), s);
      const double rhs = integrate(perp_inner(h, h, s), s);
      positive = lhs > 0.0 && rhs > 0.0;
    }
  }
  report(4, "integral identity, both sides > 0", res < 1e-8 && positive, res, 1e-8);
}

void reeb_identity() {
  const auto g = circle_product(8, 64);
  const auto tau = ProductScalar::sample(g, [](auto x, auto y) {
    return (0.3 + 0.2 * std::cos(x[0])) * std::cos(y[0]);
  });
  const auto traj = run_codim1(tau, sampled({0.0, 0.25, 0.5, 1.0, 2.0, 4.0}));
  double res = 0.0;
  for (const auto& s : traj.states) res = std::max(res, check_codim1_identity(s, ProductScalar(g, 1.0)).residual);
  report(5, "Reeb identity along codim-1 run", res < 1e-8, res, 1e-8);
}

void oracle_equivalence() {
  FlowConfig c = sampled({0.0, 1.0});
  c.oracle_check = true;
  c.fd.dt = 1e-3;
  c.fd.grid_points = 256;
  const double gap = *run_egf(cos_state(), c).oracle_gap;

  FdScheme scheme;
  scheme.dt = 1e-3;
  std::vector<double> errs;
  for (int m : {32, 64, 128}) {
    const PeriodicGrid g = PeriodicGrid::circle(kTwoPi, m);
    const auto u0 = ScalarField::sample(g, [](double y) { return std::cos(y) + 0.3 * std::sin(2 * y); });
    const auto exact = ScalarField::sample(
        g, [](double y) { return std::exp(-1.0) * std::cos(y) + 0.3 * std::exp(-4.0) * std::sin(2 * y); });
    errs.push_back(max_abs_diff(fd_heat_run(u0, ScalarField(g), 1.0, scheme), exact));
  }
  const double o1 = std::log2(errs[0] / errs[1]);
  const double o2 = std::log2(errs[1] / errs[2]);
  const double off = std::max(std::abs(o1 - 2.0), std::abs(o2 - 2.0));
  report(6, "spectral vs FD gap at t=1", gap < 1e-3, gap, 1e-3);
  report(6, "FD convergence order (|order-2|)", off <= 0.2, off, 0.2);
}

void rescaling() {
  const auto s = project_unit_volume(cos_state());
  FlowConfig c = sampled({0.0, 0.5, 1.0, 2.0, 3.0, 5.0});
  c.variant = FlowVariant::normalized;
  const auto norm = run_egf(s, c);
  c.variant = FlowVariant::plain;
  const auto plain = run_egf(s, c);
  const double resc = worst(check_rescaling(norm, plain, 1e-8));
  const double drift = worst(check_volume_drift(norm, 1e-8));
  double r = -1.0;
  for (const auto& d : plain.diagnostics) r = std::max(r, d.r);
  for (const auto& d : norm.diagnostics) r = std::max(r, d.r);
  report(7, "normalized vs rescaled metric", resc < 1e-8, resc, 1e-8);
  report(7, "normalized volume drift", drift < 1e-8, drift, 1e-8);
  report(7, "max r(t)", r <= 1e-12, r, 1e-12);
}

void preservation() {
  const auto twisted = run_egf(cos_state(), sampled({0.0, 0.5, 1.0, 2.0, 4.0}));
  const double umb = worst(check_preservation(twisted), "d_umbilical");
  report(8, "D-umbilicity along twisted run", umb < 1e-10, umb, 1e-10);

  const ProductGrid tg{PeriodicGrid::circle(kTwoPi, 4), PeriodicGrid::torus(kTwoPi, kTwoPi, 32)};
  const auto ts = state(tg, [](auto x, auto y) {
    return 0.1 * std::cos(y[0] + 2 * y[1]) * (1 + 0.3 * std::sin(x[0])) + 0.05 * std::sin(y[1]);
  }, kZero);
  const auto closed_run = run_egf(ts, sampled({0.0, 0.25, 0.5, 1.0, 2.0}));
  double closed = 0.0;
  for (const auto& d : closed_run.diagnostics) closed = std::max(closed, d.d_theta_h);
  report(8, "closedness of theta_H", closed < 1e-10, closed, 1e-10);

  const auto g = circle_product(16, 64);
  const auto ws = state(g, [](auto x, auto y) { return 0.2 * std::cos(y[0]) + 0.1 * std::sin(x[0] + y[0]); },
                        [](auto x, auto) { return 0.1 * std::cos(x[0]); });
  const SpectralFlow flow(ws, std::nullopt);
  const double b = worst(check_bperp_scaling(evaluator(flow), {0.5, 1.0, 2.0, 4.0}, std::nullopt));
  report(8, "b-perp scaling law", b < 1e-8, b, 1e-8);
}

void monotonicity() {
  const SpectralFlow flow(cos_state(), std::nullopt);
  const double m = worst(check_monotonicity(evaluator(flow), {0.0, 0.5, 1.0, 2.0, 4.0}, std::nullopt),
                         "monotonicity");
  report(9, "energy monotonicity", m < 1e-6, m, 1e-6);
}

void prescribed() {
  const auto s = cos_state();
  ProductVector x(s.grid, Along::fiber);
  x.comps[0] = ProductScalar(s.grid, 0.1);
  const auto traj = run_prescribed(s, x, sampled({0.0, 1.0, 5.0, 40.0}));
  const auto& lim = traj.limit;
  const double div = div_perp(twisted_mean_curvature(lim) - x, lim).max_abs();
  const double h = twisted_mean_curvature(lim).comps[0].max_abs();
  report(10, "prescribed limit Div(H-X)", div < 1e-8, div, 1e-8);
  report(10, "prescribed limit H", h < 1e-8, h, 1e-8);
}

void volume_ode() {
  const SpectralFlow flow(cos_state(), std::nullopt);
  const double v = worst(check_volume_ode(evaluator(flow), {0.0, 0.5, 1.0, 2.0, 4.0}, std::nullopt, 1e-3));
  report(11, "volume ODE relative error", v < 1e-4, v, 1e-4);
}

void twisted_limit() {
  // ψ varies along the fibre: FD path, leaf-volume-weighted average.
  const auto g = circle_product(4, 128);
  const auto s = state(g, [](auto x, auto y) { return 0.3 + 0.2 * std::cos(y[0]) + 0.1 * std::sin(x[0]); },
                       [](auto, auto y) { return 0.2 * std::sin(y[0]); });
  FlowConfig c = sampled({0.0, 1.0, 10.0});
  c.fd.dt = 1e-2;
  const auto traj = run_egf(s, c);
  double err = 0.0;
  for (std::size_t b = 0; b < g.base.size(); ++b) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < g.fiber.size(); ++j) {
      const double w = std::exp(s.psi.values[g.index(b, j)]);
      num += w * s.phi.values[g.index(b, j)];
      den += w;
    }
    for (std::size_t j = 0; j < g.fiber.size(); ++j) err = std::max(err, std::abs(traj.limit.phi.values[g.index(b, j)] - num / den));
  }
  report(12, "limit equals weighted average", err < 1e-8, err, 1e-8);

  const auto flat = run_egf(cos_state(), FlowConfig{});
  const double split = flat.limit.phi.max_abs();
  const bool product = classify(flat.limit, 1e-8).d.totally_geodesic;
  report(12, "mean-zero limit is flat product", split < 1e-8 && product, split, 1e-8);
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      spectral_decay, torus_decay, heat_kernel_equilibrium, divergence_identity,
      reeb_identity,  oracle_equivalence, rescaling, preservation,
      monotonicity,   prescribed, volume_ode, twisted_limit};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("FAIL    exception: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d failing\n", failures);
  return failures == 0 ? 0 : 1;
}
