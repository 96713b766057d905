#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "egf/flow.hpp"
#include "json.hpp"

namespace egf {

enum class ScenarioKind { twisted_torus, double_twisted, codim1_fibration };

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::twisted_torus: return "twisted_torus";
    case ScenarioKind::double_twisted: return "double_twisted";
    case ScenarioKind::codim1_fibration: return "codim1_fibration";
  }
  return "?";
}

/// One term of a truncated Fourier series on base × fibre. The wave vector k
/// lists the base modes first, then the fibre modes; the phase is
/// Σ 2π k_i x_i / L_i. Real form: a cos + b sin. Complex form: c e^{i·phase},
/// which must come with its conjugate partner at -k.
struct FourierTerm {
  std::vector<int> k;
  double cos = 0.0;
  double sin = 0.0;
  std::optional<std::complex<double>> complex;
};

using FourierSeries = std::vector<FourierTerm>;

/// A requested check with optional parameters.
struct CheckRequest {
  std::string name;
  std::optional<double> expected;  // decay_rate: expected rate λ
  std::optional<double> tolerance;
  double t_min = 0.0;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::twisted_torus;
  int n = 1;
  int p = 1;
  std::array<double, 2> base_sides{kTwoPi, kTwoPi};
  std::array<double, 2> fiber_sides{kTwoPi, kTwoPi};
  int base_points = 8;
  int fiber_points = 64;
  FourierSeries phi0;
  FourierSeries psi;
  FourierSeries tau1;
  std::vector<FourierSeries> X;
  FlowConfig flow;
  std::vector<CheckRequest> checks;
  bool plot = false;
  std::string out = "egf-out";
};

namespace detail {

using json = nlohmann::json;

inline double parse_length(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    // "2pi", "pi", "0.5pi" or a plain number in a string.
    std::string s = j.get<std::string>();
    double factor = 1.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
      factor = M_PI;
      s.erase(s.size() - 2);
      if (s.empty()) return factor;
    }
    std::size_t used = 0;
    try {
      const double v = std::stod(s, &used);
      if (used == s.size()) return v * factor;
    } catch (const std::exception&) {
    }
  }
  throw InputError(where + ": expected a length (number or multiple of pi)");
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing required field '" + key + "'");
  return j.at(key);
}

inline FourierSeries parse_series(const json& j, int dims, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected a list of Fourier terms");
  FourierSeries out;
  for (const auto& t : j) {
    FourierTerm term;
    term.k = require(t, "k", where).get<std::vector<int>>();
    if (static_cast<int>(term.k.size()) != dims) {
      throw InputError(where + ": wave vector needs " + std::to_string(dims) + " entries");
    }
    const bool real_form = t.contains("cos") || t.contains("sin");
    const bool complex_form = t.contains("re") || t.contains("im");
    if (real_form == complex_form) {
      throw InputError(where + ": each term needs either cos/sin or re/im coefficients");
    }
    if (real_form) {
      term.cos = t.value("cos", 0.0);
      term.sin = t.value("sin", 0.0);
    } else {
      term.complex = std::complex<double>(t.value("re", 0.0), t.value("im", 0.0));
    }
    out.push_back(std::move(term));
  }
  // Complex terms must pair up as c_{-k} = conj(c_k) so the series is real.
  std::map<std::vector<int>, std::complex<double>> coeffs;
  for (const auto& t : out) {
    if (t.complex) coeffs[t.k] += *t.complex;
  }
  for (const auto& [k, c] : coeffs) {
    std::vector<int> neg(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    const auto it = coeffs.find(neg);
    const std::complex<double> partner = it == coeffs.end() ? 0.0 : it->second;
    if (std::abs(partner - std::conj(c)) > 1e-12 * std::max(1.0, std::abs(c))) {
      throw InputError(where + ": complex coefficients are not conjugate-symmetric");
    }
  }
  return out;
}

inline std::vector<double> parse_sides(const json& j, int dim, const std::string& where) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(parse_length(v, where));
  } else {
    out.assign(static_cast<std::size_t>(dim), parse_length(j, where));
  }
  if (static_cast<int>(out.size()) != dim) {
    throw InputError(where + ": expected " + std::to_string(dim) + " side lengths");
  }
  return out;
}

inline FlowVariant parse_variant(const std::string& s) {
  if (s == "plain") return FlowVariant::plain;
  if (s == "normalized") return FlowVariant::normalized;
  if (s == "prescribed") return FlowVariant::prescribed;
  throw InputError("flow.variant must be plain, normalized or prescribed");
}

inline ScenarioKind parse_kind(const std::string& s) {
  if (s == "twisted_torus") return ScenarioKind::twisted_torus;
  if (s == "double_twisted") return ScenarioKind::double_twisted;
  if (s == "codim1_fibration") return ScenarioKind::codim1_fibration;
  throw InputError("scenario must be twisted_torus, double_twisted or codim1_fibration");
}

}  // namespace detail

/// Parses and validates a scenario document. Every problem is an InputError.
inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::require;
  if (!j.is_object()) throw InputError("scenario config must be a JSON object");
  ScenarioConfig c;
  try {
    c.kind = detail::parse_kind(require(j, "scenario", "config").get<std::string>());
    c.n = require(j, "n", "config").get<int>();
    c.p = require(j, "p", "config").get<int>();
    if (c.n < 1 || c.n > 2 || c.p < 1 || c.p > 2) throw InputError("n and p must be 1 or 2");
    if (c.kind == ScenarioKind::codim1_fibration && c.p != 1) {
      throw InputError("codim1_fibration needs p = 1");
    }
    const auto& base = require(j, "base", "config");
    const auto& fiber = require(j, "fiber", "config");
    const auto bs = detail::parse_sides(require(base, "sides", "base"), c.n, "base.sides");
    const auto fs = detail::parse_sides(require(fiber, "sides", "fiber"), c.p, "fiber.sides");
    std::copy(bs.begin(), bs.end(), c.base_sides.begin());
    std::copy(fs.begin(), fs.end(), c.fiber_sides.begin());
    c.base_points = base.value("points", 8);
    c.fiber_points = fiber.value("points", 64);

    const int dims = c.n + c.p;
    if (c.kind == ScenarioKind::codim1_fibration) {
      if (j.contains("phi0")) throw InputError("codim1_fibration takes tau1, not phi0");
      c.tau1 = detail::parse_series(require(j, "tau1", "config"), dims, "tau1");
    } else {
      c.phi0 = detail::parse_series(require(j, "phi0", "config"), dims, "phi0");
    }
    if (j.contains("psi")) {
      if (c.kind != ScenarioKind::double_twisted) {
        throw InputError("psi is only allowed for double_twisted scenarios");
      }
      c.psi = detail::parse_series(j.at("psi"), dims, "psi");
    }

    const auto flow = j.value("flow", nlohmann::json::object());
    c.flow.variant = detail::parse_variant(flow.value("variant", std::string("plain")));
    c.flow.n = c.n;
    c.flow.p = c.p;
    c.flow.t_end = flow.value("tEnd", 5.0);
    c.flow.samples = flow.value("samples", std::vector<double>{});
    c.flow.tol_converge = flow.value("tolConverge", 1e-10);
    c.flow.tol_closed = flow.value("tolClosed", 1e-9);
    c.flow.oracle_check = flow.value("oracleCheck", false);
    if (flow.contains("fd")) {
      const auto& fd = flow.at("fd");
      c.flow.fd.dt = fd.value("dt", c.flow.fd.dt);
      c.flow.fd.theta = fd.value("theta", c.flow.fd.theta);
      c.flow.fd.grid_points = fd.value("gridPoints", c.flow.fd.grid_points);
    }
    c.flow.fd.validate();
    if (j.contains("X")) {
      if (c.flow.variant != FlowVariant::prescribed) {
        throw InputError("X is only allowed with the prescribed variant");
      }
      const auto& x = j.at("X");
      if (!x.is_array() || static_cast<int>(x.size()) != c.p) {
        throw InputError("X needs one Fourier series per fibre component");
      }
      for (int a = 0; a < c.p; ++a) {
        c.X.push_back(detail::parse_series(x[a], dims, "X[" + std::to_string(a) + "]"));
      }
    } else if (c.flow.variant == FlowVariant::prescribed) {
      throw InputError("the prescribed variant needs X");
    }
    if (c.kind == ScenarioKind::codim1_fibration && c.flow.variant == FlowVariant::prescribed) {
      throw InputError("codim1_fibration supports the plain and normalized variants");
    }

    for (const auto& ch : j.value("checks", nlohmann::json::array())) {
      CheckRequest r;
      if (ch.is_string()) {
        r.name = ch.get<std::string>();
      } else {
        r.name = require(ch, "name", "checks").get<std::string>();
        if (ch.contains("expected")) r.expected = ch.at("expected").get<double>();
        if (ch.contains("tolerance")) r.tolerance = ch.at("tolerance").get<double>();
        r.t_min = ch.value("tMin", 0.0);
      }
      c.checks.push_back(std::move(r));
    }
    c.plot = j.value("plot", false);
    c.out = j.value("out", c.out);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

/// Evaluates a Fourier series at the product node (x, y).
inline double evaluate_series(const FourierSeries& series, const ScenarioConfig& c,
                              std::array<double, 2> x, std::array<double, 2> y) {
  double v = 0.0;
  for (const auto& t : series) {
    double phase = 0.0;
    for (int i = 0; i < c.n; ++i) phase += kTwoPi * t.k[i] * x[i] / c.base_sides[i];
    for (int a = 0; a < c.p; ++a) phase += kTwoPi * t.k[c.n + a] * y[a] / c.fiber_sides[a];
    if (t.complex) {
      v += t.complex->real() * std::cos(phase) - t.complex->imag() * std::sin(phase);
    } else {
      v += t.cos * std::cos(phase) + t.sin * std::sin(phase);
    }
  }
  return v;
}

inline ProductGrid scenario_grid(const ScenarioConfig& c) {
  return {PeriodicGrid(c.n, c.base_sides, {c.base_points, c.base_points}),
          PeriodicGrid(c.p, c.fiber_sides, {c.fiber_points, c.fiber_points})};
}

inline ProductScalar sample_series(const FourierSeries& s, const ScenarioConfig& c,
                                   const ProductGrid& g) {
  return ProductScalar::sample(g, [&](auto x, auto y) { return evaluate_series(s, c, x, y); });
}

}  // namespace egf
