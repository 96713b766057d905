#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "egf/flow.hpp"
#include "egf/invariants.hpp"

namespace egf {

/// Shortest round-trip-safe rendering used by every CSV writer.
inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

inline std::string diagnostics_csv(const std::vector<DiagnosticRecord>& rows) {
  std::string out = "t,vol,intH2,maxDivH,r,umbilicalResidual,dThetaH\n";
  for (const auto& d : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", format_real(d.t), format_real(d.volume),
                       format_real(d.int_h2), format_real(d.max_div_h), format_real(d.r),
                       format_real(d.umbilical_residual), format_real(d.d_theta_h));
  }
  return out;
}

inline std::string checks_csv(const std::vector<CheckReport>& reports) {
  std::string out = "name,residual,tolerance,pass,sampleTime\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},{},{},{}\n", r.name, format_real(r.residual),
                       format_real(r.tolerance), r.pass ? "true" : "false",
                       format_real(r.sample_time));
  }
  return out;
}

/// φ on the product grid: one row per base node, one column per fibre node.
inline std::string field_csv(const ProductScalar& f) {
  std::string out;
  const std::size_t nf = f.grid.fiber.size();
  for (std::size_t b = 0; b < f.grid.base.size(); ++b) {
    for (std::size_t j = 0; j < nf; ++j) {
      if (j > 0) out += ',';
      out += format_real(f.values[b * nf + j]);
    }
    out += '\n';
  }
  return out;
}

/// Stacked polyline panels, one per diagnostics column, against t.
inline std::string diagnostics_svg(const std::vector<DiagnosticRecord>& rows) {
  struct Column {
    const char* name;
    double DiagnosticRecord::*field;
  };
  const std::array<Column, 6> columns{{{"vol", &DiagnosticRecord::volume},
                                       {"intH2", &DiagnosticRecord::int_h2},
                                       {"maxDivH", &DiagnosticRecord::max_div_h},
                                       {"r", &DiagnosticRecord::r},
                                       {"umbilicalResidual", &DiagnosticRecord::umbilical_residual},
                                       {"dThetaH", &DiagnosticRecord::d_theta_h}}};
  const double width = 640.0;
  const double panel = 150.0;
  const double margin = 60.0;
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, panel * columns.size() + 20.0);
  double t0 = 0.0, t1 = 1.0;
  if (!rows.empty()) {
    t0 = rows.front().t;
    t1 = std::max(rows.back().t, t0 + 1e-300);
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const double top = 10.0 + panel * static_cast<double>(c);
    const double h = panel - 40.0;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double v = rows[i].*columns[c].field;
      lo = i == 0 ? v : std::min(lo, v);
      hi = i == 0 ? v : std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    out += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>\n",
        margin, top, width - margin - 10.0, h);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", margin, top + h + 14.0,
                       columns[c].name);
    out += fmt::format("<text x=\"2\" y=\"{}\">{:.3g}</text>\n", top + 10.0, hi);
    out += fmt::format("<text x=\"2\" y=\"{}\">{:.3g}</text>\n", top + h, lo);
    out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : rows) {
      const double x = margin + (r.t - t0) / (t1 - t0) * (width - margin - 10.0);
      const double y = top + h - (r.*columns[c].field - lo) / span * h;
      out += fmt::format("{:.2f},{:.2f} ", x, y);
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::filesystem::filesystem_error("cannot write", path,
                                            std::make_error_code(std::errc::io_error));
  }
  f << text;
}

}  // namespace egf
