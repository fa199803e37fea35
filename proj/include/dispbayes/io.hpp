#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dispbayes/errors.hpp"
#include "dispbayes/experiments.hpp"
#include "dispbayes/simulate.hpp"

namespace dispbayes {

// Write-to-temp + atomic rename; readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Result CSV of record: one row per (replicate, statistic) plus per-n
// aggregate rows (empty replicate column). Runtime is deliberately absent;
// these files must be byte-identical across reruns and worker counts.
inline std::string result_csv(const ExperimentResult& result, const std::string& experiment) {
  std::ostringstream out;
  out << "experiment,n,replicate,stat_name,value,stderr,seed\n";
  for (const ExperimentRow& row : result.rows) {
    out << experiment << ',' << row.n << ',' << row.replicate << ",median_l2,"
        << detail::fmt_g17(row.median_l2) << ",," << row.stream << '\n';
    for (std::size_t m = 0; m < row.outside_mass.size(); ++m) {
      out << experiment << ',' << row.n << ',' << row.replicate << ",outside_mass_m"
          << detail::fmt_g17(result.config.radius_multipliers[m]) << ','
          << detail::fmt_g17(row.outside_mass[m]) << ",," << row.stream << '\n';
    }
  }
  for (const PerNSummary& s : result.per_n) {
    out << experiment << ',' << s.n << ",,median_l2_median," << detail::fmt_g17(s.median_of_medians)
        << ",,\n";
    for (std::size_t m = 0; m < s.mean_outside.size(); ++m) {
      out << experiment << ',' << s.n << ",,outside_mass_mean_m"
          << detail::fmt_g17(result.config.radius_multipliers[m]) << ','
          << detail::fmt_g17(s.mean_outside[m]) << ',' << detail::fmt_g17(s.se_outside[m]) << ",\n";
    }
  }
  return out.str();
}

// Diagnostic dump of the per-interval statistics (z_i, f_i, w_i).
inline std::string diagnostics_csv(const DispersionFn& s, const DispersionFn& s0,
                                   const Observations& obs) {
  const std::vector<double> f = f_values(s, s0, obs.n);
  const std::vector<double> w = w_values(obs, s0);
  std::ostringstream out;
  out << "i,z,f,w\n";
  const double dn = static_cast<double>(obs.n);
  for (int i = 1; i <= obs.n; ++i) {
    out << i << ',' << detail::fmt_g17((i - 1) / dn) << ','
        << detail::fmt_g17(f[static_cast<std::size_t>(i - 1)]) << ','
        << detail::fmt_g17(w[static_cast<std::size_t>(i - 1)]) << '\n';
  }
  return out.str();
}

inline std::string chain_csv(const McmcChain& chain) {
  std::ostringstream out;
  out << "iter,accepted";
  for (std::size_t j = 0; j < chain.knots.size(); ++j) out << ",v_" << j;
  out << '\n';
  for (std::size_t k = 0; k < chain.states.size(); ++k) {
    out << chain.state_iters[k] << ',' << (chain.state_accepted[k] ? 1 : 0);
    for (double v : chain.states[k].values()) out << ',' << detail::fmt_g17(v);
    out << '\n';
  }
  return out.str();
}

// Minimal log-log scatter with fitted line; CSV stays the artifact of record.
inline std::string slope_svg(const ExperimentResult& result) {
  const double width = 640, height = 480, margin = 60;
  std::vector<std::pair<double, double>> pts;
  for (const PerNSummary& s : result.per_n) {
    if (s.median_of_medians > 0.0) {
      pts.emplace_back(std::log(static_cast<double>(s.n)), std::log(s.median_of_medians));
    }
  }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  if (pts.size() >= 2) {
    double x0 = pts.front().first, x1 = pts.front().first;
    double y0 = pts.front().second, y1 = pts.front().second;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    const double xpad = 0.05 * (x1 - x0 + 1e-12), ypad = 0.05 * (y1 - y0 + 1e-12);
    x0 -= xpad; x1 += xpad; y0 -= ypad; y1 += ypad;
    auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
    auto py = [&](double y) { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); };
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
        << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-size=\"14\">log n</text>\n";
    out << "<text x=\"18\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " << height / 2
        << ")\">log median L2 error</text>\n";
    if (std::isfinite(result.slope_fit.slope)) {
      out << "<line x1=\"" << px(x0) << "\" y1=\""
          << py(result.slope_fit.intercept + result.slope_fit.slope * x0) << "\" x2=\"" << px(x1)
          << "\" y2=\"" << py(result.slope_fit.intercept + result.slope_fit.slope * x1)
          << "\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n";
      out << "<text x=\"" << width - margin - 8 << "\" y=\"" << margin + 18
          << "\" text-anchor=\"end\" font-size=\"13\">slope " << detail::fmt_g17(result.slope_fit.slope).substr(0, 8)
          << "</text>\n";
    }
    for (const auto& [x, y] : pts) {
      out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3.5\" fill=\"crimson\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace dispbayes
