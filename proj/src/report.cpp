// SPDX-License-Identifier: Apache-2.0

#include "qnnae/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qnnae/text.hpp"

namespace qnnae::report {
namespace {

std::string fixed(double v) { return text::format_fixed(v, 10); }

std::string px(double v) { return text::format_fixed(v, 2); }

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo;
  double hi;

  double fraction(double v) const { return (v - lo) / (hi - lo); }
};

// Data extent padded by 10%, clamped to [0, 1]; never degenerate.
Range padded_range(double lo, double hi) {
  double pad = 0.1 * (hi - lo);
  if (pad < 0.01) pad = 0.01;
  Range r{std::max(0.0, lo - pad), std::min(1.0, hi + pad)};
  if (r.hi - r.lo < 1e-9) {
    r.lo = std::max(0.0, r.lo - 0.05);
    r.hi = r.lo + 0.1;
  }
  return r;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const evaluation::ArchitectureReport> reports) {
  out << kCsvHeader << '\n';
  for (const auto& r : reports) {
    out << r.architecture.hidden_neurons << ',' << fixed(r.score_p0) << ','
        << fixed(r.mean_accuracy) << ',' << fixed(r.min_accuracy()) << ','
        << fixed(r.max_accuracy()) << ',' << fixed(r.stddev_accuracy()) << ',' << r.num_samples
        << ',' << r.excluded << ',' << r.seed << '\n';
  }
}

void write_performance_matrix(std::ostream& out, const evaluation::ArchitectureReport& report) {
  out << "# hidden=" << report.architecture.hidden_neurons << " mode=" << to_string(report.mode)
      << " seed=" << report.seed << " rows=" << report.performances.size() << '\n';
  for (const auto& p : report.performances) out << p.bits.to_string() << '\n';
}

void write_scatter_svg(std::ostream& out, std::span<const evaluation::ArchitectureReport> reports,
                       const PlotOptions& options) {
  const double width = options.width;
  const double height = options.height;
  const double left = 80.0, right = 30.0, top = 50.0, bottom = 60.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_lo = 1.0, x_hi = 0.0, y_lo = 1.0, y_hi = 0.0;
  for (const auto& r : reports) {
    x_lo = std::min(x_lo, r.mean_accuracy);
    x_hi = std::max(x_hi, r.mean_accuracy);
    y_lo = std::min(y_lo, r.score_p0);
    y_hi = std::max(y_hi, r.score_p0);
  }
  if (reports.empty()) x_lo = y_lo = 0.0, x_hi = y_hi = 1.0;
  const Range xr = padded_range(x_lo, x_hi);
  const Range yr = padded_range(y_lo, y_hi);
  auto sx = [&](double v) { return left + xr.fraction(v) * plot_w; };
  auto sy = [&](double v) { return top + (1.0 - yr.fraction(v)) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' '
      << options.height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << px(width / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(options.title)
      << "</text>\n";

  // Frame and ticks.
  out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(plot_w)
      << "\" height=\"" << px(plot_h) << "\"/>\n";
  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double fx = left + plot_w * t / kTicks;
    const double fy = top + plot_h * t / kTicks;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << px(top + plot_h) << "\" x2=\"" << px(fx)
        << "\" y2=\"" << px(top + plot_h + 5) << "\"/>\n";
    out << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(fy) << "\" x2=\"" << px(left)
        << "\" y2=\"" << px(fy) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = xr.lo + (xr.hi - xr.lo) * t / kTicks;
    const double yv = yr.hi - (yr.hi - yr.lo) * t / kTicks;
    out << "<text x=\"" << px(left + plot_w * t / kTicks) << "\" y=\""
        << px(top + plot_h + 18) << "\" text-anchor=\"middle\">" << text::format_fixed(xv, 3)
        << "</text>\n";
    out << "<text x=\"" << px(left - 8) << "\" y=\"" << px(top + plot_h * t / kTicks + 4)
        << "\" text-anchor=\"end\">" << text::format_fixed(yv, 3) << "</text>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << px(left + plot_w / 2) << "\" y=\"" << px(height - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << "mean validation accuracy</text>\n";
  out << "<text x=\"20\" y=\"" << px(top + plot_h / 2) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
      << px(top + plot_h / 2) << ")\">P(c=0)</text>\n";

  out << "<g fill=\"steelblue\" stroke=\"navy\" stroke-width=\"0.8\">\n";
  for (const auto& r : reports) {
    out << "<circle class=\"marker\" cx=\"" << px(sx(r.mean_accuracy)) << "\" cy=\""
        << px(sy(r.score_p0)) << "\" r=\"4\"><title>hidden=" << r.architecture.hidden_neurons
        << "</title></circle>\n";
  }
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"9\" fill=\"dimgray\">\n";
  for (const auto& r : reports) {
    out << "<text x=\"" << px(sx(r.mean_accuracy) + 6) << "\" y=\"" << px(sy(r.score_p0) - 5)
        << "\">" << r.architecture.hidden_neurons << "</text>\n";
  }
  out << "</g>\n</svg>\n";
}

}  // namespace qnnae::report
