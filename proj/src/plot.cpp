#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "homog/error.hpp"
#include "homog/harness.hpp"

namespace homog {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kMain = 300.0;  // height of the log-log panel
constexpr double kGap = 40.0;
constexpr double kPanel = 80.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Axis {
  double lo;
  double hi;
  double px0;
  double px1;
  double map(double v) const { return px0 + (std::log10(v) - lo) / (hi - lo) * (px1 - px0); }
};

Axis log_axis(double vmin, double vmax, double px0, double px1) {
  double lo = std::floor(std::log10(vmin));
  double hi = std::ceil(std::log10(vmax));
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi, px0, px1};
}

}  // namespace

std::string render_plot(const ConvergenceReport& report) {
  std::vector<const EpsRecord*> pts;
  for (const auto& r : report.records) {
    if (r.error > 0.0 && std::isfinite(r.error)) pts.push_back(&r);
  }
  if (pts.empty()) throw InvalidArgument("render_plot: report has no records with a positive error");

  double emin = pts.front()->eps, emax = emin, rmin = pts.front()->error, rmax = rmin;
  for (const auto* r : pts) {
    emin = std::min(emin, r->eps);
    emax = std::max(emax, r->eps);
    rmin = std::min(rmin, r->error);
    rmax = std::max(rmax, r->error);
  }
  const Axis ax = log_axis(emin, emax, kLeft, kWidth - kRight);
  const Axis ay = log_axis(rmin, rmax, kTop + kMain, kTop);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<style>.data{fill:#1f77b4}.fit{stroke:#d62728;stroke-width:1.5}"
        ".c1{fill:#2ca02c}.c2{fill:#9467bd}text{font:11px sans-serif}</style>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
     << kMain << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double e = ax.lo; e <= ax.hi + 1e-9; e += 1.0) {
    const double x = ax.map(std::pow(10.0, e));
    os << "<text x=\"" << x << "\" y=\"" << kTop + kMain + 14 << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (double e = ay.lo; e <= ay.hi + 1e-9; e += 1.0) {
    const double y = ay.map(std::pow(10.0, e));
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kTop + kMain + 30
     << "\" text-anchor=\"middle\">eps</text>\n";
  os << "<text x=\"14\" y=\"" << kTop + kMain / 2 << "\" transform=\"rotate(-90 14 " << kTop + kMain / 2
     << ")\" text-anchor=\"middle\">relative L2 error</text>\n";

  for (const auto* r : pts) {
    os << "<circle class=\"data\" cx=\"" << ax.map(r->eps) << "\" cy=\"" << ay.map(r->error) << "\" r=\"4\">"
       << "<title>eps=" << num(r->eps) << " error=" << num(r->error) << "</title></circle>\n";
  }
  if (report.fit.slope && report.fit.intercept) {
    const auto line = [&](double e) { return std::exp(*report.fit.intercept + *report.fit.slope * std::log(e)); };
    os << "<line class=\"fit\" x1=\"" << ax.map(emin) << "\" y1=\"" << ay.map(line(emin)) << "\" x2=\""
       << ax.map(emax) << "\" y2=\"" << ay.map(line(emax)) << "\"/>\n";
    os << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 14 << "\">slope " << num(*report.fit.slope) << "</text>\n";
  } else if (!report.fit.flag.empty()) {
    os << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 14 << "\">no fit: " << report.fit.flag << "</text>\n";
  }

  const double py0 = kTop + kMain + kGap;
  os << "<g class=\"diagnostics\">\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << py0 << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
     << kPanel << "\" fill=\"none\" stroke=\"#444\"/>\n";
  const auto ratio_y = [&](double v) { return py0 + kPanel - std::clamp(v, 0.0, 1.2) / 1.2 * kPanel; };
  os << "<line x1=\"" << kLeft << "\" y1=\"" << ratio_y(1.0) << "\" x2=\"" << kWidth - kRight << "\" y2=\""
     << ratio_y(1.0) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto* r : pts) {
    const double x = ax.map(r->eps);
    os << "<rect class=\"c1\" x=\"" << x - 3 << "\" y=\"" << ratio_y(r->c1_ratio) - 3
       << "\" width=\"6\" height=\"6\"/>\n";
    os << "<circle class=\"c2\" cx=\"" << x << "\" cy=\"" << ratio_y(r->c2_ratio) << "\" r=\"3\"/>\n";
  }
  os << "<text x=\"" << kLeft + 8 << "\" y=\"" << py0 + 12 << "\">a-priori ratios (square: m|u|/|f|, dot: "
     << "energy m/|f|^2; dashed = 1)</text>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

void emit_plot(const ConvergenceReport& report, const std::string& path) {
  const std::string svg = render_plot(report);
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace homog
