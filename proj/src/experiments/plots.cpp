#include "densiwae/experiments/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "densiwae/error.hpp"

namespace densiwae {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      const double w = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= w;
      hi += w;
    } else {
      const double w = (hi - lo) * 0.05;
      lo -= w;
      hi += w;
    }
  }
};

}  // namespace

std::string render_svg(const std::string& title, const std::string& y_label, const std::vector<PlotSeries>& series) {
  Range xr, yr;
  std::size_t points = 0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || (!s.err.empty() && s.err.size() != s.y.size()))
      throw ConfigError("plot series '" + s.label + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0)) throw ConfigError("plot x values must be positive");
      xr.add(std::log10(s.x[i]));
      const double e = s.err.empty() ? 0.0 : s.err[i];
      yr.add(s.y[i] - e);
      yr.add(s.y[i] + e);
      ++points;
    }
  }
  if (points == 0) throw ConfigError("nothing to plot");
  xr.pad();
  yr.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (std::log10(x) - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double gx = kLeft + pw * i / 4.0;
    const double gy = kTop + ph - ph * i / 4.0;
    o << "<text x=\"" << num(gx) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
      << tick(std::pow(10.0, fx)) << "</text>\n";
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">" << tick(fy)
      << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">n</text>\n";
  o << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << num(kTop + ph / 2) << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color = kColors[si % (sizeof kColors / sizeof kColors[0])];
    if (s.x.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      o << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double cx = px(s.x[i]);
      if (!s.err.empty() && s.err[i] > 0.0) {
        o << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(s.y[i] - s.err[i])) << "\" x2=\"" << num(cx)
          << "\" y2=\"" << num(py(s.y[i] + s.err[i])) << "\" stroke=\"" << color << "\"/>\n";
      }
      o << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 16.0 * static_cast<double>(si + 1);
    o << "<text x=\"" << num(kWidth - kRight + 10) << "\" y=\"" << num(ly) << "\" fill=\"" << color << "\">"
      << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

PlotSeries summary_series(const std::vector<SweepRecord>& records, const std::string& column) {
  PlotSeries s;
  s.label = column;
  for (const auto& row : summarize(records, column)) {
    s.x.push_back(static_cast<double>(row.n));
    s.y.push_back(row.mean);
    s.err.push_back(row.sd);
  }
  return s;
}

std::vector<PlotSeries> corrected_series(const std::vector<SweepRecord>& records) {
  PlotSeries by_n = summary_series(records, "latent_loss_x_n");
  PlotSeries by_sqrt = summary_series(records, "latent_loss_x_sqrtn");
  by_n.label = "loss x n";
  by_sqrt.label = "loss x sqrt(n)";
  by_n.err.clear();
  by_sqrt.err.clear();
  return {by_n, by_sqrt};
}

std::vector<std::string> emit_plots(const std::vector<SweepRecord>& records, const std::string& column,
                                    const std::string& kind, const std::string& out_dir) {
  if (records.empty()) throw ConfigError("no sweep records to plot");
  if (kind != "loss" && kind != "corrected" && kind != "all") throw ConfigError("unknown plot kind '" + kind + "'");
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  auto save = [&](const std::string& name, const std::string& body) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << body;
    written.push_back(path);
  };
  if (kind == "loss" || kind == "all") {
    save("loss.svg", render_svg("mean " + column + " vs n", column, {summary_series(records, column)}));
    save("recon.svg", render_svg("mean recon_w1 vs n", "recon_w1", {summary_series(records, "recon_w1")}));
  }
  if (kind == "corrected" || kind == "all")
    save("corrected.svg", render_svg("corrected latent loss", "scaled loss", corrected_series(records)));
  return written;
}

}  // namespace densiwae
