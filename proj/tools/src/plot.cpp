#include "bscca/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bscca/error.hpp"

namespace bscca::cli {
namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 60;

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(4);
  os << v;
  return os.str();
}

struct Frame {
  double lo, hi;
  double y(double v) const { return kT + (kH - kT - kB) * (1.0 - (v - lo) / (hi - lo)); }
};

Frame make_frame(double lo, double hi) {
  if (!(hi > lo)) { lo -= 0.5; hi += 0.5; }
  double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void header(std::ostringstream& os, const std::string& title, const std::string& y_label,
            const Frame& f) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << esc(title) << "</text>\n"
     << "<text transform=\"translate(16," << (kH - kB + kT) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << esc(y_label) << "</text>\n"
     << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
     << kH - kB << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double v = f.lo + (f.hi - f.lo) * i / 4.0;
    os << "<text x=\"" << kL - 6 << "\" y=\"" << f.y(v) + 4 << "\" text-anchor=\"end\">"
       << num(v) << "</text>\n";
  }
}

}  // namespace

double quantile(std::vector<double> v, double prob) {
  if (v.empty()) throw Error(ErrorKind::kEmptySample, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  double h = (static_cast<double>(v.size()) - 1.0) * prob;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string svg_boxplot(const std::vector<BoxGroup>& groups, const std::string& title,
                        const std::string& y_label, const std::vector<double>& markers) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& g : groups)
    for (double v : g.values) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double m : markers) if (std::isfinite(m)) { lo = std::min(lo, m); hi = std::max(hi, m); }
  if (!std::isfinite(lo)) { lo = 0; hi = 1; }
  Frame f = make_frame(lo, hi);
  std::ostringstream os;
  header(os, title, y_label, f);
  const double slot = (kW - kL - kR) / std::max<std::size_t>(groups.size(), 1);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const double cx = kL + slot * (i + 0.5), hw = slot * 0.25;
    os << "<text x=\"" << cx << "\" y=\"" << kH - kB + 18 << "\" text-anchor=\"middle\">"
       << esc(g.label) << "</text>\n";
    if (g.values.empty()) continue;
    double q1 = quantile(g.values, 0.25), q2 = quantile(g.values, 0.5), q3 = quantile(g.values, 0.75);
    double iqr = q3 - q1, wlo = q1, whi = q3;
    for (double v : g.values) {
      if (v >= q1 - 1.5 * iqr) wlo = std::min(wlo, v);
      if (v <= q3 + 1.5 * iqr) whi = std::max(whi, v);
    }
    os << "<line x1=\"" << cx << "\" y1=\"" << f.y(wlo) << "\" x2=\"" << cx << "\" y2=\""
       << f.y(whi) << "\" stroke=\"black\"/>\n"
       << "<rect x=\"" << cx - hw << "\" y=\"" << f.y(q3) << "\" width=\"" << 2 * hw
       << "\" height=\"" << std::max(f.y(q1) - f.y(q3), 0.5)
       << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n"
       << "<line x1=\"" << cx - hw << "\" y1=\"" << f.y(q2) << "\" x2=\"" << cx + hw
       << "\" y2=\"" << f.y(q2) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double v : g.values)
      if (v < wlo || v > whi)
        os << "<circle cx=\"" << cx << "\" cy=\"" << f.y(v) << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
    if (i < markers.size() && std::isfinite(markers[i]))
      os << "<line x1=\"" << cx - 1.4 * hw << "\" y1=\"" << f.y(markers[i]) << "\" x2=\""
         << cx + 1.4 * hw << "\" y2=\"" << f.y(markers[i])
         << "\" stroke=\"#d62728\" stroke-dasharray=\"5,3\" stroke-width=\"2\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_lines(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  double lo = INFINITY, hi = -INFINITY, xlo = INFINITY, xhi = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.y) if (std::isfinite(v)) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : s.x) { xlo = std::min(xlo, v); xhi = std::max(xhi, v); }
  }
  if (!std::isfinite(lo)) { lo = 0; hi = 1; }
  if (!(xhi > xlo)) { xlo = 0; xhi = 1; }
  Frame f = make_frame(lo, hi);
  auto px = [&](double x) { return kL + (kW - kL - kR) * (x - xlo) / (xhi - xlo); };
  std::ostringstream os;
  header(os, title, y_label, f);
  os << "<text x=\"" << (kW + kL) / 2 << "\" y=\"" << kH - 14 << "\" text-anchor=\"middle\">"
     << esc(x_label) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    double x = xlo + (xhi - xlo) * i / 4.0;
    os << "<text x=\"" << px(x) << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">"
       << num(x) << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << f.y(s.y[i]) << ' ';
    os << "\"/>\n<text x=\"" << kW - kR - 4 << "\" y=\"" << kT + 14 * (k + 1)
       << "\" text-anchor=\"end\" fill=\"" << c << "\">" << esc(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<double> autocorrelation(const std::vector<double>& x, int max_lag) {
  const auto n = x.size();
  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 0.0);
  if (n == 0) return out;
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (c0 == 0) {
    out[0] = 1.0;
    return out;
  }
  for (int h = 0; h <= max_lag && static_cast<std::size_t>(h) < n; ++h) {
    double c = 0;
    for (std::size_t t = 0; t + h < n; ++t) c += (x[t] - mean) * (x[t + h] - mean);
    out[h] = c / c0;
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path);
  os << text;
  if (!os) throw Error(ErrorKind::kIo, "write failed: " + path);
}

}  // namespace bscca::cli
