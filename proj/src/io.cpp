#include "cofreq/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cofreq {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_text(const std::string &schema, const std::vector<std::string> &columns,
                     const std::vector<std::vector<double>> &rows) {
  std::ostringstream os;
  os << "# cofreq " << schema << " v" << kCsvSchemaVersion << "\n";
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto &row : rows) {
    if (row.size() != columns.size()) throw std::invalid_argument("CSV row width does not match the header");
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
  return os.str();
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path);
}

void write_csv(const std::string &path, const std::string &schema, const std::vector<std::string> &columns,
               const std::vector<std::vector<double>> &rows) {
  write_text(path, csv_text(schema, columns, rows));
}

void write_profile_csv(const std::string &path, const FrequencyProfile &p) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < p.radii.size(); ++i) rows.push_back({p.radii[i], p.H[i], p.D[i], p.N[i]});
  write_csv(path, "frequency_profile", {"r", "H", "D", "N"}, rows);
}

void write_sample_csv(const std::string &path, const SingularSample &s) {
  const int n = static_cast<int>(s.center.size());
  std::vector<std::string> cols;
  for (int i = 0; i < n; ++i) cols.push_back("X" + std::to_string(i + 1));
  cols.push_back("boundary");
  cols.push_back("order");
  std::vector<std::vector<double>> rows;
  for (const Vec &p : s.points) {
    std::vector<double> r(p.data(), p.data() + p.size());
    r.push_back(0);
    r.push_back(NAN);
    rows.push_back(r);
  }
  for (size_t k = 0; k < s.boundary_points.size(); ++k) {
    const Vec &p = s.boundary_points[k];
    std::vector<double> r(p.data(), p.data() + p.size());
    r.push_back(1);
    r.push_back(s.boundary_orders[k]);
    rows.push_back(r);
  }
  write_csv(path, "singular_sample", cols, rows);
}

void write_minkowski_csv(const std::string &path, const MinkowskiEstimate &e) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < e.s.size(); ++i) rows.push_back({e.s[i], e.volume[i]});
  write_csv(path, "minkowski", {"s", "volume"}, rows);
}

void write_shells_csv(const std::string &path, const C01Report &r) {
  std::vector<std::vector<double>> rows;
  for (const C01Shell &s : r.shells) rows.push_back({s.delta_lo, s.delta_hi, s.defect, s.ratio});
  write_csv(path, "c01_shells", {"delta_lo", "delta_hi", "defect", "ratio"}, rows);
}

void write_json(const std::string &path, const nlohmann::json &j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json vec_json(const Vec &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const Mat &M) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < M.rows(); ++i) rows.push_back(vec_json(M.row(i).transpose()));
  return rows;
}

namespace {
// JSON has no infinities; they become null
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }
}  // namespace

nlohmann::json to_json(const FrequencyProfile &p) {
  return {{"center", vec_json(p.center)}, {"r", p.radii}, {"H", p.H}, {"D", p.D}, {"N", p.N},
          {"route", p.route == EnergyRoute::Flux ? "flux" : "bulk"}};
}

nlohmann::json to_json(const PinchReport &p) {
  return {{"Lambda", p.Lambda}, {"eps", p.eps}, {"r1", p.r1}, {"r2", p.r2}, {"pinched", p.pinched},
          {"max_deviation", num(p.max_deviation)}, {"samples", p.samples}};
}

nlohmann::json to_json(const SingularSample &s) {
  return {{"center", vec_json(s.center)}, {"r0", s.r0}, {"pitch", s.pitch}, {"tau_u", s.tau_u},
          {"tau_g", s.tau_g}, {"Lambda_hat", s.Lambda_hat}, {"u_scale", s.u_scale},
          {"points", s.points.size()}, {"boundary_points", s.boundary_points.size()}};
}

nlohmann::json to_json(const MinkowskiEstimate &e) {
  return {{"s", e.s}, {"volume", e.volume}, {"slope", num(e.slope)}, {"constant", num(e.constant)},
          {"empty", e.empty}};
}

nlohmann::json to_json(const AvoidingPlane &a) {
  return {{"success", a.success}, {"margin", a.margin}, {"basis", mat_json(a.basis)},
          {"cap_point", vec_json(a.cap_point)}};
}

nlohmann::json to_json(const ConeFit &c) {
  return {{"vertex", vec_json(c.vertex)}, {"alpha", c.alpha}, {"V", mat_json(c.V)}, {"W", mat_json(c.W)},
          {"outliers", c.outliers}};
}

nlohmann::json to_json(const C01Report &r) {
  nlohmann::json shells = nlohmann::json::array();
  for (const C01Shell &s : r.shells)
    shells.push_back({{"delta_lo", s.delta_lo}, {"delta_hi", s.delta_hi}, {"defect", s.defect}, {"ratio", s.ratio}});
  nlohmann::json traces = nlohmann::json::array();
  for (size_t i = 0; i < r.trace_x.size(); ++i)
    traces.push_back({{"x", vec_json(r.trace_x[i])}, {"J", mat_json(r.trace_J[i])}, {"h", r.trace_h[i]}});
  return {{"ellipticity", r.ellipticity}, {"grad_sup", num(r.grad_sup)}, {"trace_grad_sup", num(r.trace_grad_sup)},
          {"C", num(r.C)}, {"C_variation", num(r.C_variation)}, {"slope", num(r.slope)}, {"exact", r.exact},
          {"pass", r.pass}, {"shells", shells}, {"traces", traces}};
}

nlohmann::json to_json(const BiLipschitzReport &b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"raw_lower", b.raw_lower}, {"raw_upper", b.raw_upper},
          {"pairs", b.pairs}};
}

namespace {

const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (int e = static_cast<int>(std::ceil(lo - 1e-9)); e <= std::floor(hi + 1e-9); ++e) out.push_back(std::pow(10.0, e));
      if (out.size() < 2) out = {std::pow(10.0, lo), std::pow(10.0, hi)};
      return out;
    }
    const double span = hi - lo;
    const double raw = span / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0})
      if (f * mag >= raw) {
        step = f * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return out;
  }
};

}  // namespace

std::string render_svg(const std::vector<PlotSeries> &series, const PlotOptions &opts) {
  Axis ax{opts.logx}, ay{opts.logy};
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  size_t total = 0;
  for (const PlotSeries &s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "' has mismatched x and y");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if ((opts.logx && !(s.x[i] > 0)) || (opts.logy && !(s.y[i] > 0)))
        throw std::invalid_argument("nonpositive value on a log axis in series '" + s.label + "'");
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, ax.map(s.x[i]));
      xhi = std::max(xhi, ax.map(s.x[i]));
      ylo = std::min(ylo, ay.map(s.y[i]));
      yhi = std::max(yhi, ay.map(s.y[i]));
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("nothing to plot: empty series");
  auto pad = [](double &lo, double &hi) {
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double p = 0.05 * (hi - lo);
      lo -= p;
      hi += p;
    }
  };
  pad(xlo, xhi);
  pad(ylo, yhi);
  ax.lo = xlo;
  ax.hi = xhi;
  ay.lo = ylo;
  ay.hi = yhi;

  const double W = opts.width, H = opts.height;
  const double L = 70, R = 20, T = 36, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double v) { return L + pw * ax.frac(v); };
  auto py = [&](double v) { return T + ph * (1 - ay.frac(v)); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << opts.height
     << "\" viewBox=\"0 0 " << opts.width << " " << opts.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    os << "<text x=\"" << fixed(W / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(opts.title)
       << "</text>\n";
  os << "<rect x=\"" << fixed(L) << "\" y=\"" << fixed(T) << "\" width=\"" << fixed(pw) << "\" height=\"" << fixed(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ax.ticks()) {
    const double x = px(v);
    os << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(T + ph) << "\" x2=\"" << fixed(x) << "\" y2=\""
       << fixed(T + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(T + ph + 17) << "\" text-anchor=\"middle\">" << tick_label(v)
       << "</text>\n";
  }
  for (double v : ay.ticks()) {
    const double y = py(v);
    os << "<line x1=\"" << fixed(L - 5) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(L) << "\" y2=\"" << fixed(y)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(L - 8) << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">" << tick_label(v)
       << "</text>\n";
  }
  os << "<text x=\"" << fixed(L + pw / 2) << "\" y=\"" << fixed(H - 10) << "\" text-anchor=\"middle\">"
     << escape(opts.xlabel) << "</text>\n";
  os << "<text x=\"15\" y=\"" << fixed(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << fixed(T + ph / 2) << ")\">" << escape(opts.ylabel) << "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const PlotSeries &s = series[k];
    const char *color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (s.scatter) {
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << "<circle cx=\"" << fixed(px(s.x[i])) << "\" cy=\"" << fixed(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
           << "\"/>\n";
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
      if (s.dashed) os << " stroke-dasharray=\"6 4\"";
      os << " points=\"";
      bool first = true;
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << (first ? "" : " ") << fixed(px(s.x[i])) << "," << fixed(py(s.y[i]));
        first = false;
      }
      os << "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = T + 14 + 16 * k;
      os << "<line x1=\"" << fixed(L + 10) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\"" << fixed(L + 30) << "\" y2=\""
         << fixed(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
      if (s.dashed) os << " stroke-dasharray=\"6 4\"";
      os << "/>\n<text x=\"" << fixed(L + 36) << "\" y=\"" << fixed(ly) << "\">" << escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const std::vector<PlotSeries> &series, const std::string &path, const PlotOptions &opts) {
  write_text(path, render_svg(series, opts));
}

}  // namespace cofreq
