#include "lowrank/bench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "lowrank/common.hpp"

namespace lowrank::bench {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 90;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Point {
  double x, y, err;
};

struct Series {
  std::string label;
  std::vector<Point> points;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

class Axis {
 public:
  Axis(double lo, double hi, bool log_scale, double from, double to)
      : log_(log_scale), from_(from), to_(to) {
    lo_ = map(lo);
    hi_ = map(hi);
    if (hi_ - lo_ < 1e-12) {
      const double pad = std::max(std::abs(lo_) * 0.1, 0.5);
      lo_ -= pad;
      hi_ += pad;
    } else {
      const double pad = 0.05 * (hi_ - lo_);
      lo_ -= pad;
      hi_ += pad;
    }
  }
  double operator()(double v) const { return from_ + (map(v) - lo_) / (hi_ - lo_) * (to_ - from_); }
  std::vector<double> ticks() const {
    std::vector<double> t;
    for (int i = 0; i <= 4; ++i) {
      const double u = lo_ + (hi_ - lo_) * i / 4.0;
      t.push_back(log_ ? std::exp2(u) : u);
    }
    return t;
  }

 private:
  double map(double v) const { return log_ ? std::log2(v) : v; }
  bool log_;
  double from_, to_, lo_ = 0, hi_ = 1;
};

std::string render(const std::vector<Series>& series, const std::string& x_label,
                   const std::string& y_label, const std::string& caption, bool log_x, bool bars) {
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const Series& s : series) {
    for (const Point& p : s.points) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y - p.err);
      y_hi = std::max(y_hi, p.y + p.err);
    }
  }
  if (bars) y_lo = std::min(y_lo, 0.0);
  const Axis ax(x_lo, x_hi, log_x, kLeft, kWidth - kRight);
  const Axis ay(y_lo, y_hi, false, kHeight - kBottom, kTop);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  svg << "<g class=\"axes\" stroke=\"black\">\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\"/>\n"
      << "</g>\n";
  for (double t : ax.ticks()) {
    svg << "<text x=\"" << num(ax(t)) << "\" y=\"" << y0 + 15 << "\" text-anchor=\"middle\">"
        << num(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << num(ay(t) + 4) << "\" text-anchor=\"end\">"
        << num(t) << "</text>\n";
  }
  svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << y0 + 35 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">" << escape(y_label) << "</text>\n";

  const double bar_width = 24.0 / static_cast<double>(series.size());
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kColors[si % std::size(kColors)];
    svg << "<g class=\"series\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    if (!bars && s.points.size() > 1) {
      svg << "<polyline fill=\"none\" points=\"";
      for (const Point& p : s.points) svg << num(ax(p.x)) << ',' << num(ay(p.y)) << ' ';
      svg << "\"/>\n";
    }
    for (const Point& p : s.points) {
      double cx = ax(p.x);
      if (bars) {
        cx += (static_cast<double>(si) - 0.5 * static_cast<double>(series.size() - 1)) * bar_width;
        svg << "<rect class=\"marker\" x=\"" << num(cx - bar_width / 2) << "\" y=\"" << num(ay(p.y))
            << "\" width=\"" << num(bar_width) << "\" height=\"" << num(ay(0.0) - ay(p.y))
            << "\" fill-opacity=\"0.6\"/>\n";
      } else {
        svg << "<circle class=\"marker\" cx=\"" << num(cx) << "\" cy=\"" << num(ay(p.y))
            << "\" r=\"3\"/>\n";
      }
      if (p.err > 0) {
        svg << "<line class=\"errorbar\" x1=\"" << num(cx) << "\" y1=\"" << num(ay(p.y - p.err))
            << "\" x2=\"" << num(cx) << "\" y2=\"" << num(ay(p.y + p.err)) << "\" stroke=\"black\"/>\n";
      }
    }
    svg << "</g>\n";
    svg << "<text x=\"" << x0 + 10 << "\" y=\"" << y1 + 14 * (si + 1) << "\" fill=\"" << color << "\">"
        << escape(s.label) << "</text>\n";
  }
  svg << "<text class=\"caption\" x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(caption) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void require_names(const std::vector<ResultRow>& rows, std::initializer_list<const char*> names,
                   PlotKind kind) {
  for (const ResultRow& r : rows) {
    if (std::none_of(names.begin(), names.end(), [&](const char* n) { return r.statistic_name == n; })) {
      throw InvalidArgument("row '" + r.statistic_name + "' does not belong to a " +
                            std::string(to_string(kind)) + " plot");
    }
  }
}

std::string key_label(const ResultRow& r) {
  return "n=" + std::to_string(r.n) + " d=" + std::to_string(r.d) + " k=" + std::to_string(r.k) +
         " " + r.norm_tag;
}

}  // namespace

std::string_view to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::power_curve: return "power_curve";
    case PlotKind::phase_diagram: return "phase_diagram";
    case PlotKind::diameter_bars: return "diameter_bars";
  }
  return "unknown";
}

std::string emit_plot(const std::vector<ResultRow>& rows, PlotKind kind) {
  if (rows.empty()) throw InvalidArgument("cannot plot an empty row set");
  std::map<std::string, Series> grouped;
  std::vector<std::string> order;
  auto push = [&](const std::string& label, Point p) {
    auto [it, fresh] = grouped.try_emplace(label, Series{label, {}});
    if (fresh) order.push_back(label);
    it->second.points.push_back(p);
  };
  auto err = [](const ResultRow& r) { return r.std_error.value_or(0.0); };

  std::string x_label, y_label, caption;
  bool log_x = false, bars = false;
  switch (kind) {
    case PlotKind::power_curve:
      require_names(rows, {"power"}, kind);
      for (const ResultRow& r : rows) {
        if (!r.rho) throw InvalidArgument("power rows need a rho value");
        push(key_label(r), {*r.rho, r.value, err(r)});
      }
      x_label = "separation rho";
      y_label = "rejection rate";
      caption = "Detection boundary: power of the calibrated test against separation";
      break;
    case PlotKind::phase_diagram: {
      require_names(rows, {"size", "power"}, kind);
      std::map<std::string, std::size_t> seen;
      for (const ResultRow& r : rows) {
        if (r.statistic_name == "size") {
          push("size", {static_cast<double>(r.n), r.value, err(r)});
        } else {
          const std::size_t j = seen[std::to_string(r.n)]++;
          push("power #" + std::to_string(j + 1), {static_cast<double>(r.n), r.value, err(r)});
        }
      }
      x_label = "sample size n (log scale)";
      y_label = "rejection rate";
      caption = "Phase transition at n = d^2: size and power on both sides of the regime switch";
      log_x = true;
      break;
    }
    case PlotKind::diameter_bars:
      require_names(rows, {"median_diameter"}, kind);
      for (const ResultRow& r : rows) {
        push("n=" + std::to_string(r.n) + " d=" + std::to_string(r.d),
             {static_cast<double>(r.k), r.value, err(r)});
      }
      x_label = "rank k of the true signal";
      y_label = "median Frobenius diameter";
      caption = "Adaptive Frobenius confidence set: diameter grows with the true rank";
      bars = true;
      break;
  }
  std::vector<Series> series;
  for (const std::string& label : order) {
    Series s = grouped.at(label);
    std::stable_sort(s.points.begin(), s.points.end(),
                     [](const Point& a, const Point& b) { return a.x < b.x; });
    series.push_back(std::move(s));
  }
  return render(series, x_label, y_label, caption, log_x, bars);
}

}  // namespace lowrank::bench
