#include "gmmimm/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gmmimm::svg {

namespace {

constexpr std::array<const char *, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                   "#bcbd22", "#17becf"};
constexpr int kLeft = 70, kRight = 150, kTop = 36, kBottom = 46;

std::string num(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string tick_label(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3g", v);
  return buf.data();
}

std::string escape(const std::string &s) {
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

std::string header(int width, int height, const std::string &title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + std::to_string(width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

struct Frame {
  double x0, y0, w, h; // plot area in pixels
  double lo, hi;       // y range in (possibly log) units
  double px_y(double v) const { return y0 + h - (v - lo) / (hi - lo) * h; }
};

std::string axes(const Frame &f, const std::string &x_label, const std::string &y_label,
                 bool log_y) {
  std::string out;
  out += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) +
         "\" height=\"" + num(f.h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = f.lo + (f.hi - f.lo) * i / 4.0;
    const double y = f.px_y(v);
    out += "<line x1=\"" + num(f.x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.x0) +
           "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(f.x0 - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
           tick_label(log_y ? std::pow(10.0, v) : v) + "</text>\n";
  }
  out += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 + f.h + 34) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  out += "<text transform=\"translate(16," + num(f.y0 + f.h / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  return out;
}

std::string legend(const std::vector<std::string> &names, double x, double y) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double yy = y + 14.0 * static_cast<double>(i);
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(yy - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
           kPalette[i % kPalette.size()] + "\"/>\n";
    out += "<text x=\"" + num(x + 14) + "\" y=\"" + num(yy + 1) + "\">" + escape(names[i]) +
           "</text>\n";
  }
  return out;
}

} // namespace

std::string render(const LineChart &chart, int width, int height) {
  constexpr double kLogClamp = 1e-6;
  auto transform = [&](double v) {
    return chart.log_y ? std::log10(std::max(v, kLogClamp)) : v;
  };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n = 1;
  for (const auto &s : chart.series) {
    n = std::max(n, s.values.size());
    for (double v : s.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, transform(v));
        hi = std::max(hi, transform(v));
      }
  }
  for (const auto &[name, v] : chart.reference_lines) {
    lo = std::min(lo, transform(v));
    hi = std::max(hi, transform(v));
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const Frame f{double(kLeft), double(kTop), double(width - kLeft - kRight),
                double(height - kTop - kBottom), lo, hi};
  auto px_x = [&](std::size_t i) {
    return f.x0 + (n > 1 ? f.w * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
  };

  std::string out = header(width, height, chart.title);
  out += axes(f, chart.x_label, chart.y_label, chart.log_y);
  std::vector<std::string> names;
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const auto &series = chart.series[s];
    names.push_back(series.name);
    std::string d;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
      d += (i == 0 ? "M" : " L") + num(px_x(i)) + "," + num(f.px_y(transform(series.values[i])));
    }
    out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + kPalette[s % kPalette.size()] +
           "\" stroke-width=\"1\"/>\n";
  }
  for (const auto &[name, v] : chart.reference_lines) {
    const double y = f.px_y(transform(v));
    out += "<line x1=\"" + num(f.x0) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.x0 + f.w) +
           "\" y2=\"" + num(y) + "\" stroke=\"black\" stroke-dasharray=\"5,4\"/>\n";
    out += "<text x=\"" + num(f.x0 + f.w + 4) + "\" y=\"" + num(y + 4) + "\">" + escape(name) +
           "</text>\n";
  }
  out += legend(names, f.x0 + f.w + 10, f.y0 + 30);
  out += "</svg>\n";
  return out;
}

std::string render(const BarChart &chart, int width, int height) {
  double hi = 0.0;
  for (const auto &group : chart.values)
    for (double v : group)
      if (std::isfinite(v))
        hi = std::max(hi, v);
  if (hi <= 0.0)
    hi = 1.0;
  const Frame f{double(kLeft), double(kTop), double(width - kLeft - kRight),
                double(height - kTop - kBottom), 0.0, hi * 1.05};

  std::string out = header(width, height, chart.title);
  out += axes(f, "", chart.y_label, false);
  const std::size_t groups = std::max<std::size_t>(chart.group_labels.size(), 1);
  const std::size_t per_group = std::max<std::size_t>(chart.series_names.size(), 1);
  const double group_w = f.w / static_cast<double>(groups);
  const double bar_w = group_w * 0.8 / static_cast<double>(per_group);
  for (std::size_t g = 0; g < chart.values.size(); ++g) {
    const double gx = f.x0 + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t s = 0; s < chart.values[g].size(); ++s) {
      const double v = std::max(0.0, chart.values[g][s]);
      const double y = f.px_y(v);
      out += "<rect x=\"" + num(gx + bar_w * static_cast<double>(s)) + "\" y=\"" + num(y) +
             "\" width=\"" + num(bar_w) + "\" height=\"" + num(f.y0 + f.h - y) + "\" fill=\"" +
             kPalette[s % kPalette.size()] + "\"/>\n";
    }
    if (g < chart.group_labels.size())
      out += "<text x=\"" + num(gx + group_w * 0.4) + "\" y=\"" + num(f.y0 + f.h + 16) +
             "\" text-anchor=\"middle\">" + escape(chart.group_labels[g]) + "</text>\n";
  }
  out += legend(chart.series_names, f.x0 + f.w + 10, f.y0 + 30);
  out += "</svg>\n";
  return out;
}

} // namespace gmmimm::svg
