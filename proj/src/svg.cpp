#include "mmcm/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace mmcm::svg {
namespace {

constexpr std::array<Rgb, 5> kStops{{{0x44, 0x01, 0x54},
                                     {0x3b, 0x52, 0x8b},
                                     {0x21, 0x91, 0x8c},
                                     {0x5e, 0xc9, 0x62},
                                     {0xfd, 0xe7, 0x25}}};

constexpr std::array<const char*, 8> kPalette{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string px(double v) { return fmt("%.2f", v); }

std::string header(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         px(width) + "\" height=\"" + px(height) + "\" viewBox=\"0 0 " +
         px(width) + " " + px(height) + "\">\n"
         "<rect x=\"0\" y=\"0\" width=\"" + px(width) + "\" height=\"" +
         px(height) + "\" fill=\"#ffffff\"/>\n";
}

std::string text(double x, double y, std::string_view body,
                 std::string_view attrs) {
  return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" " + std::string(attrs) +
         ">" + escape(body) + "</text>\n";
}

double char_width(std::size_t chars) { return 7.0 * static_cast<double>(chars); }

// Picks black or white annotation text for legibility on `bg`.
const char* ink_for(Rgb bg) {
  const double luma = 0.2126 * bg.r + 0.7152 * bg.g + 0.0722 * bg.b;
  return luma > 128.0 ? "#000000" : "#ffffff";
}

}  // namespace

Rgb colormap(double t) {
  if (!(t > 0.0)) return kStops.front();
  if (t >= 1.0) return kStops.back();
  const double pos = t * static_cast<double>(kStops.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  auto lerp = [f](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + (b - a) * f));
  };
  const Rgb& lo = kStops[i];
  const Rgb& hi = kStops[i + 1];
  return {lerp(lo.r, hi.r), lerp(lo.g, hi.g), lerp(lo.b, hi.b)};
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string heatmap(const GapMatrix& m, std::string_view title) {
  constexpr double kCellW = 56.0;
  constexpr double kCellH = 28.0;
  constexpr double kPad = 12.0;
  constexpr double kLegendW = 18.0;

  std::size_t row_chars = 1;
  std::size_t col_chars = 1;
  for (const auto& id : m.row_ids) row_chars = std::max(row_chars, id.size());
  for (const auto& id : m.col_ids) col_chars = std::max(col_chars, id.size());

  const double title_h = title.empty() ? 0.0 : 24.0;
  const double left = kPad + char_width(row_chars) + 6.0;
  // Column labels are rotated -45 degrees above the grid.
  const double top = kPad + title_h + char_width(col_chars) * 0.75 + 10.0;
  const double grid_w = kCellW * static_cast<double>(m.cols());
  const double grid_h = kCellH * static_cast<double>(m.rows());
  const double legend_x = left + grid_w + 24.0;
  const double width = legend_x + kLegendW + 60.0;
  const double height = top + std::max(grid_h, 120.0) + kPad;

  double max_entry = 0.0;
  for (double v : m.values) max_entry = std::max(max_entry, v);

  std::string out = header(width, height);
  if (!title.empty()) {
    out += text(kPad, kPad + 14.0, title,
                "class=\"title\" font-family=\"sans-serif\" font-size=\"14\"");
  }

  out += "<g class=\"cells\">\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m.at(r, c);
      const Rgb color = colormap(max_entry > 0.0 ? v / max_entry : 0.0);
      const double x = left + kCellW * static_cast<double>(c);
      const double y = top + kCellH * static_cast<double>(r);
      out += "<rect class=\"cell\" x=\"" + px(x) + "\" y=\"" + px(y) +
             "\" width=\"" + px(kCellW) + "\" height=\"" + px(kCellH) +
             "\" fill=\"" + hex(color) + "\" stroke=\"#ffffff\"/>\n";
      out += text(x + kCellW / 2.0, y + kCellH / 2.0 + 4.0, fmt("%.3f", v),
                  std::string("class=\"value\" text-anchor=\"middle\" "
                              "font-family=\"sans-serif\" font-size=\"11\" fill=\"") +
                      ink_for(color) + "\"");
    }
  }
  out += "</g>\n<g class=\"labels\">\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += text(left - 6.0, top + kCellH * (static_cast<double>(r) + 0.5) + 4.0,
                m.row_ids[r],
                "class=\"row-label\" text-anchor=\"end\" "
                "font-family=\"sans-serif\" font-size=\"11\"");
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const double x = left + kCellW * (static_cast<double>(c) + 0.5);
    const double y = top - 6.0;
    out += "<text class=\"col-label\" x=\"" + px(x) + "\" y=\"" + px(y) +
           "\" transform=\"rotate(-45 " + px(x) + " " + px(y) +
           ")\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape(m.col_ids[c]) + "</text>\n";
  }
  out += "</g>\n";

  // Legend: gradient bar from 0 (bottom) to max_entry (top).
  const double bar_h = std::max(grid_h, 120.0);
  out += "<defs><linearGradient id=\"legend-gradient\" x1=\"0\" y1=\"1\" "
         "x2=\"0\" y2=\"0\">\n";
  for (std::size_t i = 0; i < kStops.size(); ++i) {
    out += "<stop offset=\"" +
           fmt("%.2f", static_cast<double>(i) / (kStops.size() - 1)) +
           "\" stop-color=\"" + hex(kStops[i]) + "\"/>\n";
  }
  out += "</linearGradient></defs>\n<g class=\"legend\">\n";
  out += "<rect x=\"" + px(legend_x) + "\" y=\"" + px(top) + "\" width=\"" +
         px(kLegendW) + "\" height=\"" + px(bar_h) +
         "\" fill=\"url(#legend-gradient)\" stroke=\"#000000\"/>\n";
  const std::string tick_attrs =
      "font-family=\"sans-serif\" font-size=\"11\"";
  out += text(legend_x + kLegendW + 4.0, top + 10.0, fmt("%.3f", max_entry),
              "class=\"legend-max\" " + tick_attrs);
  out += text(legend_x + kLegendW + 4.0, top + bar_h, fmt("%.3f", 0.0),
              "class=\"legend-min\" " + tick_attrs);
  out += "</g>\n</svg>\n";
  return out;
}

std::string scatter(std::span<const Series> series, std::string_view x_label,
                    std::string_view y_label, std::string_view title) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 440.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 150.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 60.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!any) {
        x_lo = x_hi = p.x;
        y_lo = y_hi = p.y;
        any = true;
      }
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y);
      y_hi = std::max(y_hi, p.y);
    }
  }
  auto widen = [](double& lo, double& hi) {
    if (hi - lo <= 0.0) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  };
  widen(x_lo, x_hi);
  widen(y_lo, y_hi);
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double y) { return kTop + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };

  std::string out = header(kWidth, kHeight);
  const std::string font = "font-family=\"sans-serif\" font-size=\"11\"";
  if (!title.empty()) {
    out += text(kLeft, 22.0, title,
                "class=\"title\" font-family=\"sans-serif\" font-size=\"14\"");
  }
  out += "<g class=\"axes\">\n";
  out += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" +
         px(plot_w) + "\" height=\"" + px(plot_h) +
         "\" fill=\"none\" stroke=\"#000000\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
    out += text(sx(fx), kTop + plot_h + 16.0, fmt("%.3g", fx),
                "class=\"tick\" text-anchor=\"middle\" " + font);
    out += text(kLeft - 6.0, sy(fy) + 4.0, fmt("%.3g", fy),
                "class=\"tick\" text-anchor=\"end\" " + font);
  }
  out += text(kLeft + plot_w / 2.0, kHeight - 16.0, x_label,
              "class=\"axis-label\" text-anchor=\"middle\" " + font);
  const double ylx = 18.0;
  const double yly = kTop + plot_h / 2.0;
  out += "<text class=\"axis-label\" x=\"" + px(ylx) + "\" y=\"" + px(yly) +
         "\" transform=\"rotate(-90 " + px(ylx) + " " + px(yly) +
         ")\" text-anchor=\"middle\" " + font + ">" + escape(y_label) +
         "</text>\n";
  out += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = kPalette[i % kPalette.size()];
    out += "<g class=\"series\" data-tag=\"" + escape(s.tag) + "\">\n";
    for (const auto& p : s.points) {
      out += "<circle class=\"point\" cx=\"" + px(sx(p.x)) + "\" cy=\"" +
             px(sy(p.y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    if (s.fit && !s.points.empty()) {
      double lo = s.points.front().x;
      double hi = lo;
      for (const auto& p : s.points) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
      }
      const double y0 = s.fit->intercept + s.fit->slope * lo;
      const double y1 = s.fit->intercept + s.fit->slope * hi;
      out += "<line class=\"trend\" x1=\"" + px(sx(lo)) + "\" y1=\"" +
             px(sy(y0)) + "\" x2=\"" + px(sx(hi)) + "\" y2=\"" + px(sy(y1)) +
             "\" stroke=\"" + color +
             "\" stroke-width=\"1.5\" stroke-dasharray=\"2 4\"/>\n";
    }
    out += "</g>\n";
  }

  out += "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10.0 + 20.0 * static_cast<double>(i);
    const double x = kLeft + plot_w + 16.0;
    out += "<g class=\"legend-entry\">\n<circle cx=\"" + px(x) + "\" cy=\"" +
           px(y) + "\" r=\"4\" fill=\"" + kPalette[i % kPalette.size()] +
           "\"/>\n" + text(x + 10.0, y + 4.0, series[i].tag, font) + "</g>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace mmcm::svg
