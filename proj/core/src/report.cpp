#include "asclens/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "asclens/error.hpp"

namespace asclens {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (std::abs(v) < 1e-12) v = 0.0;
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(lo <= hi)) return {0.0, 1.0};
  const double span = hi - lo;
  if (span == 0.0) return {lo - 0.5, hi + 0.5};
  return {lo - 0.05 * span, hi + 0.05 * span};
}

/// Plot frame on the fixed canvas: data ranges mapped onto the area inside
/// the margins (SVG y grows downwards).
class Frame {
 public:
  Frame(Range x, Range y) : x_(x), y_(y) {}

  double px(double v) const {
    return kCanvasMargin + (v - x_.lo) / (x_.hi - x_.lo) * (kCanvasWidth - 2.0 * kCanvasMargin);
  }
  double py(double v) const {
    return kCanvasHeight - kCanvasMargin -
           (v - y_.lo) / (y_.hi - y_.lo) * (kCanvasHeight - 2.0 * kCanvasMargin);
  }

  void open(std::string& out, const std::string& title) const {
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
    if (!title.empty()) {
      out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
             escape(title) + "</text>\n";
    }
  }

  void axes(std::string& out, const std::string& x_label, const std::string& y_label) const {
    const double left = kCanvasMargin;
    const double right = kCanvasWidth - kCanvasMargin;
    const double top = kCanvasMargin;
    const double bottom = kCanvasHeight - kCanvasMargin;
    out += "<g class=\"axes\" stroke=\"#000000\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(right) + "\" y2=\"" +
           num(bottom) + "\"/>\n";
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
           num(bottom) + "\"/>\n";
    for (int k = 0; k < 5; ++k) {
      const double xv = x_.lo + (x_.hi - x_.lo) * k / 4.0;
      const double yv = y_.lo + (y_.hi - y_.lo) * k / 4.0;
      out += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(px(xv)) + "\" y2=\"" +
             num(bottom + 4) + "\"/>\n";
      out += "<line x1=\"" + num(left - 4) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(left) + "\" y2=\"" +
             num(py(yv)) + "\"/>\n";
    }
    out += "</g>\n";
    out += "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#000000\">\n";
    for (int k = 0; k < 5; ++k) {
      const double xv = x_.lo + (x_.hi - x_.lo) * k / 4.0;
      const double yv = y_.lo + (y_.hi - y_.lo) * k / 4.0;
      out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(bottom + 15) + "\" text-anchor=\"middle\">" +
             tick_label(xv) + "</text>\n";
      out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(yv) + 3) + "\" text-anchor=\"end\">" +
             tick_label(yv) + "</text>\n";
    }
    out += "</g>\n";
    if (!x_label.empty()) {
      out += "<text x=\"400\" y=\"" + num(kCanvasHeight - 8) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(x_label) +
             "</text>\n";
    }
    if (!y_label.empty()) {
      out += "<text x=\"12\" y=\"300\" transform=\"rotate(-90 12 300)\" text-anchor=\"middle\" "
             "font-family=\"sans-serif\" font-size=\"12\">" +
             escape(y_label) + "</text>\n";
    }
  }

 private:
  Range x_;
  Range y_;
};

void legend(std::string& out, const std::vector<std::pair<std::string, std::string_view>>& entries,
            bool swatch_lines) {
  const double x = kCanvasWidth - kCanvasMargin - 130;
  double y = kCanvasMargin + 10;
  out += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (const auto& [name, color] : entries) {
    if (swatch_lines) {
      out += "<line x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x + 18) + "\" y2=\"" + num(y) +
             "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    } else {
      out += "<rect x=\"" + num(x + 4) + "\" y=\"" + num(y - 5) + "\" width=\"10\" height=\"10\" fill=\"" +
             std::string(color) + "\"/>\n";
    }
    out += "<text x=\"" + num(x + 24) + "\" y=\"" + num(y + 4) + "\">" + escape(name) + "</text>\n";
    y += 16;
  }
  out += "</g>\n";
}

}  // namespace

std::string_view construction_color(ConstructionLabel label) noexcept {
  switch (label) {
    case ConstructionLabel::caused_motion: return "#1f77b4";
    case ConstructionLabel::ditransitive: return "#2ca02c";
    case ConstructionLabel::transitive: return "#ff7f0e";
    case ConstructionLabel::resultative: return "#d62728";
  }
  return "#000000";
}

std::string_view role_color(TokenRole role) noexcept {
  switch (role) {
    case TokenRole::CLS: return "#1f77b4";
    case TokenRole::DET: return "#ff7f0e";
    case TokenRole::SUBJ: return "#2ca02c";
    case TokenRole::VERB: return "#d62728";
    case TokenRole::OBJ: return "#9467bd";
    case TokenRole::INDOBJ: return "#8c564b";
    case TokenRole::PREP: return "#e377c2";
    case TokenRole::OBJPREP: return "#7f7f7f";
    case TokenRole::SEP: return "#bcbd22";
    case TokenRole::OTHER: return "#17becf";
  }
  return "#000000";
}

std::string render_scatter(const Matrix& coords, std::span<const ConstructionLabel> labels,
                           const std::string& title) {
  const std::size_t n = coords.rows();
  if (labels.size() != n || (n > 0 && coords.cols() < 2)) {
    throw Error(Errc::length_mismatch, "scatter needs one label per 2-D point (" + std::to_string(n) +
                                           " points, " + std::to_string(labels.size()) + " labels)");
  }
  double xlo = std::numeric_limits<double>::infinity();
  double xhi = -xlo;
  double ylo = xlo;
  double yhi = -xlo;
  for (std::size_t i = 0; i < n; ++i) {
    xlo = std::min(xlo, coords(i, 0));
    xhi = std::max(xhi, coords(i, 0));
    ylo = std::min(ylo, coords(i, 1));
    yhi = std::max(yhi, coords(i, 1));
  }
  const Frame frame(padded(xlo, xhi), padded(ylo, yhi));

  std::string out;
  frame.open(out, title);
  frame.axes(out, "", "");
  out += "<g class=\"points\" stroke=\"none\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += "<circle cx=\"" + num(frame.px(coords(i, 0))) + "\" cy=\"" + num(frame.py(coords(i, 1))) +
           "\" r=\"3\" fill=\"" + std::string(construction_color(labels[i])) + "\"/>\n";
  }
  out += "</g>\n";
  std::vector<std::pair<std::string, std::string_view>> entries;
  for (auto label : {ConstructionLabel::caused_motion, ConstructionLabel::ditransitive,
                     ConstructionLabel::transitive, ConstructionLabel::resultative}) {
    entries.emplace_back(std::string(to_string(label)), construction_color(label));
  }
  legend(out, entries, false);
  out += "</svg>\n";
  return out;
}

std::string render_line(const LineSeries& series, const std::string& y_label, const std::string& title) {
  double xlo = std::numeric_limits<double>::infinity();
  double xhi = -xlo;
  double ylo = xlo;
  double yhi = -xlo;
  for (const auto& [role, points] : series) {
    for (const auto& [x, y] : points) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  const Frame frame(padded(xlo, xhi), padded(ylo, yhi));

  std::string out;
  frame.open(out, title);
  frame.axes(out, "layer", y_label);
  std::vector<std::pair<std::string, std::string_view>> entries;
  for (const auto& [role, points] : series) {
    if (points.empty()) continue;
    auto sorted = points;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string coords;
    for (const auto& [x, y] : sorted) {
      if (!coords.empty()) coords += ' ';
      coords += num(frame.px(x)) + "," + num(frame.py(y));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(role_color(role)) +
           "\" stroke-width=\"2\" points=\"" + coords + "\"/>\n";
    entries.emplace_back(std::string(to_string(role)), role_color(role));
  }
  legend(out, entries, true);
  out += "</svg>\n";
  return out;
}

std::string render_fdr_dots(const AttentionStats& stats, TokenRole role) {
  std::map<std::size_t, std::vector<double>> per_layer;
  for (const auto& [key, cell] : stats.entries) {
    if (std::get<2>(key) == role) per_layer[std::get<0>(key)].push_back(cell.fdr_mean);
  }
  if (per_layer.empty()) {
    throw Error(Errc::missing_role, "attention statistics hold no entries for role " +
                                        std::string(to_string(role)));
  }
  std::map<std::size_t, double> layer_mean;
  double ymax = 0.0;
  for (const auto& [layer, values] : per_layer) {
    const auto it = stats.layer_mean_fdr.find({layer, role});
    double mean = 0.0;
    if (it != stats.layer_mean_fdr.end()) {
      mean = it->second;
    } else {
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
    }
    layer_mean[layer] = mean;
    for (double v : values) ymax = std::max(ymax, v);
    ymax = std::max(ymax, mean);
  }
  const double xlo = static_cast<double>(per_layer.begin()->first) - 0.5;
  const double xhi = static_cast<double>(per_layer.rbegin()->first) + 0.5;
  const Frame frame({xlo, xhi}, {0.0, ymax > 0.0 ? ymax * 1.05 : 1.0});

  std::string out;
  frame.open(out, "Attention FDR: " + std::string(to_string(role)));
  frame.axes(out, "layer", "FDR");
  const std::string color(role_color(role));
  out += "<g class=\"heads\" stroke=\"none\">\n";
  for (const auto& [layer, values] : per_layer) {
    for (double v : values) {
      out += "<circle cx=\"" + num(frame.px(static_cast<double>(layer))) + "\" cy=\"" + num(frame.py(v)) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
  }
  out += "</g>\n";
  out += "<g class=\"layer-means\" stroke=\"#000000\" stroke-width=\"1.5\" stroke-dasharray=\"4,3\">\n";
  for (const auto& [layer, mean] : layer_mean) {
    const double x = static_cast<double>(layer);
    out += "<line x1=\"" + num(frame.px(x - 0.35)) + "\" y1=\"" + num(frame.py(mean)) + "\" x2=\"" +
           num(frame.px(x + 0.35)) + "\" y2=\"" + num(frame.py(mean)) + "\"/>\n";
  }
  out += "</g>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace asclens
