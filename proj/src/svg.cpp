#include "deskrl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "deskrl/ioutil.hpp"

namespace deskrl {

namespace {

struct Curve {
  std::vector<double> x;  // cumulative frames
  std::vector<double> y;  // trailing-k mean
};

Curve trial_curve(const TrialRecord& t, int k) {
  Curve c;
  c.x.reserve(t.episodes.size());
  c.y.reserve(t.episodes.size());
  double window_sum = 0.0;
  std::size_t window_start = 0;
  for (std::size_t i = 0; i < t.episodes.size(); ++i) {
    window_sum += t.episodes[i].score;
    if (i - window_start + 1 > static_cast<std::size_t>(k)) {
      window_sum -= t.episodes[window_start].score;
      ++window_start;
    }
    c.x.push_back(static_cast<double>(t.episodes[i].cum_frames));
    c.y.push_back(window_sum / static_cast<double>(i - window_start + 1));
  }
  return c;
}

// Step interpolation: the curve's value at x is the value of the last
// episode boundary at or before x (the first value before any boundary).
double value_at(const Curve& c, double x) {
  if (x <= c.x.front()) return c.y.front();
  std::size_t lo = 0;
  for (std::size_t i = 0; i < c.x.size() && c.x[i] <= x; ++i) lo = i;
  return c.y[lo];
}

std::string polyline(const std::vector<std::pair<double, double>>& pts,
                     const std::string& color, const std::string& width) {
  std::string out = "<polyline fill=\"none\" stroke=\"" + color +
                    "\" stroke-width=\"" + width + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += " ";
    out += fmt_double(std::round(pts[i].first * 100.0) / 100.0) + "," +
           fmt_double(std::round(pts[i].second * 100.0) / 100.0);
  }
  out += "\"/>\n";
  return out;
}

}  // namespace

std::string emit_curves(const std::vector<TrialRecord>& trials, int k,
                        const std::string& title) {
  if (trials.empty()) throw std::invalid_argument("emit_curves needs >= 1 trial");
  for (const auto& t : trials) {
    if (t.episodes.empty()) throw std::invalid_argument("trial with no episodes");
  }
  constexpr double kW = 640, kH = 400;
  constexpr double kL = 64, kR = 16, kT = 32, kB = 44;

  std::vector<Curve> curves;
  curves.reserve(trials.size());
  double x_max = 1.0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const auto& t : trials) {
    curves.push_back(trial_curve(t, k));
    x_max = std::max(x_max, curves.back().x.back());
    for (double y : curves.back().y) {
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (y_min == y_max) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const auto px = [&](double x) { return kL + (x / x_max) * (kW - kL - kR); };
  const auto py = [&](double y) {
    return kT + (1.0 - (y - y_min) / (y_max - y_min)) * (kH - kT - kB);
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + fmt_double(kL) + "\" y1=\"" + fmt_double(kH - kB) +
         "\" x2=\"" + fmt_double(kW - kR) + "\" y2=\"" + fmt_double(kH - kB) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt_double(kL) + "\" y1=\"" + fmt_double(kT) + "\" x2=\"" +
         fmt_double(kL) + "\" y2=\"" + fmt_double(kH - kB) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt_double((kL + kW - kR) / 2) + "\" y=\"" + fmt_double(kH - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "frames</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt_double((kT + kH - kB) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " + fmt_double((kT + kH - kB) / 2) + ")\">"
         "score (trailing mean, k=" + std::to_string(k) + ")</text>\n";
  // tick labels
  svg += "<text x=\"" + fmt_double(kL) + "\" y=\"" + fmt_double(kH - kB + 16) +
         "\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
  svg += "<text x=\"" + fmt_double(kW - kR) + "\" y=\"" + fmt_double(kH - kB + 16) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
         fmt_double(x_max) + "</text>\n";
  svg += "<text x=\"" + fmt_double(kL - 4) + "\" y=\"" + fmt_double(py(y_min) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
         fmt_double(std::round(y_min * 100.0) / 100.0) + "</text>\n";
  svg += "<text x=\"" + fmt_double(kL - 4) + "\" y=\"" + fmt_double(py(y_max) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
         fmt_double(std::round(y_max * 100.0) / 100.0) + "</text>\n";

  // grey per-trial curves (downsampled to at most 512 points)
  for (const auto& c : curves) {
    std::vector<std::pair<double, double>> pts;
    const std::size_t stride = std::max<std::size_t>(1, c.x.size() / 512);
    for (std::size_t i = 0; i < c.x.size(); i += stride) {
      pts.emplace_back(px(c.x[i]), py(c.y[i]));
    }
    if ((c.x.size() - 1) % stride != 0) {
      pts.emplace_back(px(c.x.back()), py(c.y.back()));
    }
    svg += polyline(pts, "#999999", "1");
  }

  // red cross-trial mean on a uniform frame grid
  constexpr int kGrid = 128;
  std::vector<std::pair<double, double>> mean_pts;
  for (int g = 0; g <= kGrid; ++g) {
    const double x = x_max * static_cast<double>(g) / kGrid;
    double sum = 0.0;
    for (const auto& c : curves) sum += value_at(c, x);
    mean_pts.emplace_back(px(x), py(sum / static_cast<double>(curves.size())));
  }
  svg += polyline(mean_pts, "#d62728", "2");

  svg += "</svg>\n";
  return svg;
}

}  // namespace deskrl
