#include "rashomon/plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "rashomon/couple.hpp"
#include "rashomon/error.hpp"
#include "rashomon/numfmt.hpp"

namespace rashomon::plot {

ChartKind chart_kind_from_string(const std::string& name) {
  if (name == "pdp_grid") return ChartKind::pdp_grid;
  if (name == "residual_parcoord") return ChartKind::residual_parcoord;
  if (name == "pairs_matrix") return ChartKind::pairs_matrix;
  if (name == "couple_curves") return ChartKind::couple_curves;
  throw InvalidArgument("unknown chart kind '" + name + "'");
}

namespace {

const char* const kPalette[] = {"#4378bf", "#f05a71", "#ae2c87", "#8bdcbe",
                                "#ffa58c", "#46bac2", "#371ea3", "#9fa0a5"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string escape(const std::string& s) {
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

std::string f(double v) { return format_short(v); }

class Svg {
 public:
  Svg(double width, double height) {
    body_ = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
            f(width) + "\" height=\"" + f(height) + "\" viewBox=\"0 0 " + f(width) +
            " " + f(height) + "\" font-family=\"sans-serif\">\n"
            "<rect x=\"0\" y=\"0\" width=\"" + f(width) + "\" height=\"" + f(height) +
            "\" fill=\"white\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& style) {
    body_ += "<rect x=\"" + f(x) + "\" y=\"" + f(y) + "\" width=\"" + f(w) +
             "\" height=\"" + f(h) + "\" " + style + "/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    body_ += "<line x1=\"" + f(x1) + "\" y1=\"" + f(y1) + "\" x2=\"" + f(x2) +
             "\" y2=\"" + f(y2) + "\" " + style + "/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& style) {
    body_ += "<polyline points=\"" + points(pts) + "\" fill=\"none\" " + style + "/>\n";
  }
  void polygon(const std::vector<std::pair<double, double>>& pts,
               const std::string& style) {
    body_ += "<polygon points=\"" + points(pts) + "\" " + style + "/>\n";
  }
  void circle(double x, double y, double r, const std::string& style) {
    body_ += "<circle cx=\"" + f(x) + "\" cy=\"" + f(y) + "\" r=\"" + f(r) + "\" " +
             style + "/>\n";
  }
  void text(double x, double y, const std::string& s, double size,
            const std::string& anchor = "middle", const std::string& extra = "") {
    body_ += "<text x=\"" + f(x) + "\" y=\"" + f(y) + "\" font-size=\"" + f(size) +
             "\" text-anchor=\"" + anchor + "\"" + (extra.empty() ? "" : " " + extra) +
             ">" + escape(s) + "</text>\n";
  }
  std::string finish() { return body_ + "</svg>\n"; }

 private:
  static std::string points(const std::vector<std::pair<double, double>>& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out += ' ';
      out += f(pts[i].first) + "," + f(pts[i].second);
    }
    return out;
  }
  std::string body_;
};

struct Range {
  double lo = 0.0, hi = 1.0;

  void include(double v) {
    if (!std::isfinite(v)) return;
    if (empty_) {
      lo = hi = v;
      empty_ = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  Range padded(double frac = 0.05) const {
    Range r = *this;
    double span = hi - lo;
    if (!(span > 0.0)) span = std::max(1.0, std::abs(lo));
    r.lo -= frac * span;
    r.hi += frac * span;
    r.empty_ = false;
    return r;
  }

 private:
  bool empty_ = true;
};

// Maps data ranges onto a pixel box; y grows downwards in SVG.
struct Panel {
  double x0, y0, w, h;
  Range xr, yr;

  double px(double v) const { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * w; }
  double py(double v) const { return y0 + h - (v - yr.lo) / (yr.hi - yr.lo) * h; }
};

std::vector<double> ticks(const Range& r, int target = 4) {
  const double span = r.hi - r.lo;
  if (!(span > 0.0)) return {r.lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

void frame(Svg& svg, const Panel& p, bool x_labels, bool y_labels) {
  svg.rect(p.x0, p.y0, p.w, p.h, "fill=\"#f7f7f9\" stroke=\"#9fa0a5\" stroke-width=\"0.5\"");
  for (double t : ticks(p.xr)) {
    svg.line(p.px(t), p.y0, p.px(t), p.y0 + p.h, "stroke=\"white\" stroke-width=\"0.8\"");
    if (x_labels) svg.text(p.px(t), p.y0 + p.h + 12, f(t), 9);
  }
  for (double t : ticks(p.yr)) {
    svg.line(p.x0, p.py(t), p.x0 + p.w, p.py(t), "stroke=\"white\" stroke-width=\"0.8\"");
    if (y_labels) svg.text(p.x0 - 4, p.py(t) + 3, f(t), 9, "end");
  }
}

}  // namespace

std::string pdp_grid(std::span<const PDProfile> profiles) {
  if (profiles.empty()) throw InvalidArgument("pdp_grid: no profiles");
  std::vector<std::string> models, features;
  for (const auto& p : profiles) {
    if (p.grid.empty() || p.grid.size() != p.pd.size())
      throw InvalidArgument("pdp_grid: malformed profile " + p.model_label + "/" + p.feature);
    if (std::find(models.begin(), models.end(), p.model_label) == models.end())
      models.push_back(p.model_label);
    if (std::find(features.begin(), features.end(), p.feature) == features.end())
      features.push_back(p.feature);
  }
  // Shared y range so panels compare directly; per-feature x range.
  Range yr;
  std::map<std::string, Range> xr;
  for (const auto& p : profiles) {
    for (std::size_t g = 0; g < p.grid.size(); ++g) {
      xr[p.feature].include(p.grid[g]);
      yr.include(p.pd[g]);
      if (!p.ci_lo.empty()) {
        yr.include(p.ci_lo[g]);
        yr.include(p.ci_hi[g]);
      }
    }
  }
  const double pw = 200, ph = 140, gap_x = 30, gap_y = 40, left = 60, top = 50;
  const double width = left + features.size() * (pw + gap_x) + 20;
  const double height = top + models.size() * (ph + gap_y) + 20;
  Svg svg(width, height);
  svg.text(width / 2, 24, "Partial dependence profiles", 16);

  for (std::size_t r = 0; r < models.size(); ++r) {
    for (std::size_t c = 0; c < features.size(); ++c) {
      Panel panel{left + c * (pw + gap_x), top + r * (ph + gap_y), pw, ph,
                  xr[features[c]].padded(), yr.padded()};
      frame(svg, panel, true, c == 0);
      svg.text(panel.x0 + pw / 2, panel.y0 - 6, models[r] + " : " + features[c], 11);
      for (const auto& p : profiles) {
        if (p.model_label != models[r] || p.feature != features[c]) continue;
        if (!p.ci_lo.empty()) {
          std::vector<std::pair<double, double>> band;
          for (std::size_t g = 0; g < p.grid.size(); ++g)
            band.emplace_back(panel.px(p.grid[g]), panel.py(p.ci_hi[g]));
          for (std::size_t g = p.grid.size(); g-- > 0;)
            band.emplace_back(panel.px(p.grid[g]), panel.py(p.ci_lo[g]));
          svg.polygon(band, std::string("fill=\"") + color(r) +
                                "\" fill-opacity=\"0.3\" stroke=\"none\"");
        }
        std::vector<std::pair<double, double>> pts;
        for (std::size_t g = 0; g < p.grid.size(); ++g)
          pts.emplace_back(panel.px(p.grid[g]), panel.py(p.pd[g]));
        svg.polyline(pts, std::string("stroke=\"") + color(r) + "\" stroke-width=\"1.5\"");
      }
    }
  }
  return svg.finish();
}

std::string residual_parcoord(const ResidualTable& table, int max_lines) {
  const Eigen::Index n = table.residuals.rows();
  const Eigen::Index m = table.residuals.cols();
  if (n == 0 || m == 0) throw InvalidArgument("residual_parcoord: empty residual table");
  if (max_lines < 1) throw InvalidArgument("residual_parcoord: max_lines must be >= 1");
  Range yr;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) yr.include(table.residuals(i, j));
  const double left = 70, top = 50, w = 150.0 * std::max<Eigen::Index>(m - 1, 1), h = 360;
  Svg svg(left + w + 70, top + h + 50);
  svg.text(left + w / 2, 24, "Residuals per observation", 16);
  Panel panel{left, top, w, h, Range{}, yr.padded()};
  panel.xr.include(0);
  panel.xr.include(static_cast<double>(std::max<Eigen::Index>(m - 1, 1)));
  for (double t : ticks(panel.yr)) {
    svg.line(left, panel.py(t), left + w, panel.py(t), "stroke=\"#e6e6e6\" stroke-width=\"0.8\"");
    svg.text(left - 6, panel.py(t) + 3, f(t), 9, "end");
  }
  const Eigen::Index stride = std::max<Eigen::Index>(1, (n + max_lines - 1) / max_lines);
  for (Eigen::Index i = 0; i < n; i += stride) {
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index j = 0; j < m; ++j)
      pts.emplace_back(panel.px(static_cast<double>(j)), panel.py(table.residuals(i, j)));
    svg.polyline(pts, "stroke=\"#371ea3\" stroke-opacity=\"0.08\" stroke-width=\"0.8\"");
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double x = panel.px(static_cast<double>(j));
    svg.line(x, top, x, top + h, "stroke=\"#2a2a2a\" stroke-width=\"1\"");
    svg.text(x, top + h + 18, table.labels[static_cast<std::size_t>(j)], 11);
  }
  return svg.finish();
}

std::string pairs_matrix(const Dataset& train, const Dataset& test, int max_points) {
  if (train.column_names() != test.column_names())
    throw InvalidArgument("pairs_matrix: train and test columns differ");
  if (train.rows() == 0 || test.rows() == 0)
    throw InvalidArgument("pairs_matrix: empty dataset");
  if (max_points < 1) throw InvalidArgument("pairs_matrix: max_points must be >= 1");
  const auto& names = train.column_names();
  const auto k = static_cast<Eigen::Index>(names.size());
  const Dataset* sets[] = {&train, &test};
  const char* set_names[] = {"train", "test"};
  const char* set_colors[] = {"#f05a71", "#46bac2"};

  std::vector<Range> ranges(static_cast<std::size_t>(k));
  for (const Dataset* d : sets)
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < d->rows(); ++i)
        ranges[static_cast<std::size_t>(j)].include(d->values()(i, j));
  for (auto& r : ranges) r = r.padded();

  const double cell = 150, gap = 8, left = 50, top = 50;
  const double size = left + k * (cell + gap) + 20;
  Svg svg(size, size + 30);
  svg.text(size / 2, 24, "Train and test distributions", 16);
  for (int s = 0; s < 2; ++s) {
    svg.rect(left + s * 90, size + 5, 10, 10, std::string("fill=\"") + set_colors[s] + "\"");
    svg.text(left + s * 90 + 14, size + 14, set_names[s], 11, "start");
  }

  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      Panel panel{left + c * (cell + gap), top + r * (cell + gap), cell, cell,
                  ranges[static_cast<std::size_t>(c)], ranges[static_cast<std::size_t>(r)]};
      if (r == c) {
        // Histogram densities, 25 bins.
        const int bins = 25;
        std::vector<std::vector<double>> dens(2, std::vector<double>(bins, 0.0));
        const auto& xr = panel.xr;
        const double bw = (xr.hi - xr.lo) / bins;
        double peak = 0.0;
        for (int s = 0; s < 2; ++s) {
          const Dataset& d = *sets[s];
          for (Eigen::Index i = 0; i < d.rows(); ++i) {
            int b = static_cast<int>((d.values()(i, c) - xr.lo) / bw);
            b = std::clamp(b, 0, bins - 1);
            dens[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)] += 1.0;
          }
          for (auto& v : dens[static_cast<std::size_t>(s)]) {
            v /= static_cast<double>(d.rows()) * bw;
            peak = std::max(peak, v);
          }
        }
        panel.yr = Range{};
        panel.yr.include(0.0);
        panel.yr.include(peak);
        panel.yr = panel.yr.padded();
        frame(svg, panel, r == k - 1, false);
        for (int s = 0; s < 2; ++s) {
          std::vector<std::pair<double, double>> pts;
          for (int b = 0; b < bins; ++b) {
            const double y = panel.py(dens[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)]);
            pts.emplace_back(panel.px(xr.lo + b * bw), y);
            pts.emplace_back(panel.px(xr.lo + (b + 1) * bw), y);
          }
          svg.polyline(pts, std::string("stroke=\"") + set_colors[s] + "\" stroke-width=\"1.2\"");
        }
        svg.text(panel.x0 + cell / 2, panel.y0 + 14, names[static_cast<std::size_t>(c)], 12);
      } else if (r > c) {
        frame(svg, panel, r == k - 1, c == 0);
        for (int s = 0; s < 2; ++s) {
          const Dataset& d = *sets[s];
          const Eigen::Index stride =
              std::max<Eigen::Index>(1, (d.rows() + max_points - 1) / max_points);
          for (Eigen::Index i = 0; i < d.rows(); i += stride)
            svg.circle(panel.px(d.values()(i, c)), panel.py(d.values()(i, r)), 1.0,
                       std::string("fill=\"") + set_colors[s] + "\" fill-opacity=\"0.25\"");
        }
      } else {
        svg.rect(panel.x0, panel.y0, cell, cell, "fill=\"white\" stroke=\"#9fa0a5\" stroke-width=\"0.5\"");
        for (int s = 0; s < 2; ++s) {
          const auto& v = sets[s]->values();
          const Eigen::VectorXd a = v.col(c).array() - v.col(c).mean();
          const Eigen::VectorXd b = v.col(r).array() - v.col(r).mean();
          const double denom = a.norm() * b.norm();
          const double corr = denom > 0.0 ? a.dot(b) / denom : 0.0;
          char buf[64];
          std::snprintf(buf, sizeof buf, "%s: %.3f", set_names[s], corr);
          svg.text(panel.x0 + cell / 2, panel.y0 + cell / 2 + (s ? 12 : -4), buf, 11, "middle",
                   std::string("fill=\"") + set_colors[s] + "\"");
        }
      }
    }
  }
  return svg.finish();
}

std::string couple_curves(double alpha) {
  const couple::CoupleSpec spec{alpha};
  const auto lin = couple::best_linear(spec);
  const auto stump = couple::best_stump(spec);
  Range yr;
  const int samples = 401;
  std::vector<double> xs(samples);
  for (int i = 0; i < samples; ++i) {
    xs[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (samples - 1);
    yr.include(spec.target(xs[static_cast<std::size_t>(i)]));
  }
  yr.include(lin.coefficient);
  yr.include(-lin.coefficient);
  const double left = 60, top = 50, w = 420, h = 320;
  Svg svg(left + w + 30, top + h + 80);
  Range xr;
  xr.include(-1.0);
  xr.include(1.0);
  Panel panel{left, top, w, h, xr.padded(0.02), yr.padded()};
  svg.text(left + w / 2, 24, "Two families, equal error", 16);
  frame(svg, panel, true, true);

  std::vector<std::pair<double, double>> truth, fit_lin;
  for (double x : xs) {
    truth.emplace_back(panel.px(x), panel.py(spec.target(x)));
    fit_lin.emplace_back(panel.px(x), panel.py(lin.coefficient * x));
  }
  svg.polyline(truth, "stroke=\"black\" stroke-width=\"2\"");
  svg.polyline(fit_lin, "stroke=\"#4378bf\" stroke-width=\"1.5\"");
  svg.polyline({{panel.px(-1.0), panel.py(-stump.coefficient)},
                {panel.px(0.0), panel.py(-stump.coefficient)},
                {panel.px(0.0), panel.py(stump.coefficient)},
                {panel.px(1.0), panel.py(stump.coefficient)}},
               "stroke=\"#f05a71\" stroke-width=\"1.5\"");
  const double ly = top + h + 36;
  const std::string legend[] = {"sign(x)|x|^" + f(alpha),
                                "linear b1=" + f(lin.coefficient) + ", mse=" + f(lin.mse),
                                "stump b0=" + f(stump.coefficient) + ", mse=" + f(stump.mse)};
  const char* legend_colors[] = {"black", "#4378bf", "#f05a71"};
  for (int i = 0; i < 3; ++i) {
    svg.line(left, ly + i * 14 - 4, left + 20, ly + i * 14 - 4,
             std::string("stroke=\"") + legend_colors[i] + "\" stroke-width=\"2\"");
    svg.text(left + 26, ly + i * 14, legend[i], 11, "start");
  }
  return svg.finish();
}

}  // namespace rashomon::plot
