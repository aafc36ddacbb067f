#include "metamarket/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>

namespace metamarket {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 260.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kGap = 60.0;

const char* label_color(WellLabel label) {
  switch (label) {
    case WellLabel::WellPlus:
      return "#2ca02c";
    case WellLabel::WellMinus:
      return "#d62728";
    case WellLabel::Delta:
      return "#7f7f7f";
  }
  return "#7f7f7f";
}

const char* value_color(int value) {
  if (value == 1) return "#2ca02c";
  if (value == -1) return "#d62728";
  if (value == 0) return "#7f7f7f";
  return "#1f77b4";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Axis {
  double lo, hi, pixel_lo, pixel_hi;
  double operator()(double v) const {
    if (hi == lo) return 0.5 * (pixel_lo + pixel_hi);
    return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

void header(std::string& out, double height) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(height) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
}

void frame(std::string& out, const Axis& x, const Axis& y, const std::string& title, const std::string& x_name) {
  out += "<rect x=\"" + num(x.pixel_lo) + "\" y=\"" + num(y.pixel_hi) + "\" width=\"" + num(x.pixel_hi - x.pixel_lo) +
         "\" height=\"" + num(y.pixel_lo - y.pixel_hi) + "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + num(x.pixel_lo) + "\" y=\"" + num(y.pixel_hi - 8) +
         "\" font-family=\"sans-serif\" font-size=\"13\">" + title + "</text>\n";
  char buf[64];
  for (double v : {y.lo, y.hi}) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    out += "<text x=\"" + num(x.pixel_lo - 6) + "\" y=\"" + num(y(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + buf + "</text>\n";
  }
  for (double v : {x.lo, x.hi}) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    out += "<text x=\"" + num(x(v)) + "\" y=\"" + num(y.pixel_lo + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + buf + "</text>\n";
  }
  out += "<text x=\"" + num(0.5 * (x.pixel_lo + x.pixel_hi)) + "\" y=\"" + num(y.pixel_lo + 32) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + x_name + "</text>\n";
}

struct Span {
  std::size_t begin, end;  // [begin, end] inclusive row indices
  WellLabel label;
};

std::vector<Span> spans_of(const std::vector<GridRow>& rows) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (spans.empty() || spans.back().label != rows[i].label) {
      spans.push_back({i, i, rows[i].label});
    } else {
      spans.back().end = i;
    }
  }
  return spans;
}

// At most ~2 points per pixel column inside a span.
std::string polyline(const std::vector<GridRow>& rows, const Span& s, const Axis& x, const Axis& y,
                     double (*value)(const GridRow&)) {
  const std::size_t count = s.end - s.begin + 1;
  const std::size_t budget = static_cast<std::size_t>(2.0 * (x(rows[s.end].t) - x(rows[s.begin].t))) + 2;
  const std::size_t stride = std::max<std::size_t>(1, count / budget);
  std::string pts;
  for (std::size_t i = s.begin; i <= s.end; i += stride) {
    pts += num(x(rows[i].t)) + "," + num(y(value(rows[i]))) + " ";
  }
  if ((count - 1) % stride != 0) pts += num(x(rows[s.end].t)) + "," + num(y(value(rows[s.end]))) + " ";
  if (!pts.empty()) pts.pop_back();
  return "<polyline fill=\"none\" stroke=\"" + std::string(label_color(s.label)) +
         "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_market_figure(const std::vector<GridRow>& rows) {
  const double height = kTop + 2 * kPanelHeight + kGap + 50;
  std::string out;
  header(out, height);
  if (rows.empty()) {
    out += "</svg>\n";
    return out;
  }
  const Axis x{rows.front().t, rows.back().t, kLeft, kWidth - kRight};
  long long pmin = rows.front().price, pmax = pmin;
  for (const auto& r : rows) {
    pmin = std::min(pmin, r.price);
    pmax = std::max(pmax, r.price);
  }
  const double top_a = kTop, bottom_a = kTop + kPanelHeight;
  const double top_b = bottom_a + kGap, bottom_b = top_b + kPanelHeight;
  const Axis ya{0.0, 1.0, bottom_a, top_a};
  const Axis yb{static_cast<double>(pmin), static_cast<double>(pmax), bottom_b, top_b};

  const auto spans = spans_of(rows);
  for (const auto& s : spans) {
    const double x0 = x(rows[s.begin].t);
    const double x1 = s.end + 1 < rows.size() ? x(rows[s.end + 1].t) : x(rows[s.end].t);
    for (auto [top, bottom] : {std::pair{top_a, bottom_a}, std::pair{top_b, bottom_b}}) {
      out += "<rect class=\"span\" x=\"" + num(x0) + "\" y=\"" + num(top) + "\" width=\"" + num(std::max(x1 - x0, 0.5)) +
             "\" height=\"" + num(bottom - top) + "\" fill=\"" + label_color(s.label) + "\" fill-opacity=\"0.12\"/>\n";
    }
  }
  for (const auto& s : spans) {
    out += polyline(rows, s, x, ya, [](const GridRow& r) { return r.eta_fraction; });
    out += polyline(rows, s, x, yb, [](const GridRow& r) { return static_cast<double>(r.price); });
  }
  frame(out, x, ya, "A: fraction of agents in group +1", "t (days)");
  frame(out, x, yb, "B: price S(t)", "t (days)");
  out += "</svg>\n";
  return out;
}

std::string render_hmm_figure(const std::vector<long long>& prices, const std::vector<int>& hidden,
                              const std::vector<int>& labels) {
  const double height = kTop + kPanelHeight + 50;
  std::string out;
  header(out, height);
  if (prices.empty()) {
    out += "</svg>\n";
    return out;
  }
  const double n = static_cast<double>(prices.size() - 1);
  const Axis x{0.0, n, kLeft, kWidth - kRight};
  const auto [lo, hi] = std::minmax_element(prices.begin(), prices.end());
  const Axis y{static_cast<double>(*lo), static_cast<double>(*hi), kTop + kPanelHeight, kTop};

  // Shade by the most frequent hidden state in each pixel column.
  const int columns = static_cast<int>(x.pixel_hi - x.pixel_lo);
  std::vector<int> column_state(columns, -1);
  if (!hidden.empty()) {
    for (int c = 0; c < columns; ++c) {
      const auto first = static_cast<std::size_t>(static_cast<double>(c) / columns * hidden.size());
      const auto last = std::max(first + 1, static_cast<std::size_t>(static_cast<double>(c + 1) / columns * hidden.size()));
      std::map<int, std::size_t> counts;
      for (std::size_t i = first; i < std::min(last, hidden.size()); ++i) ++counts[hidden[i]];
      std::size_t best = 0;
      for (const auto& [state, k] : counts) {
        if (k > best) {
          best = k;
          column_state[c] = state;
        }
      }
    }
  }
  for (int c = 0; c < columns;) {
    int d = c;
    while (d < columns && column_state[d] == column_state[c]) ++d;
    if (column_state[c] >= 0) {
      const int value = static_cast<std::size_t>(column_state[c]) < labels.size() ? labels[column_state[c]] : 99;
      out += "<rect class=\"span\" x=\"" + num(x.pixel_lo + c) + "\" y=\"" + num(y.pixel_hi) + "\" width=\"" +
             num(d - c) + "\" height=\"" + num(y.pixel_lo - y.pixel_hi) + "\" fill=\"" + value_color(value) +
             "\" fill-opacity=\"0.18\"/>\n";
    }
    c = d;
  }

  const std::size_t stride = std::max<std::size_t>(1, prices.size() / 4000);
  std::string pts;
  for (std::size_t i = 0; i < prices.size(); i += stride) {
    pts += num(x(static_cast<double>(i))) + "," + num(y(static_cast<double>(prices[i]))) + " ";
  }
  if ((prices.size() - 1) % stride != 0) pts += num(x(n)) + "," + num(y(static_cast<double>(prices.back()))) + " ";
  pts.pop_back();
  out += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
  frame(out, x, y, "Accumulated variation S_n", "n");
  out += "</svg>\n";
  return out;
}

}  // namespace metamarket
