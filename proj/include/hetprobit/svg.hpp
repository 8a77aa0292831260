#pragma once

// Static SVG figures: log-axis histograms with the better-than-reference
// bar in a left gutter (negative gaps have no place on a log axis), paired
// panels with shared scales for before/after comparisons, and a heatmap
// view of a profile grid with clipped cells called out.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "hetprobit/harness.hpp"

namespace hetprobit::svg {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

struct LogDomain {
  double lo = 0.0, hi = 1.0;  // log10 units
  long max_count = 1;
};

inline LogDomain domain_of(const LogHistogram& h) {
  LogDomain d;
  if (!h.bins.empty()) {
    d.lo = static_cast<double>(h.bins.begin()->first) * h.step;
    d.hi = static_cast<double>(h.bins.rbegin()->first + 1) * h.step;
  }
  d.max_count = std::max<long>(1, h.better_than_reference);
  for (const auto& [k, c] : h.bins) d.max_count = std::max(d.max_count, c);
  return d;
}

inline LogDomain merge(const LogDomain& a, const LogDomain& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi), std::max(a.max_count, b.max_count)};
}

// One histogram panel at the given origin. The gutter bar on the far left
// holds the better-than-reference count, set off by a dashed divider.
inline void panel(std::ostringstream& out, const LogHistogram& h, const LogDomain& dom,
                  double ox, double oy, double plot_w, double plot_h, const std::string& label,
                  const std::string& fill, double opacity) {
  const double gutter = 42.0;
  const double axis_w = plot_w - gutter;
  const double span = std::max(dom.hi - dom.lo, 1e-9);
  const auto xpos = [&](double log10v) { return ox + gutter + (log10v - dom.lo) / span * axis_w; };
  const auto bar_h = [&](long c) {
    return plot_h * static_cast<double>(c) / static_cast<double>(dom.max_count);
  };

  out << "<g data-xmin=\"" << fmt(dom.lo) << "\" data-xmax=\"" << fmt(dom.hi)
      << "\" data-ymax=\"" << dom.max_count << "\">\n";
  // frame and divider
  out << "<rect x=\"" << fmt(ox) << "\" y=\"" << fmt(oy) << "\" width=\"" << fmt(plot_w)
      << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<line x1=\"" << fmt(ox + gutter) << "\" y1=\"" << fmt(oy) << "\" x2=\""
      << fmt(ox + gutter) << "\" y2=\"" << fmt(oy + plot_h)
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";

  if (h.better_than_reference > 0) {
    const double bh = bar_h(h.better_than_reference);
    out << "<rect class=\"better\" x=\"" << fmt(ox + 6) << "\" y=\"" << fmt(oy + plot_h - bh)
        << "\" width=\"" << fmt(gutter - 12) << "\" height=\"" << fmt(bh)
        << "\" fill=\"#2a9d8f\" fill-opacity=\"" << fmt(opacity) << "\"/>\n";
  }
  for (const auto& [k, c] : h.bins) {
    const double x0 = xpos(static_cast<double>(k) * h.step);
    const double x1 = xpos(static_cast<double>(k + 1) * h.step);
    const double bh = bar_h(c);
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(oy + plot_h - bh) << "\" width=\""
        << fmt(std::max(x1 - x0, 0.5)) << "\" height=\"" << fmt(bh) << "\" fill=\"" << fill
        << "\" fill-opacity=\"" << fmt(opacity) << "\"/>\n";
  }
  // decade ticks
  for (long p = static_cast<long>(std::ceil(dom.lo)); p <= static_cast<long>(std::floor(dom.hi));
       ++p) {
    const double x = xpos(static_cast<double>(p));
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(oy + plot_h) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(oy + plot_h + 5) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(oy + plot_h + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">1e" << p << "</text>\n";
  }
  out << "<text x=\"" << fmt(ox + gutter / 2) << "\" y=\"" << fmt(oy + plot_h + 18)
      << "\" font-size=\"10\" text-anchor=\"middle\">better</text>\n";
  out << "<text x=\"" << fmt(ox + 4) << "\" y=\"" << fmt(oy - 6) << "\" font-size=\"12\">"
      << escape(label) << "</text>\n";
  // count axis: top tick only, plus zero
  out << "<text x=\"" << fmt(ox - 6) << "\" y=\"" << fmt(oy + 10)
      << "\" font-size=\"11\" text-anchor=\"end\">" << dom.max_count << "</text>\n";
  out << "<text x=\"" << fmt(ox - 6) << "\" y=\"" << fmt(oy + plot_h)
      << "\" font-size=\"11\" text-anchor=\"end\">0</text>\n";
  out << "</g>\n";
}

inline std::string document(double w, double h, const std::string& body) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
      << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << body;
  out << "</svg>\n";
  return out.str();
}

}  // namespace detail

inline std::string histogram_svg(const LogHistogram& h, const std::string& title,
                                 const std::string& x_label) {
  std::ostringstream body;
  const detail::LogDomain dom = detail::domain_of(h);
  body << "<text x=\"360\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">"
       << detail::escape(title) << "</text>\n";
  detail::panel(body, h, dom, 70, 45, 620, 320, x_label, "#457b9d", 1.0);
  return detail::document(720, 420, body.str());
}

// Two panels, one per histogram, drawn against the merged domain and count
// scale so the pair is visually commensurable.
inline std::string paired_histogram_svg(const LogHistogram& a, const std::string& label_a,
                                        const LogHistogram& b, const std::string& label_b,
                                        const std::string& title) {
  std::ostringstream body;
  const detail::LogDomain dom = detail::merge(detail::domain_of(a), detail::domain_of(b));
  body << "<text x=\"360\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">"
       << detail::escape(title) << "</text>\n";
  detail::panel(body, a, dom, 70, 50, 620, 260, label_a, "#457b9d", 1.0);
  detail::panel(body, b, dom, 70, 370, 620, 260, label_b, "#e07a5f", 1.0);
  return detail::document(720, 700, body.str());
}

inline std::string heatmap_svg(const ProfileGrid& g, const std::string& title) {
  const Eigen::Index na = g.axis1.size(), nb = g.axis2.size();
  double vmin = g.values.minCoeff(), vmax = g.values.maxCoeff();
  if (!(vmax > vmin)) vmax = vmin + 1.0;

  const double ox = 80, oy = 50, plot_w = 560, plot_h = 560;
  const double cw = plot_w / static_cast<double>(nb), ch = plot_h / static_cast<double>(na);
  std::ostringstream body;
  body << "<text x=\"360\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">"
       << detail::escape(title) << "</text>\n";
  body << "<g data-vmin=\"" << detail::fmt(vmin) << "\" data-vmax=\"" << detail::fmt(vmax)
       << "\">\n";
  for (Eigen::Index a = 0; a < na; ++a) {
    for (Eigen::Index b = 0; b < nb; ++b) {
      std::string fill;
      if (g.clipped(a, b)) {
        fill = "#d90429";  // below the floor
      } else {
        const double t = (g.values(a, b) - vmin) / (vmax - vmin);
        const int r = static_cast<int>(29 + t * (241 - 29));
        const int gg = static_cast<int>(53 + t * (250 - 53));
        const int bb = static_cast<int>(87 + t * (238 - 87));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, gg, bb);
        fill = buf;
      }
      // axis1 runs bottom-to-top
      body << "<rect x=\"" << detail::fmt(ox + static_cast<double>(b) * cw) << "\" y=\""
           << detail::fmt(oy + plot_h - static_cast<double>(a + 1) * ch) << "\" width=\""
           << detail::fmt(cw + 0.5) << "\" height=\"" << detail::fmt(ch + 0.5) << "\" fill=\""
           << fill << "\"/>\n";
    }
  }
  body << "</g>\n";
  body << "<rect x=\"" << detail::fmt(ox) << "\" y=\"" << detail::fmt(oy) << "\" width=\""
       << detail::fmt(plot_w) << "\" height=\"" << detail::fmt(plot_h)
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
  // corner labels for both axes
  body << "<text x=\"" << detail::fmt(ox) << "\" y=\"" << detail::fmt(oy + plot_h + 18)
       << "\" font-size=\"11\">" << detail::fmt(g.axis2[0]) << "</text>\n";
  body << "<text x=\"" << detail::fmt(ox + plot_w) << "\" y=\"" << detail::fmt(oy + plot_h + 18)
       << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(g.axis2[nb - 1])
       << "</text>\n";
  body << "<text x=\"" << detail::fmt(ox - 8) << "\" y=\"" << detail::fmt(oy + plot_h)
       << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(g.axis1[0]) << "</text>\n";
  body << "<text x=\"" << detail::fmt(ox - 8) << "\" y=\"" << detail::fmt(oy + 10)
       << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(g.axis1[na - 1])
       << "</text>\n";
  body << "<text x=\"" << detail::fmt(ox + plot_w / 2) << "\" y=\""
       << detail::fmt(oy + plot_h + 36) << "\" font-size=\"12\" text-anchor=\"middle\">gamma"
       << (g.j2 + 1) << "</text>\n";
  body << "<text x=\"20\" y=\"" << detail::fmt(oy + plot_h / 2) << "\" font-size=\"12\">gamma"
       << (g.j1 + 1) << "</text>\n";
  return detail::document(720, 680, body.str());
}

}  // namespace hetprobit::svg
