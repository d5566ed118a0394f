#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "clustab/sankey.hpp"
#include "json_util.hpp"

namespace clustab::sankey {
namespace {

constexpr double kMargin = 30.0;
constexpr double kLabelSpace = 220.0;
constexpr double kNodeWidth = 14.0;
constexpr double kMaxGap = 8.0;

struct Rgb {
  double r, g, b;
};
constexpr Rgb kLow{33.0, 49.0, 140.0};    // dark blue
constexpr Rgb kHigh{253.0, 231.0, 37.0};  // light yellow

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// '<' only occurs inside JSON strings, where \u003c is equivalent and
// cannot open or close a tag.
std::string escape_script(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') {
      out += "\\u003c";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

struct Placed {
  double x = 0.0;
  double y = 0.0;
  double height = 0.0;
  double out_offset = 0.0;
  double in_offset = 0.0;
  std::string color;
};

}  // namespace

std::string stability_color(double stability) {
  const double t = std::clamp(std::isfinite(stability) ? stability : 0.0, 0.0, 1.0);
  auto channel = [t](double lo, double hi) {
    return static_cast<int>(std::lround(lo + (hi - lo) * t));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(kLow.r, kHigh.r), channel(kLow.g, kHigh.g),
                channel(kLow.b, kHigh.b));
  return buf;
}

std::string render_html(const SankeyGraph& g, const HtmlOptions& options) {
  std::map<std::size_t, std::vector<const Node*>> columns;
  for (const auto& n : g.nodes) columns[n.k].push_back(&n);

  std::size_t total = 0;
  std::size_t tallest = 1;
  if (!columns.empty()) {
    for (const auto* n : columns.begin()->second) total += n->size;
    for (const auto& [k, col] : columns) tallest = std::max(tallest, col.size());
  }
  const double usable = options.height - 2.0 * kMargin;
  const double gap = tallest > 1 ? std::min(kMaxGap, 0.3 * usable / static_cast<double>(tallest - 1)) : 0.0;
  const double scale =
      total > 0 ? (usable - gap * static_cast<double>(tallest - 1)) / static_cast<double>(total) : 0.0;
  const double span = options.width - 2.0 * kMargin - kLabelSpace - kNodeWidth;
  const double step = columns.size() > 1 ? span / static_cast<double>(columns.size() - 1) : 0.0;

  std::map<std::string, Placed> placed;
  std::size_t ci = 0;
  for (const auto& [k, col] : columns) {
    double y = kMargin;
    for (const auto* n : col) {
      Placed p;
      p.x = kMargin + step * static_cast<double>(ci);
      p.y = y;
      p.height = static_cast<double>(n->size) * scale;
      p.color = stability_color(n->stability);
      placed[n->id] = p;
      y += p.height + gap;
    }
    ++ci;
  }

  std::string svg;
  svg += "<svg class=\"sankey\" width=\"" + num(options.width) + "\" height=\"" + num(options.height) +
         "\" viewBox=\"0 0 " + num(options.width) + " " + num(options.height) + "\" data-scale=\"" +
         num(scale) + "\">\n";

  // Edges arrive grouped by source in column order; target-side stacking
  // follows source order, so offsets are assigned in a second pass.
  std::vector<std::pair<double, double>> ends(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto& src = placed[g.edges[e].source];
    const double width = static_cast<double>(g.edges[e].flow) * scale;
    ends[e].first = src.y + src.out_offset + width / 2.0;
    src.out_offset += width;
  }
  std::map<std::string, std::size_t> node_rank;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) node_rank[g.nodes[i].id] = i;
  std::vector<std::size_t> by_target(g.edges.size());
  for (std::size_t e = 0; e < by_target.size(); ++e) by_target[e] = e;
  std::stable_sort(by_target.begin(), by_target.end(), [&](std::size_t a, std::size_t b) {
    return node_rank[g.edges[a].source] < node_rank[g.edges[b].source];
  });
  for (std::size_t e : by_target) {
    auto& dst = placed[g.edges[e].target];
    const double width = static_cast<double>(g.edges[e].flow) * scale;
    ends[e].second = dst.y + dst.in_offset + width / 2.0;
    dst.in_offset += width;
  }

  svg += "<g class=\"ribbons\" fill=\"none\">\n";
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    const auto& src = placed[edge.source];
    const auto& dst = placed[edge.target];
    const double x0 = src.x + kNodeWidth;
    const double x1 = dst.x;
    const double xm = (x0 + x1) / 2.0;
    const double width = static_cast<double>(edge.flow) * scale;
    svg += "<path class=\"ribbon\" data-source=\"" + escape_xml(edge.source) + "\" data-target=\"" +
           escape_xml(edge.target) + "\" data-flow=\"" + std::to_string(edge.flow) + "\" d=\"M" + num(x0) +
           "," + num(ends[e].first) + " C" + num(xm) + "," + num(ends[e].first) + " " + num(xm) + "," +
           num(ends[e].second) + " " + num(x1) + "," + num(ends[e].second) + "\" stroke=\"" + src.color +
           "\" stroke-opacity=\"0.45\" stroke-width=\"" + num(width) + "\"><title>" +
           escape_xml(edge.source + " -> " + edge.target + ": " + std::to_string(edge.flow)) +
           "</title></path>\n";
  }
  svg += "</g>\n<g class=\"nodes\">\n";
  for (const auto& n : g.nodes) {
    const auto& p = placed[n.id];
    char stab[32];
    std::snprintf(stab, sizeof stab, "%.3f", n.stability);
    svg += "<rect class=\"node\" data-id=\"" + escape_xml(n.id) + "\" x=\"" + num(p.x) + "\" y=\"" +
           num(p.y) + "\" width=\"" + num(kNodeWidth) + "\" height=\"" + num(p.height) + "\" fill=\"" +
           p.color + "\"><title>" + escape_xml(n.label) + " (" + std::to_string(n.size) +
           " items, stability " + stab + ")</title></rect>\n";
    svg += "<text x=\"" + num(p.x + kNodeWidth + 4.0) + "\" y=\"" + num(p.y + p.height / 2.0) +
           "\" dominant-baseline=\"middle\">" + escape_xml(n.label) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";

  std::string html;
  html += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  html += "<title>Cluster transitions</title>\n<style>\n";
  html += "body { margin: 0; background: #ffffff; font-family: sans-serif; }\n";
  html += "svg.sankey text { font-size: 10px; fill: #222222; }\n";
  html += "rect.node { stroke: #333333; stroke-width: 0.5; }\n";
  html += "</style>\n</head>\n<body>\n";
  html += svg;
  html += "<script type=\"application/json\" id=\"graph-data\">\n" + escape_script(to_json(g)) + "</script>\n";
  html += "</body>\n</html>\n";
  return html;
}

void export_html(const SankeyGraph& g, const std::filesystem::path& path, const HtmlOptions& options) {
  detail::write_text(path, render_html(g, options));
}

}  // namespace clustab::sankey
