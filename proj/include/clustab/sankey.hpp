#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clustab/pipeline.hpp"

namespace clustab::sankey {

struct Node {
  std::string id;  // "K{k}-C{cluster}"
  std::size_t k = 0;
  std::size_t cluster = 0;
  std::string label;
  std::size_t size = 0;
  double stability = 1.0;  // proportional-stability ratio against k - 1

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string source;
  std::string target;
  std::size_t flow = 0;

  bool operator==(const Edge&) const = default;
};

/// Items moving from resolution k to k + 1 along edges below the threshold.
struct DroppedFlow {
  std::size_t k = 0;
  std::size_t items = 0;

  bool operator==(const DroppedFlow&) const = default;
};

struct SankeyGraph {
  std::size_t threshold = 150;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<DroppedFlow> dropped_flow;

  bool operator==(const SankeyGraph&) const = default;
};

/// (k, cluster) -> display name.
using NameMap = std::map<std::pair<std::size_t, std::size_t>, std::string>;

std::string node_id(std::size_t k, std::size_t cluster);

/// Accepts an absolute count ("150"), a percentage ("0.5%") or a fraction
/// below one ("0.005"); fractional forms round up against n.
std::size_t resolve_threshold(const std::string& text, std::size_t n);

/// One node per occupied cluster, ordered by k, then descending size, then
/// cluster index. Edges with flow below `threshold` are dropped and tallied.
SankeyGraph build_graph(const pipeline::SweepResult& result, const NameMap* names,
                        std::size_t threshold);

std::string to_json(const SankeyGraph& g);
SankeyGraph from_json(const std::string& text);
void export_json(const SankeyGraph& g, const std::filesystem::path& path);
SankeyGraph import_json(const std::filesystem::path& path);

/// Two-color ramp, dark blue at 0 to light yellow at 1, as "#rrggbb".
std::string stability_color(double stability);

struct HtmlOptions {
  double width = 1400.0;
  double height = 900.0;
};

/// Self-contained document: inline SVG plus the graph JSON; nothing is
/// fetched at view time.
std::string render_html(const SankeyGraph& g, const HtmlOptions& options = {});
void export_html(const SankeyGraph& g, const std::filesystem::path& path,
                 const HtmlOptions& options = {});

}  // namespace clustab::sankey
