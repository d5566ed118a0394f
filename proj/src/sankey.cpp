#include "clustab/sankey.hpp"

#include <algorithm>
#include <cmath>

#include "clustab/csv.hpp"
#include "clustab/error.hpp"
#include "json_util.hpp"

namespace clustab::sankey {

std::string node_id(std::size_t k, std::size_t cluster) {
  return "K" + std::to_string(k) + "-C" + std::to_string(cluster);
}

std::size_t resolve_threshold(const std::string& text, std::size_t n) {
  const auto body = csv::trim(text);
  auto fractional = [&](double f) {
    if (!(f >= 0.0) || f > 1.0) throw Error(ErrorCode::InvalidArgument, "threshold fraction outside [0, 1]");
    return static_cast<std::size_t>(std::ceil(f * static_cast<double>(n) - 1e-9));
  };
  if (!body.empty() && body.back() == '%') {
    const auto v = csv::parse_double(body.substr(0, body.size() - 1));
    if (!v) throw Error(ErrorCode::InvalidArgument, "malformed threshold '" + text + "'");
    return fractional(*v / 100.0);
  }
  if (const auto i = csv::parse_int(body)) {
    if (*i < 0) throw Error(ErrorCode::InvalidArgument, "threshold must be nonnegative");
    return static_cast<std::size_t>(*i);
  }
  const auto v = csv::parse_double(body);
  if (!v || *v >= 1.0) throw Error(ErrorCode::InvalidArgument, "malformed threshold '" + text + "'");
  return fractional(*v);
}

SankeyGraph build_graph(const pipeline::SweepResult& result, const NameMap* names,
                        std::size_t threshold) {
  if (result.partitions.size() < 2) {
    throw Error(ErrorCode::InsufficientResolutions, "a Sankey graph needs at least two resolutions");
  }
  SankeyGraph g;
  g.threshold = threshold;

  // Column order per resolution: descending size, then cluster index.
  std::map<std::size_t, std::vector<std::size_t>> order;
  for (const auto& [k, p] : result.partitions) {
    const auto sizes = p.cluster_sizes();
    std::vector<std::size_t> clusters;
    for (std::size_t c = 0; c < sizes.size(); ++c)
      if (sizes[c] > 0) clusters.push_back(c);
    std::stable_sort(clusters.begin(), clusters.end(),
                     [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    order[k] = clusters;

    const pipeline::ConsecutiveMetrics* link = nullptr;
    for (const auto& c : result.consecutive)
      if (c.k_current == k) link = &c;
    for (std::size_t c : clusters) {
      Node node;
      node.id = node_id(k, c);
      node.k = k;
      node.cluster = c;
      node.size = sizes[c];
      node.label = node.id;
      if (names) {
        if (const auto it = names->find({k, c}); it != names->end()) node.label = it->second;
      }
      if (link) {
        for (const auto& pc : link->stability.per_cluster)
          if (pc.cluster == c) node.stability = pc.ratio;
      }
      g.nodes.push_back(std::move(node));
    }
  }

  for (auto it = result.partitions.begin(); std::next(it) != result.partitions.end(); ++it) {
    const std::size_t k = it->first;
    const std::size_t k_next = std::next(it)->first;
    const auto table = build_contingency(it->second, std::next(it)->second);
    std::size_t dropped = 0;
    for (std::size_t src : order[k]) {
      for (std::size_t dst : order[k_next]) {
        const auto flow = static_cast<std::size_t>(table.count(src, dst));
        if (flow == 0) continue;
        if (flow < threshold) {
          dropped += flow;
          continue;
        }
        g.edges.push_back({node_id(k, src), node_id(k_next, dst), flow});
      }
    }
    g.dropped_flow.push_back({k, dropped});
  }
  return g;
}

std::string to_json(const SankeyGraph& g) {
  detail::Json j;
  j["version"] = 1;
  j["threshold"] = g.threshold;
  j["nodes"] = detail::Json::array();
  for (const auto& n : g.nodes) {
    detail::Json e;
    e["id"] = n.id;
    e["k"] = n.k;
    e["cluster"] = n.cluster;
    e["label"] = n.label;
    e["size"] = n.size;
    e["stability"] = n.stability;
    j["nodes"].push_back(std::move(e));
  }
  j["edges"] = detail::Json::array();
  for (const auto& e : g.edges) {
    detail::Json x;
    x["source"] = e.source;
    x["target"] = e.target;
    x["flow"] = e.flow;
    j["edges"].push_back(std::move(x));
  }
  j["dropped_flow"] = detail::Json::array();
  for (const auto& d : g.dropped_flow) {
    detail::Json x;
    x["k"] = d.k;
    x["items"] = d.items;
    j["dropped_flow"].push_back(std::move(x));
  }
  return j.dump(2) + "\n";
}

SankeyGraph from_json(const std::string& text) {
  try {
    const auto j = detail::Json::parse(text);
    if (j.at("version").get<int>() != 1) throw Error(ErrorCode::ParseError, "unsupported graph version");
    SankeyGraph g;
    g.threshold = j.at("threshold").get<std::size_t>();
    for (const auto& n : j.at("nodes")) {
      g.nodes.push_back({n.at("id").get<std::string>(), n.at("k").get<std::size_t>(),
                         n.at("cluster").get<std::size_t>(), n.at("label").get<std::string>(),
                         n.at("size").get<std::size_t>(), n.at("stability").get<double>()});
    }
    for (const auto& e : j.at("edges")) {
      g.edges.push_back({e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                         e.at("flow").get<std::size_t>()});
    }
    for (const auto& d : j.at("dropped_flow")) {
      g.dropped_flow.push_back({d.at("k").get<std::size_t>(), d.at("items").get<std::size_t>()});
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed graph JSON: ") + e.what());
  }
}

void export_json(const SankeyGraph& g, const std::filesystem::path& path) {
  detail::write_text(path, to_json(g));
}

SankeyGraph import_json(const std::filesystem::path& path) { return from_json(detail::read_text(path)); }

}  // namespace clustab::sankey
