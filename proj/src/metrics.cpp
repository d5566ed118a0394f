#include "clustab/metrics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <iterator>

#include "clustab/error.hpp"
#include "json_util.hpp"

namespace clustab::metrics {
namespace {

// Sums in ascending order so that equal multisets of terms give equal bits
// regardless of the order clusters were enumerated in.
double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

double log_factorial(std::uint64_t x) {
  int sign = 0;
  return ::lgamma_r(static_cast<double>(x) + 1.0, &sign);
}

std::size_t occupied(const std::vector<std::uint64_t>& counts) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

}  // namespace

double entropy(const std::vector<std::uint64_t>& counts) {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) return 0.0;
  const double total = static_cast<double>(n);
  std::vector<double> terms;
  for (auto c : counts) {
    if (c == 0) continue;
    const double cd = static_cast<double>(c);
    terms.push_back((cd / total) * std::log(total / cd));
  }
  return std::max(0.0, canonical_sum(terms));
}

double entropy(const Partition& p) {
  const auto sizes = p.cluster_sizes();
  return entropy(std::vector<std::uint64_t>(sizes.begin(), sizes.end()));
}

double mutual_information(const ContingencyTable& t) {
  if (t.total() == 0) return 0.0;
  const std::uint64_t n = t.total();
  const double total = static_cast<double>(n);
  std::vector<double> terms;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const std::uint64_t c = t.count(i, j);
      if (c == 0) continue;
      const double ratio = static_cast<double>(n * c) /
                           static_cast<double>(t.row_sums()[i] * t.col_sums()[j]);
      terms.push_back((static_cast<double>(c) / total) * std::log(ratio));
    }
  }
  return std::max(0.0, canonical_sum(terms));
}

double expected_mutual_information(const ContingencyTable& t) {
  const std::uint64_t n = t.total();
  if (n == 0) return 0.0;
  const auto& a = t.row_sums();
  const auto& b = t.col_sums();
  if (occupied(a) <= 1 || occupied(b) <= 1) return 0.0;

  std::vector<double> lf(n + 1);
  for (std::uint64_t x = 0; x <= n; ++x) lf[x] = log_factorial(x);

  std::vector<std::pair<std::uint64_t, std::uint64_t>> cells;
  for (auto ai : a)
    for (auto bj : b)
      if (ai > 0 && bj > 0) cells.emplace_back(std::min(ai, bj), std::max(ai, bj));

  const double total = static_cast<double>(n);
  std::vector<double> cell_values(cells.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(cells.size()); ++cc) {
    const auto [lo, hi] = cells[static_cast<std::size_t>(cc)];
    const double base = lf[lo] + lf[hi] + lf[n - lo] + lf[n - hi] - lf[n];
    const double product = static_cast<double>(lo * hi);
    const std::uint64_t start = lo + hi > n ? std::max<std::uint64_t>(1, lo + hi - n) : 1;
    double sum = 0.0;
    for (std::uint64_t nij = start; nij <= lo; ++nij) {
      const double log_pmf = base - lf[nij] - lf[lo - nij] - lf[hi - nij] - lf[n - lo - hi + nij];
      const double log_ratio = std::log(static_cast<double>(n * nij) / product);
      sum += (static_cast<double>(nij) / total) * log_ratio * std::exp(log_pmf);
    }
    cell_values[static_cast<std::size_t>(cc)] = sum;
  }
  return canonical_sum(cell_values);
}

AmiReport ami(const ContingencyTable& t) {
  AmiReport r;
  r.h_u = entropy(t.row_sums());
  r.h_v = entropy(t.col_sums());
  const std::size_t ku = occupied(t.row_sums());
  const std::size_t kv = occupied(t.col_sums());
  if (ku <= 1 && kv <= 1) {
    r.ami = 1.0;
    return r;
  }
  if (ku <= 1 || kv <= 1) {
    r.ami = 0.0;
    return r;
  }
  r.mi = mutual_information(t);
  r.emi = expected_mutual_information(t);
  // All singletons on both sides: every relabeling is a perfect match, so
  // MI = EMI = H and the ratio is 0/0.
  if (ku == t.total() && kv == t.total()) {
    r.ami = 1.0;
    return r;
  }
  const double normalizer = (r.h_u + r.h_v) / 2.0;
  double denominator = normalizer - r.emi;
  denominator = denominator < 0.0 ? std::min(denominator, -DBL_EPSILON) : std::max(denominator, DBL_EPSILON);
  r.ami = (r.mi - r.emi) / denominator;
  return r;
}

AmiReport ami(const Partition& a, const Partition& b) { return ami(build_contingency(a, b)); }

StabilityBreakdown proportional_stability(const ContingencyTable& t, StabilityAverage mode) {
  StabilityBreakdown out;
  std::uint64_t overlap_total = 0;
  double ratio_sum = 0.0;
  for (std::size_t c = 0; c < t.cols(); ++c) {
    const std::uint64_t size = t.col_sums()[c];
    if (size == 0) continue;
    std::size_t parent = 0;
    std::uint64_t best = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (t.count(r, c) > best) {
        best = t.count(r, c);
        parent = r;
      }
    }
    const double ratio = static_cast<double>(best) / static_cast<double>(size);
    out.per_cluster.push_back({c, static_cast<std::size_t>(size), parent, static_cast<std::size_t>(best), ratio});
    ratio_sum += ratio;
    overlap_total += best;
  }
  if (out.per_cluster.empty()) {
    throw Error(ErrorCode::InvalidArgument, "current partition has no occupied clusters");
  }
  out.average = mode == StabilityAverage::ClusterWeighted
                    ? ratio_sum / static_cast<double>(out.per_cluster.size())
                    : static_cast<double>(overlap_total) / static_cast<double>(t.total());
  return out;
}

StabilityBreakdown proportional_stability(const Partition& current, const Partition& previous,
                                          StabilityAverage mode) {
  return proportional_stability(build_contingency(previous, current), mode);
}

std::string to_json(const AmiReport& r) { return detail::ami_json(r).dump(); }
std::string to_json(const StabilityBreakdown& s) { return detail::stability_json(s).dump(); }

}  // namespace clustab::metrics

namespace clustab::detail {

Json ami_json(const metrics::AmiReport& r) {
  Json j;
  j["mi"] = r.mi;
  j["emi"] = r.emi;
  j["entropy_u"] = r.h_u;
  j["entropy_v"] = r.h_v;
  j["ami"] = r.ami;
  return j;
}

Json stability_json(const metrics::StabilityBreakdown& s) {
  Json j;
  j["per_cluster"] = Json::array();
  for (const auto& c : s.per_cluster) {
    Json e;
    e["cluster"] = c.cluster;
    e["size"] = c.size;
    e["best_parent"] = c.best_parent;
    e["overlap"] = c.overlap;
    e["ratio"] = c.ratio;
    j["per_cluster"].push_back(std::move(e));
  }
  j["average"] = s.average;
  return j;
}

metrics::AmiReport ami_from_json(const Json& j) {
  return {j.at("mi").get<double>(), j.at("emi").get<double>(), j.at("entropy_u").get<double>(),
          j.at("entropy_v").get<double>(), j.at("ami").get<double>()};
}

metrics::StabilityBreakdown stability_from_json(const Json& j) {
  metrics::StabilityBreakdown s;
  for (const auto& e : j.at("per_cluster")) {
    s.per_cluster.push_back({e.at("cluster").get<std::size_t>(), e.at("size").get<std::size_t>(),
                             e.at("best_parent").get<std::size_t>(), e.at("overlap").get<std::size_t>(),
                             e.at("ratio").get<double>()});
  }
  s.average = j.at("average").get<double>();
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace clustab::detail
