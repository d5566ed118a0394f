#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "clustab/partition.hpp"

namespace clustab::metrics {

/// All information quantities are in nats.
struct AmiReport {
  double mi = 0.0;
  double emi = 0.0;
  double h_u = 0.0;
  double h_v = 0.0;
  double ami = 0.0;
};

struct ClusterStability {
  std::size_t cluster = 0;
  std::size_t size = 0;
  std::size_t best_parent = 0;
  std::size_t overlap = 0;
  double ratio = 0.0;
};

struct StabilityBreakdown {
  std::vector<ClusterStability> per_cluster;
  double average = 0.0;
};

enum class StabilityAverage {
  ClusterWeighted,  // mean of per-cluster ratios, the default
  ItemWeighted,     // total best overlap / n
};

double entropy(const Partition& p);
/// Entropy of a marginal count vector; zero counts contribute nothing.
double entropy(const std::vector<std::uint64_t>& counts);

double mutual_information(const ContingencyTable& t);

/// Expected MI under the permutation model with the table's marginals,
/// summed exactly over the hypergeometric support of every cell.
double expected_mutual_information(const ContingencyTable& t);

/// Adjusted MI with the arithmetic-mean normalizer.
AmiReport ami(const Partition& a, const Partition& b);
AmiReport ami(const ContingencyTable& t);

StabilityBreakdown proportional_stability(const Partition& current, const Partition& previous,
                                          StabilityAverage mode = StabilityAverage::ClusterWeighted);
/// Rows are clusters of the previous partition, columns of the current one.
StabilityBreakdown proportional_stability(const ContingencyTable& previous_by_current,
                                          StabilityAverage mode = StabilityAverage::ClusterWeighted);

std::string to_json(const AmiReport& r);
std::string to_json(const StabilityBreakdown& s);

}  // namespace clustab::metrics
