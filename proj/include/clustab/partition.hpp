#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "clustab/embedding.hpp"

namespace clustab {

using Label = std::uint32_t;

/// Hard assignment of n items to k_declared clusters. Empty clusters are
/// allowed; labels align index-for-index with ids.
class Partition {
public:
  Partition(SharedIds ids, std::vector<Label> labels, std::size_t k_declared);
  Partition(IdList ids, std::vector<Label> labels, std::size_t k_declared);

  /// ids "0".."n-1"; convenient for metric tests.
  static Partition from_labels(std::vector<Label> labels, std::size_t k_declared);
  /// k_declared = max label + 1.
  static Partition from_labels(std::vector<Label> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t k_declared() const noexcept { return k_declared_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  Label label(std::size_t i) const { return labels_[i]; }
  const IdList& ids() const noexcept { return *ids_; }
  const SharedIds& shared_ids() const noexcept { return ids_; }

  /// Members per cluster, length k_declared.
  std::vector<std::size_t> cluster_sizes() const;
  std::size_t occupied_clusters() const;

  /// Indices of the items in `cluster`, ascending.
  std::vector<std::size_t> members(Label cluster) const;

  bool operator==(const Partition& other) const;

private:
  SharedIds ids_;
  std::vector<Label> labels_;
  std::size_t k_declared_;
};

/// Overlap counts between two aligned partitions: rows index a's clusters,
/// columns b's, both over declared cluster counts.
class ContingencyTable {
public:
  ContingencyTable(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint64_t count(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
  const std::vector<std::uint64_t>& row_sums() const noexcept { return row_sums_; }
  const std::vector<std::uint64_t>& col_sums() const noexcept { return col_sums_; }
  std::uint64_t total() const noexcept { return total_; }

  void add(std::size_t i, std::size_t j, std::uint64_t amount = 1);
  ContingencyTable transposed() const;

  bool operator==(const ContingencyTable&) const = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> row_sums_;
  std::vector<std::uint64_t> col_sums_;
  std::uint64_t total_ = 0;
};

/// Throws MismatchedItems unless a and b list the same ids in the same order.
void require_aligned(const Partition& a, const Partition& b);

ContingencyTable build_contingency(const Partition& a, const Partition& b);

/// Both partitions restricted to their shared ids, ordered as in a.
std::pair<Partition, Partition> intersect_partitions(const Partition& a, const Partition& b);

void save_partition_csv(const Partition& p, const std::filesystem::path& path);
Partition load_partition_csv(const std::filesystem::path& path, std::size_t k_declared);

}  // namespace clustab
