#include "clustab/partition.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "clustab/csv.hpp"
#include "clustab/error.hpp"

namespace clustab {

Partition::Partition(SharedIds ids, std::vector<Label> labels, std::size_t k_declared)
    : ids_(std::move(ids)), labels_(std::move(labels)), k_declared_(k_declared) {
  if (!ids_ || ids_->size() != labels_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "partition labels and ids differ in length");
  }
  if (labels_.empty()) throw Error(ErrorCode::InvalidArgument, "partition is empty");
  if (k_declared_ == 0) throw Error(ErrorCode::InvalidArgument, "partition declares zero clusters");
  for (auto l : labels_) {
    if (l >= k_declared_) {
      throw Error(ErrorCode::OutOfRange, "label " + std::to_string(l) + " outside [0, " +
                                             std::to_string(k_declared_) + ")");
    }
  }
}

Partition::Partition(IdList ids, std::vector<Label> labels, std::size_t k_declared)
    : Partition(std::make_shared<const IdList>(std::move(ids)), std::move(labels), k_declared) {}

Partition Partition::from_labels(std::vector<Label> labels, std::size_t k_declared) {
  IdList ids;
  ids.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) ids.push_back(std::to_string(i));
  return Partition(std::move(ids), std::move(labels), k_declared);
}

Partition Partition::from_labels(std::vector<Label> labels) {
  const std::size_t k =
      labels.empty() ? 1 : static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  return from_labels(std::move(labels), k);
}

std::vector<std::size_t> Partition::cluster_sizes() const {
  std::vector<std::size_t> sizes(k_declared_, 0);
  for (auto l : labels_) ++sizes[l];
  return sizes;
}

std::size_t Partition::occupied_clusters() const {
  const auto sizes = cluster_sizes();
  return static_cast<std::size_t>(std::count_if(sizes.begin(), sizes.end(), [](auto s) { return s > 0; }));
}

std::vector<std::size_t> Partition::members(Label cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == cluster) out.push_back(i);
  }
  return out;
}

bool Partition::operator==(const Partition& other) const {
  return k_declared_ == other.k_declared_ && labels_ == other.labels_ &&
         (ids_ == other.ids_ || *ids_ == *other.ids_);
}

ContingencyTable::ContingencyTable(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), counts_(rows * cols, 0), row_sums_(rows, 0), col_sums_(cols, 0) {}

void ContingencyTable::add(std::size_t i, std::size_t j, std::uint64_t amount) {
  counts_[i * cols_ + j] += amount;
  row_sums_[i] += amount;
  col_sums_[j] += amount;
  total_ += amount;
}

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (const auto c = count(i, j)) t.add(j, i, c);
  return t;
}

void require_aligned(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::MismatchedItems, "partitions cover " + std::to_string(a.size()) +
                                                " and " + std::to_string(b.size()) + " items");
  }
  if (a.shared_ids() == b.shared_ids()) return;
  const auto& ia = a.ids();
  const auto& ib = b.ids();
  for (std::size_t i = 0; i < ia.size(); ++i) {
    if (ia[i] != ib[i]) {
      throw Error(ErrorCode::MismatchedItems, "partitions disagree on item " + std::to_string(i) +
                                                  " ('" + ia[i] + "' vs '" + ib[i] + "')");
    }
  }
}

ContingencyTable build_contingency(const Partition& a, const Partition& b) {
  require_aligned(a, b);
  ContingencyTable t(a.k_declared(), b.k_declared());
  for (std::size_t i = 0; i < a.size(); ++i) t.add(a.label(i), b.label(i));
  return t;
}

std::pair<Partition, Partition> intersect_partitions(const Partition& a, const Partition& b) {
  if (a.shared_ids() == b.shared_ids()) return {a, b};
  std::unordered_map<std::string_view, std::size_t> index_b;
  index_b.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) index_b.emplace(b.ids()[i], i);

  IdList ids;
  std::vector<Label> la;
  std::vector<Label> lb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto it = index_b.find(a.ids()[i]);
    if (it == index_b.end()) continue;
    ids.push_back(a.ids()[i]);
    la.push_back(a.label(i));
    lb.push_back(b.label(it->second));
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyIntersection, "partitions share no ids");
  if (ids.size() == a.size() && ids.size() == b.size() && a.ids() == b.ids()) return {a, b};
  auto shared = std::make_shared<const IdList>(std::move(ids));
  return {Partition(shared, std::move(la), a.k_declared()),
          Partition(shared, std::move(lb), b.k_declared())};
}

void save_partition_csv(const Partition& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << "id,label\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << csv::escape(p.ids()[i]) << ',' << p.label(i) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

Partition load_partition_csv(const std::filesystem::path& path, std::size_t k_declared) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open partition file '" + path.string() + "'");
  std::size_t line = 0;
  auto header = csv::read_record(in, line);
  if (!header || header->size() != 2 || (*header)[0] != "id" || (*header)[1] != "label") {
    throw Error(ErrorCode::ParseError, "'" + path.string() + "' lacks the id,label header");
  }
  IdList ids;
  std::vector<Label> labels;
  while (auto rec = csv::read_record(in, line)) {
    if (rec->size() == 1 && rec->front().empty()) continue;
    const auto label = rec->size() == 2 ? csv::parse_int((*rec)[1]) : std::nullopt;
    if (!label || *label < 0) {
      throw Error(ErrorCode::ParseError, "malformed partition row at line " + std::to_string(line) +
                                             " of '" + path.string() + "'");
    }
    ids.push_back((*rec)[0]);
    labels.push_back(static_cast<Label>(*label));
  }
  return Partition(std::move(ids), std::move(labels), k_declared);
}

}  // namespace clustab
