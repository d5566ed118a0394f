#include "clustab/pipeline.hpp"

#include <regex>

#include "clustab/error.hpp"
#include "json_util.hpp"

namespace clustab::pipeline {

const Partition& SweepResult::partition(std::size_t k) const {
  const auto it = partitions.find(k);
  if (it == partitions.end()) {
    throw Error(ErrorCode::OutOfRange, "no partition for K=" + std::to_string(k));
  }
  return it->second;
}

std::vector<ConsecutiveMetrics> compute_consecutive(const std::map<std::size_t, Partition>& partitions) {
  std::vector<ConsecutiveMetrics> out;
  for (auto it = partitions.begin(); it != partitions.end(); ++it) {
    const auto next = std::next(it);
    if (next == partitions.end()) break;
    const auto table = build_contingency(it->second, next->second);
    out.push_back({it->first, next->first, metrics::ami(table), metrics::proportional_stability(table)});
  }
  return out;
}

SweepResult run_sweep(const EmbeddingMatrix& data, const gmm::GmmConfig& base, std::size_t k_min,
                      std::size_t k_max, const gmm::Fitter& fitter) {
  if (k_min < 1) throw Error(ErrorCode::InvalidArgument, "k_min must be at least 1");
  if (k_max < k_min) throw Error(ErrorCode::InvalidArgument, "k_max must be >= k_min");
  if (data.rows() < k_max) {
    throw Error(ErrorCode::InsufficientData, "sweep to K=" + std::to_string(k_max) + " needs at least " +
                                                 std::to_string(k_max) + " items");
  }
  SweepResult result;
  result.k_min = k_min;
  result.k_max = k_max;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    gmm::GmmConfig config = base;
    config.k = k;
    try {
      auto fitted = fitter(data, config);
      result.partitions.emplace(k, std::move(fitted.partition));
      result.models.emplace(k, std::move(fitted.model));
    } catch (const Error& e) {
      throw e.with_context("K=" + std::to_string(k));
    }
  }
  result.consecutive = compute_consecutive(result.partitions);
  return result;
}

ContingencyTable transition_counts(const SweepResult& result, std::size_t k) {
  if (k < result.k_min || k + 1 > result.k_max) {
    throw Error(ErrorCode::OutOfRange, "transition " + std::to_string(k) + "->" + std::to_string(k + 1) +
                                           " outside sweep [" + std::to_string(result.k_min) + ", " +
                                           std::to_string(result.k_max) + "]");
  }
  return build_contingency(result.partition(k), result.partition(k + 1));
}

std::string consecutive_metrics_json(const std::vector<ConsecutiveMetrics>& consecutive) {
  detail::Json j = detail::Json::array();
  for (const auto& c : consecutive) {
    detail::Json e;
    e["k_previous"] = c.k_previous;
    e["k_current"] = c.k_current;
    e["ami"] = detail::ami_json(c.ami);
    e["stability"] = detail::stability_json(c.stability);
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::filesystem::path partition_path(const std::filesystem::path& dir, std::size_t k) {
  return dir / ("partition_" + std::to_string(k) + ".csv");
}

std::filesystem::path model_path(const std::filesystem::path& dir, std::size_t k) {
  return dir / ("model_" + std::to_string(k) + ".json");
}

void write_archive(const SweepResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& [k, p] : result.partitions) save_partition_csv(p, partition_path(dir, k));
  for (const auto& [k, m] : result.models) detail::write_text(model_path(dir, k), gmm::model_to_json(m));
  detail::write_text(dir / "consecutive_metrics.json", consecutive_metrics_json(result.consecutive));
}

SweepResult read_archive(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::Io, "sweep archive '" + dir.string() + "' does not exist");
  }
  static const std::regex pattern(R"(partition_(\d+)\.csv)");
  std::vector<std::size_t> ks;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) ks.push_back(std::stoul(m[1].str()));
  }
  if (ks.empty()) throw Error(ErrorCode::Io, "no partition files in '" + dir.string() + "'");
  std::sort(ks.begin(), ks.end());
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] != ks[i - 1] + 1) throw Error(ErrorCode::ParseError, "archive K values are not contiguous");
  }

  SweepResult result;
  result.k_min = ks.front();
  result.k_max = ks.back();
  SharedIds shared;
  for (std::size_t k : ks) {
    Partition p = load_partition_csv(partition_path(dir, k), k);
    if (!shared) {
      shared = p.shared_ids();
    } else if (p.ids() != *shared) {
      throw Error(ErrorCode::MismatchedItems, "partition_" + std::to_string(k) + ".csv covers different ids");
    } else {
      p = Partition(shared, p.labels(), k);
    }
    result.partitions.emplace(k, std::move(p));
    const auto mp = model_path(dir, k);
    if (std::filesystem::exists(mp)) result.models.emplace(k, gmm::model_from_json(detail::read_text(mp)));
  }
  result.consecutive = compute_consecutive(result.partitions);
  return result;
}

}  // namespace clustab::pipeline
