#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "clustab/embedding.hpp"
#include "clustab/gmm.hpp"
#include "clustab/metrics.hpp"
#include "clustab/partition.hpp"

namespace clustab::pipeline {

/// Comparison of the partition at k_current = k_previous + 1 against k_previous.
struct ConsecutiveMetrics {
  std::size_t k_previous = 0;
  std::size_t k_current = 0;
  metrics::AmiReport ami;
  metrics::StabilityBreakdown stability;
};

struct SweepResult {
  std::size_t k_min = 1;
  std::size_t k_max = 20;
  std::map<std::size_t, Partition> partitions;
  std::map<std::size_t, gmm::MixtureModel> models;
  std::vector<ConsecutiveMetrics> consecutive;

  const Partition& partition(std::size_t k) const;
};

/// Fits every K in [k_min, k_max] independently with the same base config.
SweepResult run_sweep(const EmbeddingMatrix& data, const gmm::GmmConfig& base, std::size_t k_min,
                      std::size_t k_max, const gmm::Fitter& fitter = gmm::default_fitter());

/// Rows: clusters at k; columns: clusters at k + 1.
ContingencyTable transition_counts(const SweepResult& result, std::size_t k);

std::vector<ConsecutiveMetrics> compute_consecutive(const std::map<std::size_t, Partition>& partitions);

std::string consecutive_metrics_json(const std::vector<ConsecutiveMetrics>& consecutive);

/// Writes partition_K.csv, model_K.json and consecutive_metrics.json into
/// `dir` (created if needed). config.json is written by the caller.
void write_archive(const SweepResult& result, const std::filesystem::path& dir);

/// Loads partitions (and models when present) from an archive directory and
/// recomputes the consecutive metrics.
SweepResult read_archive(const std::filesystem::path& dir);

std::filesystem::path partition_path(const std::filesystem::path& dir, std::size_t k);
std::filesystem::path model_path(const std::filesystem::path& dir, std::size_t k);

}  // namespace clustab::pipeline
