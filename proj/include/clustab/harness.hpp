#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "clustab/embedding.hpp"
#include "clustab/gmm.hpp"
#include "clustab/matrix.hpp"
#include "clustab/partition.hpp"

namespace clustab::harness {

enum class PerturbationKind { DimensionSubsample, RowSubsample, SeedVariation };

std::string to_string(PerturbationKind kind);
PerturbationKind parse_kind(const std::string& name);

/// How a row-subsample fit is compared with the full-data reference.
enum class RowComparison {
  Restrict,  // reference restricted to the sampled ids
  Predict,   // subsample model predicts every row, compared over all ids
};

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::DimensionSubsample;
  double fraction = 0.8;
  std::size_t repetitions = 100;
  std::uint64_t seed_first = 1;  // seed_variation only, inclusive range
  std::uint64_t seed_last = 100;
  std::uint64_t master_seed = 0;
  RowComparison row_compare = RowComparison::Restrict;

  /// Number of perturbed fits per K this spec produces.
  std::size_t draws() const;
  void validate(const EmbeddingMatrix& data, std::size_t k_max) const;
};

struct KRange {
  std::size_t min = 1;
  std::size_t max = 20;
};

struct StabilityCurve {
  PerturbationKind kind = PerturbationKind::DimensionSubsample;
  std::vector<std::size_t> k_values;
  std::vector<double> mean_ami;
  std::vector<double> std_ami;  // population standard deviation
  RowMatrix per_rep;            // draws x K
};

using ReferenceSet = std::map<std::size_t, Partition>;

struct HarnessOptions {
  gmm::Fitter fitter = gmm::default_fitter();
  /// Worker threads for repetitions; 0 leaves the OpenMP default.
  int jobs = 0;
  /// Precomputed full-data partitions per K; fitted when absent.
  const ReferenceSet* references = nullptr;
};

/// Full-data fits with the base config, one per K.
ReferenceSet fit_references(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                            const gmm::Fitter& fitter = gmm::default_fitter());

StabilityCurve dimension_stability(const EmbeddingMatrix& data, const gmm::GmmConfig& base,
                                   KRange range, const PerturbationSpec& spec,
                                   const HarnessOptions& options = {});
StabilityCurve row_stability(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                             const PerturbationSpec& spec, const HarnessOptions& options = {});
StabilityCurve seed_stability(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                              const PerturbationSpec& spec, const HarnessOptions& options = {});

/// Dispatches on spec.kind.
StabilityCurve run_protocol(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                            const PerturbationSpec& spec, const HarnessOptions& options = {});

std::string curve_csv(const StabilityCurve& curve);
std::string curve_per_rep_csv(const StabilityCurve& curve);
std::string curve_json(const StabilityCurve& curve);
/// x = K with mean/std columns per curve, for external plotting.
std::string combined_csv(const std::vector<StabilityCurve>& curves);

}  // namespace clustab::harness
