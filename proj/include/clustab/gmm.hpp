#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clustab/embedding.hpp"
#include "clustab/matrix.hpp"
#include "clustab/partition.hpp"

namespace clustab::gmm {

enum class InitMethod { KMeans, RandomResponsibility };

std::string to_string(InitMethod method);
InitMethod parse_init_method(const std::string& name);

/// Diagonal covariance is the only supported form.
struct GmmConfig {
  std::size_t k = 1;
  std::size_t max_iter = 2000;
  double tol = 1e-3;
  double reg_covar = 1e-6;
  std::uint64_t seed = 0;
  std::size_t n_init = 1;
  InitMethod init = InitMethod::KMeans;

  void validate() const;
  bool operator==(const GmmConfig&) const = default;
};

struct MixtureModel {
  std::size_t k = 0;
  std::size_t d = 0;
  std::vector<double> weights;
  RowMatrix means;      // k x d
  RowMatrix variances;  // k x d, diagonal of each covariance
  bool converged = false;
  std::size_t n_iter = 0;
  double final_log_likelihood = 0.0;
  /// Total log-likelihood after initialization and after every EM iteration.
  std::vector<double> log_likelihood_trace;
  GmmConfig config;
};

/// n x k posterior membership probabilities.
struct Responsibilities {
  RowMatrix prob;
};

struct EStepResult {
  Responsibilities resp;
  double log_likelihood = 0.0;
};

struct FitResult {
  MixtureModel model;
  Partition partition;
};

/// Selects the kernel implementation; Reference is the serial textbook
/// version kept to check the parallel one.
enum class KernelPath { Parallel, Reference };

/// log N(x | mean, diag(variance)).
double log_density_diag(std::span<const double> x, std::span<const double> mean,
                        std::span<const double> variance);

EStepResult e_step(const MixtureModel& model, const EmbeddingMatrix& data,
                   KernelPath path = KernelPath::Parallel);

/// Maximum-likelihood update from soft assignments. Components whose total
/// responsibility falls below 1e-10 n are reseeded at the least likely point.
MixtureModel m_step(const Responsibilities& resp, const EmbeddingMatrix& data, double reg_covar,
                    KernelPath path = KernelPath::Parallel);

FitResult fit(const EmbeddingMatrix& data, const GmmConfig& config,
              KernelPath path = KernelPath::Parallel);

Partition predict(const MixtureModel& model, const EmbeddingMatrix& data);

/// Row-wise argmax, lowest component index on ties.
std::vector<Label> hard_labels(const Responsibilities& resp);

/// Signature of anything that can stand in for fit (used to count calls).
using Fitter = std::function<FitResult(const EmbeddingMatrix&, const GmmConfig&)>;
Fitter default_fitter();

std::string model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const std::string& text);

}  // namespace clustab::gmm
