#include "clustab/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "clustab/error.hpp"
#include "clustab/gmm_kernels.hpp"
#include "clustab/kmeans.hpp"
#include "clustab/rng.hpp"

namespace clustab::gmm {
namespace {

double run_e_step(const MixtureModel& model, const EmbeddingMatrix& data, KernelPath path,
                  RowMatrix& resp, std::vector<double>& row_ll) {
  return path == KernelPath::Parallel ? kernels::e_step(model, data, resp, row_ll)
                                      : reference::e_step(model, data, resp, row_ll);
}

void require_dims(const MixtureModel& model, const EmbeddingMatrix& data) {
  if (model.d != data.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "model has " + std::to_string(model.d) +
                                                  " dimensions, data has " +
                                                  std::to_string(data.cols()));
  }
}

/// Biased per-column variance of the whole data set.
std::vector<double> global_variance(const EmbeddingMatrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::vector<double> mean(d, 0.0);
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t m = 0; m < d; ++m) mean[m] += data.at(i, m);
  for (auto& v : mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t m = 0; m < d; ++m) {
      const double diff = data.at(i, m) - mean[m];
      var[m] += diff * diff;
    }
  for (auto& v : var) v /= static_cast<double>(n);
  return var;
}

void reseed_empty(MixtureModel& model, const std::vector<double>& mass,
                  const EmbeddingMatrix& data, double reg_covar, KernelPath path) {
  const std::size_t n = data.rows();
  const double floor_mass = 1e-10 * static_cast<double>(n);
  std::vector<std::size_t> empty;
  for (std::size_t j = 0; j < model.k; ++j)
    if (mass[j] < floor_mass) empty.push_back(j);
  if (empty.empty()) return;

  // Density of every point under the surviving components.
  MixtureModel alive;
  alive.d = model.d;
  alive.means = RowMatrix(0, model.d);
  alive.variances = RowMatrix(0, model.d);
  double alive_weight = 0.0;
  for (std::size_t j = 0; j < model.k; ++j) {
    if (mass[j] < floor_mass) continue;
    alive.weights.push_back(model.weights[j]);
    alive_weight += model.weights[j];
    const auto mu = model.means.row(j);
    const auto var = model.variances.row(j);
    alive.means.data.insert(alive.means.data.end(), mu.begin(), mu.end());
    alive.variances.data.insert(alive.variances.data.end(), var.begin(), var.end());
  }
  alive.k = alive.weights.size();
  alive.means.rows = alive.variances.rows = alive.k;

  std::vector<double> row_ll;
  if (alive.k > 0) {
    for (auto& w : alive.weights) w /= alive_weight;
    RowMatrix scratch;
    run_e_step(alive, data, path, scratch, row_ll);
  } else {
    row_ll.assign(n, 0.0);
  }

  std::vector<bool> taken(n, false);
  const auto global = global_variance(data);
  for (std::size_t j : empty) {
    std::size_t arg = n;
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i] && (arg == n || row_ll[i] < low)) {
        low = row_ll[i];
        arg = i;
      }
    }
    if (arg == n) arg = 0;
    taken[arg] = true;
    const auto x = data.row(arg);
    for (std::size_t m = 0; m < model.d; ++m) {
      model.means(j, m) = x[m];
      model.variances(j, m) = global[m] + reg_covar;
    }
    model.weights[j] = 1.0 / static_cast<double>(n);
  }
  double total = 0.0;
  for (double w : model.weights) total += w;
  for (auto& w : model.weights) w /= total;
}

struct EmRun {
  MixtureModel model;
  RowMatrix resp;
};

EmRun run_em(MixtureModel model, const EmbeddingMatrix& data, const GmmConfig& config,
             KernelPath path) {
  const double n = static_cast<double>(data.rows());
  RowMatrix resp;
  std::vector<double> row_ll;
  double ll = run_e_step(model, data, path, resp, row_ll);
  if (!std::isfinite(ll)) throw Error(ErrorCode::Numeric, "non-finite log-likelihood after initialization");
  model.log_likelihood_trace = {ll};
  model.converged = false;
  model.n_iter = 0;
  double previous = ll / n;
  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    MixtureModel next = m_step(Responsibilities{std::move(resp)}, data, config.reg_covar, path);
    next.log_likelihood_trace = std::move(model.log_likelihood_trace);
    model = std::move(next);
    ll = run_e_step(model, data, path, resp, row_ll);
    if (!std::isfinite(ll)) {
      throw Error(ErrorCode::Numeric, "non-finite log-likelihood at iteration " + std::to_string(iter));
    }
    model.log_likelihood_trace.push_back(ll);
    model.n_iter = iter;
    const double current = ll / n;
    if (std::abs(current - previous) < config.tol) {
      model.converged = true;
      break;
    }
    previous = current;
  }
  model.final_log_likelihood = ll;
  model.config = config;
  return {std::move(model), std::move(resp)};
}

MixtureModel initialize(const EmbeddingMatrix& data, const GmmConfig& config, Rng& rng,
                        KernelPath path) {
  const std::size_t n = data.rows();
  const std::size_t k = config.k;
  RowMatrix resp(n, k);
  if (config.init == InitMethod::KMeans) {
    const auto labels = kmeans::cluster(data, k, rng);
    for (std::size_t i = 0; i < n; ++i) resp(i, labels[i]) = 1.0;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += resp(i, j) = rng.uniform() + 1e-12;
      for (std::size_t j = 0; j < k; ++j) resp(i, j) /= sum;
    }
  }
  return m_step(Responsibilities{std::move(resp)}, data, config.reg_covar, path);
}

}  // namespace

std::string to_string(InitMethod method) {
  return method == InitMethod::KMeans ? "kmeans" : "random-responsibility";
}

InitMethod parse_init_method(const std::string& name) {
  if (name == "kmeans") return InitMethod::KMeans;
  if (name == "random-responsibility" || name == "random") return InitMethod::RandomResponsibility;
  throw Error(ErrorCode::InvalidArgument, "unknown init method '" + name + "'");
}

void GmmConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (!(reg_covar > 0.0)) throw Error(ErrorCode::InvalidArgument, "reg_covar must be positive");
  if (n_init < 1) throw Error(ErrorCode::InvalidArgument, "n_init must be at least 1");
}

double log_density_diag(std::span<const double> x, std::span<const double> mean,
                        std::span<const double> variance) {
  const double two_pi = 2.0 * std::numbers::pi;
  double s = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double diff = x[m] - mean[m];
    s += std::log(two_pi * variance[m]) + diff * diff / variance[m];
  }
  return -0.5 * s;
}

EStepResult e_step(const MixtureModel& model, const EmbeddingMatrix& data, KernelPath path) {
  require_dims(model, data);
  EStepResult out;
  std::vector<double> row_ll;
  out.log_likelihood = run_e_step(model, data, path, out.resp.prob, row_ll);
  return out;
}

MixtureModel m_step(const Responsibilities& resp, const EmbeddingMatrix& data, double reg_covar,
                    KernelPath path) {
  if (resp.prob.rows != data.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "responsibilities cover " +
                                                  std::to_string(resp.prob.rows) + " rows, data " +
                                                  std::to_string(data.rows()));
  }
  Moments mom = path == KernelPath::Parallel ? kernels::moments(resp.prob, data)
                                             : reference::moments(resp.prob, data);
  MixtureModel model;
  model.k = resp.prob.cols;
  model.d = data.cols();
  model.weights.resize(model.k);
  const double n = static_cast<double>(data.rows());
  for (std::size_t j = 0; j < model.k; ++j) model.weights[j] = mom.mass[j] / n;
  model.means = std::move(mom.means);
  model.variances = std::move(mom.variances);
  for (auto& v : model.variances.data) v += reg_covar;
  reseed_empty(model, mom.mass, data, reg_covar, path);
  return model;
}

std::vector<Label> hard_labels(const Responsibilities& resp) {
  const auto& p = resp.prob;
  std::vector<Label> labels(p.rows, 0);
  for (std::size_t i = 0; i < p.rows; ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < p.cols; ++j)
      if (p(i, j) > p(i, arg)) arg = j;
    labels[i] = static_cast<Label>(arg);
  }
  return labels;
}

FitResult fit(const EmbeddingMatrix& data, const GmmConfig& config, KernelPath path) {
  config.validate();
  if (data.rows() < config.k) {
    throw Error(ErrorCode::InsufficientData, "cannot fit " + std::to_string(config.k) +
                                                 " components to " + std::to_string(data.rows()) +
                                                 " items");
  }
  Rng rng(config.seed);
  std::optional<EmRun> best;
  for (std::size_t attempt = 0; attempt < config.n_init; ++attempt) {
    EmRun run = run_em(initialize(data, config, rng, path), data, config, path);
    if (!best || run.model.final_log_likelihood > best->model.final_log_likelihood) best = std::move(run);
  }
  auto labels = hard_labels(Responsibilities{std::move(best->resp)});
  return {std::move(best->model), Partition(data.shared_ids(), std::move(labels), config.k)};
}

Partition predict(const MixtureModel& model, const EmbeddingMatrix& data) {
  auto e = e_step(model, data);
  return Partition(data.shared_ids(), hard_labels(e.resp), model.k);
}

Fitter default_fitter() {
  return [](const EmbeddingMatrix& data, const GmmConfig& config) { return fit(data, config); };
}

}  // namespace clustab::gmm
