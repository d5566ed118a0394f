#include "clustab/gmm_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace clustab::gmm {
namespace {

constexpr std::size_t kColumnBlock = 16;

struct ComponentCache {
  std::vector<double> log_weight;
  std::vector<double> log_norm;
  std::vector<double> precision;  // k x d
};

ComponentCache make_cache(const MixtureModel& model) {
  const std::size_t k = model.k;
  const std::size_t d = model.d;
  ComponentCache c;
  c.log_weight.resize(k);
  c.log_norm.resize(k);
  c.precision.resize(k * d);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < k; ++j) {
    c.log_weight[j] = model.weights[j] > 0.0 ? std::log(model.weights[j])
                                             : -std::numeric_limits<double>::infinity();
    double log_det = 0.0;
    for (std::size_t m = 0; m < d; ++m) {
      const double v = model.variances(j, m);
      log_det += std::log(v);
      c.precision[j * d + m] = 1.0 / v;
    }
    c.log_norm[j] = -0.5 * (static_cast<double>(d) * log_two_pi + log_det);
  }
  return c;
}

}  // namespace

namespace kernels {

double e_step(const MixtureModel& model, const EmbeddingMatrix& data, RowMatrix& resp,
              std::vector<double>& row_ll) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t k = model.k;
  const ComponentCache cache = make_cache(model);
  resp = RowMatrix(n, k);
  row_ll.assign(n, 0.0);
  const double* means = model.means.data.data();
  const double* values = data.values().data();

#pragma omp parallel
  {
    std::vector<double> lp(k);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const double* x = values + i * d;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double* mu = means + j * d;
        const double* prec = cache.precision.data() + j * d;
        double q = 0.0;
        for (std::size_t m = 0; m < d; ++m) {
          const double diff = x[m] - mu[m];
          q += diff * diff * prec[m];
        }
        lp[j] = cache.log_weight[j] + cache.log_norm[j] - 0.5 * q;
        best = std::max(best, lp[j]);
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += std::exp(lp[j] - best);
      const double lse = best + std::log(sum);
      double* r = resp.data.data() + i * k;
      for (std::size_t j = 0; j < k; ++j) r[j] = std::exp(lp[j] - lse);
      row_ll[i] = lse;
    }
  }

  double total = 0.0;
  for (double v : row_ll) total += v;
  return total;
}

Moments moments(const RowMatrix& resp, const EmbeddingMatrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t k = resp.cols;
  Moments out{std::vector<double>(k, 0.0), RowMatrix(k, d), RowMatrix(k, d)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out.mass[j] += resp(i, j);

  const double* values = data.values().data();
  const std::size_t blocks = (d + kColumnBlock - 1) / kColumnBlock;

  // Each thread owns whole column blocks; within a block the sum over rows
  // runs in index order.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(blocks); ++bb) {
    const std::size_t m0 = static_cast<std::size_t>(bb) * kColumnBlock;
    const std::size_t m1 = std::min(d, m0 + kColumnBlock);
    const std::size_t width = m1 - m0;
    std::vector<double> acc(k * width, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = values + i * d + m0;
      for (std::size_t j = 0; j < k; ++j) {
        const double g = resp(i, j);
        if (g == 0.0) continue;
        double* a = acc.data() + j * width;
        for (std::size_t m = 0; m < width; ++m) a[m] += g * x[m];
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (out.mass[j] <= 0.0) continue;
      for (std::size_t m = 0; m < width; ++m) out.means(j, m0 + m) = acc[j * width + m] / out.mass[j];
    }
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = values + i * d + m0;
      for (std::size_t j = 0; j < k; ++j) {
        const double g = resp(i, j);
        if (g == 0.0) continue;
        const double* mu = out.means.data.data() + j * d + m0;
        double* a = acc.data() + j * width;
        for (std::size_t m = 0; m < width; ++m) {
          const double diff = x[m] - mu[m];
          a[m] += g * diff * diff;
        }
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (out.mass[j] <= 0.0) continue;
      for (std::size_t m = 0; m < width; ++m)
        out.variances(j, m0 + m) = acc[j * width + m] / out.mass[j];
    }
  }
  return out;
}

}  // namespace kernels
}  // namespace clustab::gmm
