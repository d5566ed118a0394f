#include <algorithm>
#include <cmath>
#include <limits>

#include "clustab/gmm_kernels.hpp"

namespace clustab::gmm::reference {

double e_step(const MixtureModel& model, const EmbeddingMatrix& data, RowMatrix& resp,
              std::vector<double>& row_ll) {
  const std::size_t n = data.rows();
  const std::size_t k = model.k;
  resp = RowMatrix(n, k);
  row_ll.assign(n, 0.0);
  std::vector<double> lp(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      lp[j] = std::log(model.weights[j]) +
              log_density_diag(data.row(i), model.means.row(j), model.variances.row(j));
    }
    const double best = *std::max_element(lp.begin(), lp.end());
    double sum = 0.0;
    for (double v : lp) sum += std::exp(v - best);
    const double lse = best + std::log(sum);
    for (std::size_t j = 0; j < k; ++j) resp(i, j) = std::exp(lp[j] - lse);
    row_ll[i] = lse;
    total += lse;
  }
  return total;
}

Moments moments(const RowMatrix& resp, const EmbeddingMatrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t k = resp.cols;
  Moments out{std::vector<double>(k, 0.0), RowMatrix(k, d), RowMatrix(k, d)};
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) out.mass[j] += resp(i, j);
    if (out.mass[j] <= 0.0) continue;
    for (std::size_t m = 0; m < d; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += resp(i, j) * data.at(i, m);
      out.means(j, m) = s / out.mass[j];
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = data.at(i, m) - out.means(j, m);
        v += resp(i, j) * diff * diff;
      }
      out.variances(j, m) = v / out.mass[j];
    }
  }
  return out;
}

}  // namespace clustab::gmm::reference
