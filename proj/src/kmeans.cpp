#include "clustab/kmeans.hpp"

#include <cmath>
#include <limits>

namespace clustab::kmeans {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    const double diff = a[m] - b[m];
    s += diff * diff;
  }
  return s;
}

}  // namespace

RowMatrix seed_plus_plus(const EmbeddingMatrix& data, std::size_t k, Rng& rng) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  RowMatrix centers(k, d);
  auto place = [&](std::size_t c, std::size_t row) {
    const auto x = data.row(row);
    std::copy(x.begin(), x.end(), centers.row(c).begin());
  };

  // Squared distance of every row to its nearest chosen center.
  std::vector<double> nearest(n);
  auto distances_to = [&](std::size_t row, std::vector<double>& out) {
    const auto c = data.row(row);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      out[i] = std::min(nearest[i], squared_distance(data.row(i), c));
    }
  };
  auto ordered_sum = [](const std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) total += x;
    return total;
  };

  const std::size_t first = rng.index(n);
  place(0, first);
  std::fill(nearest.begin(), nearest.end(), std::numeric_limits<double>::infinity());
  distances_to(first, nearest);
  double potential = ordered_sum(nearest);

  // Greedy variant: several D^2-weighted candidates per step, keeping the
  // one that lowers the potential most.
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<double> trial(n), best_trial(n);
  for (std::size_t c = 1; c < k; ++c) {
    std::size_t best_row = n;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      std::size_t candidate = n - 1;
      if (potential > 0.0) {
        const double target = rng.uniform() * potential;
        double running = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          running += nearest[i];
          if (running > target && nearest[i] > 0.0) {
            candidate = i;
            break;
          }
        }
      } else {
        // Every point coincides with a chosen center.
        candidate = rng.index(n);
      }
      distances_to(candidate, trial);
      const double p = ordered_sum(trial);
      if (p < best_potential) {
        best_potential = p;
        best_row = candidate;
        best_trial.swap(trial);
      }
    }
    place(c, best_row);
    nearest.swap(best_trial);
    potential = best_potential;
  }
  return centers;
}

std::vector<Label> assign(const EmbeddingMatrix& data, const RowMatrix& centers) {
  const std::size_t n = data.rows();
  std::vector<Label> labels(n, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double best = std::numeric_limits<double>::infinity();
    Label arg = 0;
    for (std::size_t c = 0; c < centers.rows; ++c) {
      const double dist = squared_distance(data.row(i), centers.row(c));
      if (dist < best) {
        best = dist;
        arg = static_cast<Label>(c);
      }
    }
    labels[i] = arg;
  }
  return labels;
}

std::vector<Label> cluster(const EmbeddingMatrix& data, std::size_t k, Rng& rng,
                           std::size_t max_lloyd) {
  RowMatrix centers = seed_plus_plus(data, k, rng);
  std::vector<Label> labels = assign(data, centers);
  const std::size_t d = data.cols();
  for (std::size_t iter = 0; iter < max_lloyd; ++iter) {
    RowMatrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const auto x = data.row(i);
      auto s = sums.row(labels[i]);
      for (std::size_t m = 0; m < d; ++m) s[m] += x[m];
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t m = 0; m < d; ++m) centers(c, m) = sums(c, m) / static_cast<double>(counts[c]);
    }
    auto next = assign(data, centers);
    const bool stable = next == labels;
    labels = std::move(next);
    if (stable) break;
  }
  return labels;
}

}  // namespace clustab::kmeans
