#pragma once

#include <vector>

#include "clustab/embedding.hpp"
#include "clustab/gmm.hpp"
#include "clustab/matrix.hpp"

// Inner loops of EM. Both namespaces implement the same contract; the
// parallel versions split rows (E-step) or column blocks (M-step) across
// OpenMP threads and keep every floating-point reduction in a fixed order,
// so results do not depend on the thread count.

namespace clustab::gmm {

/// Output of the sufficient-statistics pass shared by both kernel paths.
struct Moments {
  std::vector<double> mass;  // N_j
  RowMatrix means;           // weighted means, rows with N_j == 0 left at 0
  RowMatrix variances;       // biased weighted variances, no floor added
};

namespace kernels {

/// Fills resp (n x k) and row_ll (n); returns the ordered sum of row_ll.
double e_step(const MixtureModel& model, const EmbeddingMatrix& data, RowMatrix& resp,
              std::vector<double>& row_ll);

Moments moments(const RowMatrix& resp, const EmbeddingMatrix& data);

}  // namespace kernels

namespace reference {

double e_step(const MixtureModel& model, const EmbeddingMatrix& data, RowMatrix& resp,
              std::vector<double>& row_ll);

Moments moments(const RowMatrix& resp, const EmbeddingMatrix& data);

}  // namespace reference

}  // namespace clustab::gmm
