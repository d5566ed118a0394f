#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace clustab {

/// Minimal dense row-major matrix for model parameters and responsibilities.
struct RowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RowMatrix() = default;
  RowMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  bool operator==(const RowMatrix&) const = default;
};

}  // namespace clustab
