#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clustab {

using IdList = std::vector<std::string>;
using SharedIds = std::shared_ptr<const IdList>;

enum class EmbeddingFormat { Csv, Binary };

EmbeddingFormat parse_embedding_format(const std::string& name);

/// Dense n x d row-major matrix of document embeddings. Immutable after
/// construction; ids are shared between copies and derived partitions.
class EmbeddingMatrix {
public:
  /// Validates shape, finiteness, id uniqueness and dim_labels.
  EmbeddingMatrix(IdList ids, std::vector<double> values, std::size_t cols,
                  std::optional<std::vector<std::size_t>> dim_labels = std::nullopt);

  /// ids 0..n-1.
  static EmbeddingMatrix with_index_ids(std::vector<double> values, std::size_t rows,
                                        std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  double at(std::size_t i, std::size_t m) const { return values_[i * cols_ + m]; }
  std::span<const double> values() const noexcept { return values_; }

  const IdList& ids() const noexcept { return *ids_; }
  const SharedIds& shared_ids() const noexcept { return ids_; }
  const std::optional<std::vector<std::size_t>>& dim_labels() const noexcept {
    return dim_labels_;
  }

  /// Keeps the given columns in the given order; dim_labels records the
  /// original column numbers.
  EmbeddingMatrix select_columns(std::span<const std::size_t> columns) const;
  EmbeddingMatrix select_rows(std::span<const std::size_t> rows) const;

private:
  struct Trusted {};
  EmbeddingMatrix(Trusted, SharedIds ids, std::vector<double> values, std::size_t cols,
                  std::optional<std::vector<std::size_t>> dim_labels);

  SharedIds ids_;
  std::vector<double> values_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::optional<std::vector<std::size_t>> dim_labels_;
};

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);
void save_embeddings(const EmbeddingMatrix& data, const std::filesystem::path& path,
                     EmbeddingFormat format);

}  // namespace clustab
