#include "clustab/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "clustab/csv.hpp"
#include "clustab/error.hpp"

namespace clustab {
namespace {

constexpr char kMagic[4] = {'C', 'S', 'E', 'M'};
constexpr std::uint8_t kBinaryVersion = 1;

void validate_shape(const IdList& ids, const std::vector<double>& values, std::size_t cols,
                    const std::optional<std::vector<std::size_t>>& dim_labels) {
  if (ids.empty()) throw Error(ErrorCode::InvalidArgument, "embedding matrix has no rows");
  if (cols == 0) throw Error(ErrorCode::InvalidArgument, "embedding matrix has no columns");
  if (values.size() != ids.size() * cols) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedding values size " + std::to_string(values.size()) + " != " +
                    std::to_string(ids.size()) + " x " + std::to_string(cols));
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw Error(ErrorCode::NonFiniteValue, "non-finite value at row " +
                                                 std::to_string(k / cols) + ", column " +
                                                 std::to_string(k % cols));
    }
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate row id '" + id + "'");
    }
  }
  if (dim_labels) {
    if (dim_labels->size() != cols) {
      throw Error(ErrorCode::DimensionMismatch, "dim_labels length differs from column count");
    }
    std::unordered_set<std::size_t> labels(dim_labels->begin(), dim_labels->end());
    if (labels.size() != cols) throw Error(ErrorCode::InvalidArgument, "dim_labels not unique");
  }
}

std::string location(std::size_t line) { return " (line " + std::to_string(line) + ")"; }

bool all_numeric(const csv::Record& rec, std::size_t from) {
  for (std::size_t i = from; i < rec.size(); ++i) {
    if (!csv::parse_double(rec[i])) return false;
  }
  return true;
}

bool blank(const csv::Record& rec) { return rec.size() == 1 && csv::trim(rec[0]).empty(); }

EmbeddingMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open embedding file '" + path.string() + "'");

  std::vector<std::pair<std::size_t, csv::Record>> records;
  std::size_t line = 0;
  while (true) {
    const std::size_t start = line + 1;
    auto rec = csv::read_record(in, line);
    if (!rec) break;
    if (blank(*rec)) continue;
    records.emplace_back(start, std::move(*rec));
  }
  if (records.empty()) throw Error(ErrorCode::ParseError, "embedding file '" + path.string() + "' is empty");

  // Header and id-column detection from the first record.
  bool header = false;
  bool id_column = false;
  const auto& first = records.front().second;
  if (all_numeric(first, 0)) {
    header = false;
  } else if (first.size() > 1 && all_numeric(first, 1)) {
    id_column = true;
  } else {
    header = true;
    std::string h0(csv::trim(first[0]));
    std::transform(h0.begin(), h0.end(), h0.begin(), [](unsigned char c) { return std::tolower(c); });
    id_column = h0 == "id" || h0.empty();
  }

  const std::size_t offset = id_column ? 1 : 0;
  std::size_t cols = 0;
  IdList ids;
  std::vector<double> values;
  for (std::size_t r = header ? 1 : 0; r < records.size(); ++r) {
    const auto& [line_no, rec] = records[r];
    if (rec.size() <= offset) {
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(ids.size()) +
                                                     " has no values" + location(line_no));
    }
    const std::size_t width = rec.size() - offset;
    if (cols == 0) {
      cols = width;
    } else if (width != cols) {
      throw Error(ErrorCode::DimensionMismatch,
                  "row " + std::to_string(ids.size()) + " has " + std::to_string(width) +
                      " values, expected " + std::to_string(cols) + location(line_no));
    }
    for (std::size_t c = 0; c < width; ++c) {
      const auto v = csv::parse_double(rec[c + offset]);
      if (!v) {
        throw Error(ErrorCode::ParseError, "malformed value '" + rec[c + offset] + "' at row " +
                                               std::to_string(ids.size()) + ", column " +
                                               std::to_string(c) + location(line_no));
      }
      if (!std::isfinite(*v)) {
        throw Error(ErrorCode::NonFiniteValue, "non-finite value at row " +
                                                   std::to_string(ids.size()) + ", column " +
                                                   std::to_string(c) + location(line_no));
      }
      values.push_back(*v);
    }
    ids.push_back(id_column ? std::string(csv::trim(rec[0])) : std::to_string(ids.size()));
  }
  if (ids.empty()) throw Error(ErrorCode::ParseError, "embedding file '" + path.string() + "' has no data rows");
  return EmbeddingMatrix(std::move(ids), std::move(values), cols);
}

std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

void write_u64_le(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

EmbeddingMatrix load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open embedding file '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  constexpr std::size_t header_size = 4 + 1 + 8 + 8;
  if (bytes.size() < header_size || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw Error(ErrorCode::ParseError, "'" + path.string() + "' is not a CSEM file");
  }
  if (p[4] != kBinaryVersion) {
    throw Error(ErrorCode::ParseError, "unsupported CSEM version " + std::to_string(p[4]));
  }
  const std::uint64_t n = read_u64_le(p + 5);
  const std::uint64_t d = read_u64_le(p + 13);
  if (n == 0 || d == 0 || n > (bytes.size() - header_size) / 8 / d) {
    throw Error(ErrorCode::ParseError, "CSEM header shape inconsistent with file size");
  }
  std::vector<double> values(n * d);
  const unsigned char* body = p + header_size;
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = std::bit_cast<double>(read_u64_le(body + 8 * k));
    if (!std::isfinite(values[k])) {
      throw Error(ErrorCode::NonFiniteValue, "non-finite value at row " + std::to_string(k / d) +
                                                 ", column " + std::to_string(k % d));
    }
  }
  std::string_view tail(bytes);
  tail.remove_prefix(header_size + 8 * values.size());
  IdList ids;
  if (tail.empty()) {
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  } else {
    while (!tail.empty()) {
      const auto nl = tail.find('\n');
      ids.emplace_back(tail.substr(0, nl));
      if (nl == std::string_view::npos) break;
      tail.remove_prefix(nl + 1);
    }
    if (ids.size() != n) {
      throw Error(ErrorCode::ParseError, "CSEM id section has " + std::to_string(ids.size()) +
                                             " ids, expected " + std::to_string(n));
    }
  }
  return EmbeddingMatrix(std::move(ids), std::move(values), d);
}

}  // namespace

EmbeddingFormat parse_embedding_format(const std::string& name) {
  if (name == "csv" || name == "text") return EmbeddingFormat::Csv;
  if (name == "bin" || name == "binary") return EmbeddingFormat::Binary;
  throw Error(ErrorCode::InvalidArgument, "unknown embedding format '" + name + "'");
}

EmbeddingMatrix::EmbeddingMatrix(IdList ids, std::vector<double> values, std::size_t cols,
                                 std::optional<std::vector<std::size_t>> dim_labels) {
  validate_shape(ids, values, cols, dim_labels);
  rows_ = ids.size();
  cols_ = cols;
  ids_ = std::make_shared<const IdList>(std::move(ids));
  values_ = std::move(values);
  dim_labels_ = std::move(dim_labels);
}

EmbeddingMatrix::EmbeddingMatrix(Trusted, SharedIds ids, std::vector<double> values,
                                 std::size_t cols,
                                 std::optional<std::vector<std::size_t>> dim_labels)
    : ids_(std::move(ids)),
      values_(std::move(values)),
      rows_(ids_->size()),
      cols_(cols),
      dim_labels_(std::move(dim_labels)) {}

EmbeddingMatrix EmbeddingMatrix::with_index_ids(std::vector<double> values, std::size_t rows,
                                                std::size_t cols) {
  IdList ids;
  ids.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) ids.push_back(std::to_string(i));
  return EmbeddingMatrix(std::move(ids), std::move(values), cols);
}

EmbeddingMatrix EmbeddingMatrix::select_columns(std::span<const std::size_t> columns) const {
  if (columns.empty()) throw Error(ErrorCode::InvalidArgument, "column selection is empty");
  std::vector<std::size_t> labels;
  labels.reserve(columns.size());
  std::unordered_set<std::size_t> seen;
  for (auto c : columns) {
    if (c >= cols_) throw Error(ErrorCode::OutOfRange, "column " + std::to_string(c) + " out of range");
    if (!seen.insert(c).second) throw Error(ErrorCode::InvalidArgument, "duplicate column in selection");
    labels.push_back(dim_labels_ ? (*dim_labels_)[c] : c);
  }
  std::vector<double> out;
  out.reserve(rows_ * columns.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* src = values_.data() + i * cols_;
    for (auto c : columns) out.push_back(src[c]);
  }
  return EmbeddingMatrix(Trusted{}, ids_, std::move(out), columns.size(), std::move(labels));
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> rows) const {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "row selection is empty");
  IdList ids;
  ids.reserve(rows.size());
  std::vector<double> out;
  out.reserve(rows.size() * cols_);
  std::unordered_set<std::size_t> seen;
  for (auto r : rows) {
    if (r >= rows_) throw Error(ErrorCode::OutOfRange, "row " + std::to_string(r) + " out of range");
    if (!seen.insert(r).second) throw Error(ErrorCode::InvalidArgument, "duplicate row in selection");
    ids.push_back((*ids_)[r]);
    const auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return EmbeddingMatrix(Trusted{}, std::make_shared<const IdList>(std::move(ids)), std::move(out),
                         cols_, dim_labels_);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::Io, "embedding file '" + path.string() + "' does not exist");
  }
  return format == EmbeddingFormat::Csv ? load_csv(path) : load_binary(path);
}

void save_embeddings(const EmbeddingMatrix& data, const std::filesystem::path& path,
                     EmbeddingFormat format) {
  std::string out;
  if (format == EmbeddingFormat::Csv) {
    out = "id";
    for (std::size_t m = 0; m < data.cols(); ++m) out += ",e" + std::to_string(m);
    out.push_back('\n');
    char buf[32];
    for (std::size_t i = 0; i < data.rows(); ++i) {
      out += csv::escape(data.ids()[i]);
      for (double v : data.row(i)) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out += buf;
      }
      out.push_back('\n');
    }
  } else {
    out.append(kMagic, 4);
    out.push_back(static_cast<char>(kBinaryVersion));
    write_u64_le(out, data.rows());
    write_u64_le(out, data.cols());
    for (double v : data.values()) write_u64_le(out, std::bit_cast<std::uint64_t>(v));
    for (const auto& id : data.ids()) {
      if (id.find('\n') != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "binary format cannot store ids containing newlines");
      }
      out += id;
      out.push_back('\n');
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace clustab
