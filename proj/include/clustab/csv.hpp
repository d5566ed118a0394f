#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clustab::csv {

using Record = std::vector<std::string>;

/// Reads one RFC 4180 record (quoted fields may span lines). Returns
/// nullopt at end of input. `line` is advanced by the physical lines consumed.
std::optional<Record> read_record(std::istream& in, std::size_t& line);

std::vector<Record> read_all(std::istream& in);

/// Quotes the field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

std::string join(const Record& fields);

/// Strict full-string parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace clustab::csv
