#include "clustab/csv.hpp"

#include <charconv>

namespace clustab::csv {

std::optional<Record> read_record(std::istream& in, std::size_t& line) {
  std::string physical;
  if (!std::getline(in, physical)) return std::nullopt;
  ++line;
  Record fields;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == physical.size()) {
      if (quoted) {
        // Quoted field continues on the next physical line.
        field.push_back('\n');
        if (!std::getline(in, physical)) break;
        ++line;
        i = 0;
        continue;
      }
      break;
    }
    const char c = physical[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < physical.size() && physical[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == physical.size()) {
      // CRLF line ending
    } else {
      field.push_back(c);
    }
    ++i;
  }
  fields.push_back(std::move(field));
  return fields;
}

std::vector<Record> read_all(std::istream& in) {
  std::vector<Record> out;
  std::size_t line = 0;
  while (auto rec = read_record(in, line)) out.push_back(std::move(*rec));
  return out;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const Record& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace clustab::csv
