#include "clustab/text.hpp"

#include <fstream>

#include "clustab/csv.hpp"
#include "clustab/error.hpp"

namespace clustab::text {
namespace {

struct Decoded {
  char32_t cp;
  std::size_t length;
};

Decoded decode(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t j) -> int {
    if (i + j >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + j]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
    }
  }
  return {0xFFFD, 1};
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0x00A0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
           (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7: case 0x00BB: case 0x00BF:
      return true;
    default: break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
         (cp >= 0x3014 && cp <= 0x301F) || (cp >= 0xFE10 && cp <= 0xFE19) ||
         (cp >= 0xFE30 && cp <= 0xFE4F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65);
}

char32_t lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if ((cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)) return cp + 32;   // Latin-1
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                 // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

}  // namespace

const std::vector<std::string>& english_stopwords() {
  static const std::vector<std::string> words = {
      "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
      "are", "aren", "arent", "as", "at", "be", "because", "been", "before", "being", "below",
      "between", "both", "but", "by", "can", "couldn", "couldnt", "d", "did", "didn", "didnt", "do",
      "does", "doesn", "doesnt", "doing", "don", "dont", "down", "during", "each", "few", "for",
      "from", "further", "had", "hadn", "hadnt", "has", "hasn", "hasnt", "have", "haven", "havent",
      "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if",
      "im", "in", "into", "is", "isn", "isnt", "it", "its", "itself", "just", "ll", "m", "ma", "me",
      "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor", "not", "now", "o",
      "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over",
      "own", "re", "s", "same", "shan", "she", "shes", "should", "shouldn", "shouldnt", "so",
      "some", "such", "t", "than", "that", "thats", "the", "their", "theirs", "them", "themselves",
      "then", "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
      "up", "ve", "very", "was", "wasn", "wasnt", "we", "were", "weren", "werent", "what", "when",
      "where", "which", "while", "who", "whom", "why", "will", "with", "won", "wont", "wouldn",
      "wouldnt", "y", "you", "youd", "youll", "your", "youre", "yours", "yourself", "yourselves",
      "youve"};
  return words;
}

TextOptions TextOptions::defaults() {
  TextOptions o;
  o.stopwords.insert(english_stopwords().begin(), english_stopwords().end());
  return o;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open stopword file '" + path.string() + "'");
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = csv::trim(line);
    if (w.empty() || w.front() == '#') continue;
    TextOptions plain;
    for (auto& t : tokenize(w, plain)) out.insert(std::move(t));
  }
  return out;
}

EmojiMap load_emoji_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open emoji map '" + path.string() + "'");
  EmojiMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::ParseError, "emoji map line " + std::to_string(line_no) + " lacks a tab");
    }
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::string apply_emoji_map(std::string_view input, const EmojiMap& map) {
  std::string s(input);
  for (const auto& [emoji, name] : map) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
      const auto hit = s.find(emoji, pos);
      if (hit == std::string::npos) break;
      out.append(s, pos, hit - pos);
      out += " " + name + " ";
      pos = hit + emoji.size();
    }
    out.append(s, pos, std::string::npos);
    s = std::move(out);
  }
  return s;
}

std::vector<std::string> tokenize(std::string_view input, const TextOptions& options) {
  const std::string mapped = options.emoji_map.empty() ? std::string(input)
                                                       : apply_emoji_map(input, options.emoji_map);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !options.stopwords.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (std::size_t i = 0; i < mapped.size();) {
    const auto [cp, len] = decode(mapped, i);
    i += len;
    if (is_space(cp)) {
      flush();
    } else if (!is_punct(cp)) {
      encode(lower(cp), current);
    }
  }
  flush();
  return tokens;
}

}  // namespace clustab::text
