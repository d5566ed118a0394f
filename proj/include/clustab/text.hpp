#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace clustab::text {

/// Ordered (emoji, replacement) pairs applied before tokenization.
using EmojiMap = std::vector<std::pair<std::string, std::string>>;

struct TextOptions {
  std::unordered_set<std::string> stopwords;
  EmojiMap emoji_map;

  /// Bundled English stopwords, no emoji mapping.
  static TextOptions defaults();
};

const std::vector<std::string>& english_stopwords();

/// One word per line; blank lines and lines starting with '#' are skipped.
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

/// Tab-separated "emoji<TAB>replacement" lines.
EmojiMap load_emoji_map(const std::filesystem::path& path);

std::string apply_emoji_map(std::string_view input, const EmojiMap& map);

/// Lowercases, strips punctuation (ASCII and the common Unicode punctuation
/// blocks), splits on whitespace and drops stopwords.
std::vector<std::string> tokenize(std::string_view input, const TextOptions& options);

}  // namespace clustab::text
