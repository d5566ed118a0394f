#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "clustab/partition.hpp"
#include "clustab/text.hpp"

namespace clustab::naming {

struct WordCount {
  std::string word;
  std::size_t count = 0;

  bool operator==(const WordCount&) const = default;
};

struct ClusterProfile {
  std::size_t k = 0;
  std::size_t cluster = 0;
  std::vector<WordCount> top_words;  // descending count, ties lexicographic
  std::vector<std::string> sample_texts;
};

/// Texts tokenized once, reused for every (k, cluster) profile.
class Corpus {
public:
  Corpus(std::vector<std::string> texts, const text::TextOptions& options);

  std::size_t size() const noexcept { return texts_.size(); }
  const std::string& text(std::size_t i) const { return texts_[i]; }
  const std::vector<std::string>& tokens(std::size_t i) const { return tokens_[i]; }

private:
  std::vector<std::string> texts_;
  std::vector<std::vector<std::string>> tokens_;
};

constexpr std::size_t kTopWords = 10;
constexpr std::size_t kSampleTexts = 20;

/// Seed for the sample draw of one (k, cluster).
std::uint64_t profile_seed(std::uint64_t base_seed, std::size_t k, std::size_t cluster);

/// Corpus entries align index-for-index with the membership's items.
ClusterProfile profile_cluster(const Corpus& corpus, const Partition& membership, std::size_t k,
                               std::size_t cluster, std::uint64_t seed);
ClusterProfile profile_cluster(const std::vector<std::string>& texts, const Partition& membership,
                               std::size_t k, std::size_t cluster, std::uint64_t seed,
                               const text::TextOptions& options = text::TextOptions::defaults());

std::string build_prompt(const ClusterProfile& profile);

enum class NameSource { External, Fallback };
std::string to_string(NameSource source);

struct NameAssignment {
  std::size_t k = 0;
  std::size_t cluster = 0;
  std::string raw_name;
  std::string unique_name;
  NameSource backend = NameSource::Fallback;

  bool operator==(const NameAssignment&) const = default;
};

/// Text-completion service returning a cluster name for a prompt. Must be
/// safe to call from several threads. Throws Error(BackendUnavailable) when
/// the service cannot be reached, Error(MalformedResponse) on bad payloads.
class NamingBackend {
public:
  virtual ~NamingBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Top three words joined by spaces; "K{k}-C{c}" when there are none.
std::string fallback_name(const ClusterProfile& profile);

/// Trims whitespace and quotes, collapses line breaks to spaces.
std::string sanitize_name(const std::string& raw);

struct NamingOptions {
  std::size_t max_in_flight = 4;
  bool fallback_on_error = false;
  std::size_t max_name_chars = 120;
  std::function<void(const std::string&)> log;
};

/// backend == nullptr selects the offline fallback for every profile.
/// Duplicate names within one k get " 2", " 3", ... in profile order.
std::vector<NameAssignment> name_clusters(const std::vector<ClusterProfile>& profiles,
                                          NamingBackend* backend, const NamingOptions& options = {});

std::string name_table_csv(const std::vector<NameAssignment>& names);
std::vector<NameAssignment> read_name_table(const std::filesystem::path& path);

struct HttpBackendConfig {
  std::string url;  // scheme://host[:port][/path]
  std::string model;
  std::string token_env = "CLUSTAB_API_TOKEN";
  /// Dotted path into the response JSON; numeric parts index arrays.
  std::string response_field = "text";
  std::chrono::seconds timeout{30};
  std::size_t retries = 3;
  std::chrono::milliseconds backoff{500};
};

/// POSTs {"prompt": ..., "model": ...} as JSON, with a bearer token read
/// from the configured environment variable when set.
class HttpBackend : public NamingBackend {
public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string complete(const std::string& prompt) override;

private:
  HttpBackendConfig config_;
  std::string origin_;
  std::string path_;
};

}  // namespace clustab::naming
