#include "clustab/naming.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

#include "clustab/csv.hpp"
#include "clustab/error.hpp"
#include "clustab/rng.hpp"

namespace clustab::naming {
namespace {

std::string collapse_lines(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(c == '\n' || c == '\r' ? ' ' : c);
  return out;
}

std::size_t code_points(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

Corpus::Corpus(std::vector<std::string> texts, const text::TextOptions& options)
    : texts_(std::move(texts)) {
  tokens_.reserve(texts_.size());
  for (const auto& t : texts_) tokens_.push_back(text::tokenize(t, options));
}

std::uint64_t profile_seed(std::uint64_t base_seed, std::size_t k, std::size_t cluster) {
  return derive_seed(derive_seed(base_seed, k), cluster);
}

ClusterProfile profile_cluster(const Corpus& corpus, const Partition& membership, std::size_t k,
                               std::size_t cluster, std::uint64_t seed) {
  if (corpus.size() != membership.size()) {
    throw Error(ErrorCode::MismatchedItems, "corpus has " + std::to_string(corpus.size()) +
                                                " texts, partition " + std::to_string(membership.size()));
  }
  const auto members = membership.members(static_cast<Label>(cluster));
  if (members.empty()) {
    throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(cluster) + " at K=" +
                                             std::to_string(k) + " has no members");
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (auto i : members)
    for (const auto& tok : corpus.tokens(i)) ++counts[tok];

  ClusterProfile p;
  p.k = k;
  p.cluster = cluster;
  for (auto& [w, c] : counts) p.top_words.push_back({w, c});
  std::sort(p.top_words.begin(), p.top_words.end(), [](const WordCount& a, const WordCount& b) {
    return a.count != b.count ? a.count > b.count : a.word < b.word;
  });
  if (p.top_words.size() > kTopWords) p.top_words.resize(kTopWords);

  if (members.size() <= kSampleTexts) {
    for (auto i : members) p.sample_texts.push_back(corpus.text(i));
  } else {
    Rng rng(seed);
    for (auto pick : rng.sample_without_replacement(members.size(), kSampleTexts)) {
      p.sample_texts.push_back(corpus.text(members[pick]));
    }
  }
  return p;
}

ClusterProfile profile_cluster(const std::vector<std::string>& texts, const Partition& membership,
                               std::size_t k, std::size_t cluster, std::uint64_t seed,
                               const text::TextOptions& options) {
  // Only members are tokenized.
  std::vector<std::string> subset(texts.size());
  if (texts.size() != membership.size()) {
    throw Error(ErrorCode::MismatchedItems, "texts and partition differ in length");
  }
  for (auto i : membership.members(static_cast<Label>(cluster))) subset[i] = texts[i];
  const Corpus corpus(std::move(subset), options);
  return profile_cluster(corpus, membership, k, cluster, seed);
}

std::string build_prompt(const ClusterProfile& profile) {
  std::string out =
      "Create a name for the following cluster of Twitter bios. It has the following top 10 most "
      "frequent words:\n";
  for (std::size_t i = 0; i < profile.top_words.size(); ++i) {
    if (i) out += ", ";
    out += profile.top_words[i].word;
  }
  out += "\nAnd this is a random sample of Twitter bios from the cluster:";
  for (std::size_t i = 0; i < profile.sample_texts.size(); ++i) {
    out += "\n" + std::to_string(i + 1) + ". " + collapse_lines(profile.sample_texts[i]);
  }
  return out;
}

std::string to_string(NameSource source) {
  return source == NameSource::External ? "external" : "fallback";
}

std::string fallback_name(const ClusterProfile& profile) {
  if (profile.top_words.empty()) return "K" + std::to_string(profile.k) + "-C" + std::to_string(profile.cluster);
  std::string out;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, profile.top_words.size()); ++i) {
    if (i) out.push_back(' ');
    out += profile.top_words[i].word;
  }
  return out;
}

std::string sanitize_name(const std::string& raw) {
  std::string s = collapse_lines(raw);
  // Collapse runs of spaces left by line breaks.
  std::string squeezed;
  for (char c : s) {
    if (c == ' ' && !squeezed.empty() && squeezed.back() == ' ') continue;
    squeezed.push_back(c);
  }
  static const std::vector<std::string> strip = {" ", "\t", "\"", "'", "`", "*",
                                                 "\xE2\x80\x9C", "\xE2\x80\x9D",
                                                 "\xE2\x80\x98", "\xE2\x80\x99"};
  bool changed = true;
  while (changed && !squeezed.empty()) {
    changed = false;
    for (const auto& q : strip) {
      if (squeezed.size() >= q.size() && squeezed.compare(0, q.size(), q) == 0) {
        squeezed.erase(0, q.size());
        changed = true;
      }
      if (squeezed.size() >= q.size() && squeezed.compare(squeezed.size() - q.size(), q.size(), q) == 0) {
        squeezed.erase(squeezed.size() - q.size());
        changed = true;
      }
    }
  }
  return squeezed;
}

std::vector<NameAssignment> name_clusters(const std::vector<ClusterProfile>& profiles,
                                          NamingBackend* backend, const NamingOptions& options) {
  struct Outcome {
    std::string raw;
    NameSource source = NameSource::Fallback;
    std::exception_ptr failure;
  };
  std::vector<Outcome> outcomes(profiles.size());
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  if (backend) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= profiles.size()) return;
        try {
          const std::string name = sanitize_name(backend->complete(build_prompt(profiles[i])));
          if (name.empty() || code_points(name) > options.max_name_chars) {
            throw Error(ErrorCode::MalformedResponse,
                        name.empty() ? "empty name" : "name longer than " + std::to_string(options.max_name_chars));
          }
          outcomes[i] = {name, NameSource::External, nullptr};
        } catch (const Error& e) {
          if (e.code() == ErrorCode::MalformedResponse ||
              (e.code() == ErrorCode::BackendUnavailable && options.fallback_on_error)) {
            outcomes[i] = {fallback_name(profiles[i]), NameSource::Fallback, nullptr};
          } else {
            outcomes[i].failure = std::current_exception();
          }
        } catch (...) {
          outcomes[i].failure = std::current_exception();
        }
      }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.max_in_flight, profiles.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < profiles.size(); ++i) outcomes[i] = {fallback_name(profiles[i]), NameSource::Fallback, nullptr};
  }

  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (outcomes[i].failure) std::rethrow_exception(outcomes[i].failure);
  }

  // Logged sequentially so the order is stable.
  std::vector<NameAssignment> out;
  std::map<std::size_t, std::set<std::string>> used;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    if (backend && outcomes[i].source == NameSource::Fallback) {
      log("K=" + std::to_string(p.k) + " cluster " + std::to_string(p.cluster) + ": using fallback name");
    }
    auto& taken = used[p.k];
    std::string unique = outcomes[i].raw;
    for (std::size_t suffix = 2; taken.contains(unique); ++suffix) {
      unique = outcomes[i].raw + " " + std::to_string(suffix);
    }
    taken.insert(unique);
    out.push_back({p.k, p.cluster, outcomes[i].raw, unique, outcomes[i].source});
  }
  return out;
}

std::string name_table_csv(const std::vector<NameAssignment>& names) {
  std::string out = "k,cluster,raw_name,unique_name,backend\n";
  for (const auto& n : names) {
    out += csv::join({std::to_string(n.k), std::to_string(n.cluster), n.raw_name, n.unique_name,
                      to_string(n.backend)});
    out += "\n";
  }
  return out;
}

std::vector<NameAssignment> read_name_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open name table '" + path.string() + "'");
  const auto records = csv::read_all(in);
  if (records.empty() || records.front() != csv::Record{"k", "cluster", "raw_name", "unique_name", "backend"}) {
    throw Error(ErrorCode::ParseError, "'" + path.string() + "' lacks the name table header");
  }
  std::vector<NameAssignment> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    const auto k = rec.size() == 5 ? csv::parse_int(rec[0]) : std::nullopt;
    const auto c = rec.size() == 5 ? csv::parse_int(rec[1]) : std::nullopt;
    if (!k || !c || *k < 0 || *c < 0 || (rec[4] != "external" && rec[4] != "fallback")) {
      throw Error(ErrorCode::ParseError, "malformed name table row " + std::to_string(r));
    }
    out.push_back({static_cast<std::size_t>(*k), static_cast<std::size_t>(*c), rec[2], rec[3],
                   rec[4] == "external" ? NameSource::External : NameSource::Fallback});
  }
  return out;
}

}  // namespace clustab::naming
