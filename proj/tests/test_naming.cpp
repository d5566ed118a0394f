#include <doctest.h>

#include <atomic>
#include <httplib.h>
#include <json.hpp>
#include <mutex>
#include <set>
#include <thread>

#include "clustab/naming.hpp"
#include "clustab/text.hpp"
#include "support.hpp"

using namespace clustab;
using namespace clustab::naming;
using testing::error_code_of;

namespace {

ClusterProfile profile(std::size_t k, std::size_t c, std::vector<std::string> words,
                       std::vector<std::string> samples = {}) {
  ClusterProfile p;
  p.k = k;
  p.cluster = c;
  std::size_t count = 100;
  for (auto& w : words) p.top_words.push_back({std::move(w), count--});
  p.sample_texts = std::move(samples);
  return p;
}

class StubBackend : public NamingBackend {
public:
  explicit StubBackend(std::function<std::string(const std::string&)> reply) : reply_(std::move(reply)) {}
  std::string complete(const std::string& prompt) override {
    const int now = ++in_flight_;
    {
      std::lock_guard lock(mu_);
      peak_ = std::max(peak_, now);
      prompts_.push_back(prompt);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight_;
    return reply_(prompt);
  }
  int peak() const { return peak_; }
  std::size_t calls() const { return prompts_.size(); }

private:
  std::function<std::string(const std::string&)> reply_;
  std::atomic<int> in_flight_{0};
  std::mutex mu_;
  int peak_ = 0;
  std::vector<std::string> prompts_;
};

/// Local HTTP server on an ephemeral port, stopped on destruction.
class LocalServer {
public:
  explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/complete", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/complete"; }

private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpBackendConfig local_config(const LocalServer& s) {
  HttpBackendConfig c;
  c.url = s.url();
  c.timeout = std::chrono::seconds(5);
  c.backoff = std::chrono::milliseconds(1);
  c.token_env = "CLUSTAB_TEST_TOKEN";
  return c;
}

}  // namespace

TEST_CASE("tokenizer") {
  const auto opts = text::TextOptions::defaults();
  CHECK(text::tokenize("Proud MAGA patriot!! Love the USA.", opts) ==
        std::vector<std::string>{"proud", "maga", "patriot", "love", "usa"});
  CHECK(text::tokenize("rock'n'roll  forever\tbelieving\n", opts) == std::vector<std::string>{"rocknroll", "forever", "believing"});
  CHECK(text::tokenize("«Ünïcode» — ΕΛΛΑΔΑ, Москва…", opts) ==
        std::vector<std::string>{"ünïcode", "ελλαδα", "москва"});
  CHECK(text::tokenize("the and of", opts).empty());
  text::TextOptions bare;
  CHECK(text::tokenize("The cat", bare) == std::vector<std::string>{"the", "cat"});
}

TEST_CASE("emoji mapping runs before tokenization") {
  auto opts = text::TextOptions::defaults();
  opts.emoji_map = {{"\xF0\x9F\x87\xBA\xF0\x9F\x87\xB8", "usflag"}, {"\xE2\x9D\xA4\xEF\xB8\x8F", "heart"}};
  CHECK(text::tokenize("god\xF0\x9F\x87\xBA\xF0\x9F\x87\xB8" "family\xE2\x9D\xA4\xEF\xB8\x8F", opts) ==
        std::vector<std::string>{"god", "usflag", "family", "heart"});
  testing::TempDir dir;
  testing::write(dir / "emoji.tsv", "\xE2\x9D\xA4\xEF\xB8\x8F\theart\n\n");
  CHECK(text::load_emoji_map(dir / "emoji.tsv").size() == 1);
  testing::write(dir / "stop.txt", "# comment\nmaga\n\nusa\n");
  CHECK(text::load_stopwords(dir / "stop.txt") == std::unordered_set<std::string>{"maga", "usa"});
}

TEST_CASE("profile counts words") {
  const auto p = profile_cluster({"maga patriot maga"}, Partition::from_labels({0}), 1, 0, 0);
  CHECK(p.top_words == std::vector<WordCount>{{"maga", 2}, {"patriot", 1}});
  CHECK(p.sample_texts == std::vector<std::string>{"maga patriot maga"});
}

TEST_CASE("profile ties are lexicographic and capped at ten") {
  const std::vector<std::string> texts{"zeta alpha zeta alpha zeta alpha mid", "b c d e f g h i j k l", "other"};
  const auto p = profile_cluster(texts, Partition::from_labels({0, 0, 1}), 2, 0, 0);
  REQUIRE(p.top_words.size() == kTopWords);
  CHECK(p.top_words[0] == WordCount{"alpha", 3});
  CHECK(p.top_words[1] == WordCount{"zeta", 3});
  CHECK(p.top_words[2].word == "b");
  for (std::size_t i = 1; i < p.top_words.size(); ++i) {
    const auto& a = p.top_words[i - 1];
    const auto& b = p.top_words[i];
    CHECK((a.count > b.count || (a.count == b.count && a.word < b.word)));
  }
  CHECK(p.sample_texts.size() == 2);
}

TEST_CASE("large clusters are sampled deterministically") {
  std::vector<std::string> texts;
  std::vector<Label> labels;
  for (int i = 0; i < 90; ++i) {
    texts.push_back("bio number " + std::to_string(i));
    labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  const auto part = Partition::from_labels(labels, 2);
  const auto a = profile_cluster(texts, part, 2, 0, profile_seed(0, 2, 0));
  const auto b = profile_cluster(texts, part, 2, 0, profile_seed(0, 2, 0));
  CHECK(a.sample_texts == b.sample_texts);
  CHECK(a.sample_texts.size() == kSampleTexts);
  std::set<std::string> distinct(a.sample_texts.begin(), a.sample_texts.end());
  CHECK(distinct.size() == kSampleTexts);
  for (const auto& t : a.sample_texts) {
    const int i = std::stoi(t.substr(t.rfind(' ') + 1));
    CHECK(labels[i] == 0);
  }
  const auto other = profile_cluster(texts, part, 2, 0, profile_seed(1, 2, 0));
  CHECK(other.sample_texts != a.sample_texts);
}

TEST_CASE("empty cluster profile") {
  CHECK(error_code_of([] { profile_cluster({"a", "b"}, Partition::from_labels({0, 0}, 2), 2, 1, 0); }) ==
        ErrorCode::EmptyCluster);
  CHECK(error_code_of([] { profile_cluster({"a"}, Partition::from_labels({0, 0}, 1), 1, 0, 0); }) ==
        ErrorCode::MismatchedItems);
}

TEST_CASE("prompt matches the golden file") {
  const auto p = profile_cluster({"maga patriot maga"}, Partition::from_labels({0}), 1, 0, 0);
  const auto golden = testing::slurp(std::filesystem::path(CLUSTAB_TEST_DATA) / "prompt_two_words.txt");
  CHECK(build_prompt(p) == golden);
  CHECK(build_prompt(p) == build_prompt(p));
}

TEST_CASE("prompt structure") {
  const auto empty = build_prompt(profile(1, 0, {}, {"the and"}));
  CHECK(empty ==
        "Create a name for the following cluster of Twitter bios. It has the following top 10 most frequent words:\n"
        "\nAnd this is a random sample of Twitter bios from the cluster:\n1. the and");
  std::vector<std::string> samples;
  for (int i = 0; i < 20; ++i) samples.push_back("text " + std::to_string(i));
  const auto full = build_prompt(profile(1, 0, {"a", "b"}, samples));
  CHECK(std::count(full.begin(), full.end(), '\n') == 22);
  CHECK(full.find("\n20. text 19") != std::string::npos);
  CHECK(full.find("\n21.") == std::string::npos);
  CHECK(build_prompt(profile(1, 0, {"a"}, {"two\nlines"})).find("1. two lines") != std::string::npos);
}

TEST_CASE("fallback names") {
  CHECK(fallback_name(profile(1, 0, {"maga", "patriot", "usa", "god"})) == "maga patriot usa");
  CHECK(fallback_name(profile(1, 0, {"solo"})) == "solo");
  CHECK(fallback_name(profile(3, 2, {})) == "K3-C2");
}

TEST_CASE("fallback naming is deterministic and unique per resolution") {
  const std::vector<ClusterProfile> profiles{profile(2, 0, {"a", "b", "c"}), profile(2, 1, {"a", "b", "c", "d"}),
                                             profile(3, 0, {"a", "b", "c"}), profile(3, 1, {"x"}),
                                             profile(3, 2, {"a", "b", "c"})};
  const auto names = name_clusters(profiles, nullptr);
  CHECK(names == name_clusters(profiles, nullptr));
  std::vector<std::string> unique;
  for (const auto& n : names) {
    unique.push_back(n.unique_name);
    CHECK(n.backend == NameSource::Fallback);
  }
  CHECK(unique == std::vector<std::string>{"a b c", "a b c 2", "a b c", "x", "a b c 2"});
}

TEST_CASE("sanitizing replies") {
  CHECK(sanitize_name("  \"Patriots\"\n") == "Patriots");
  CHECK(sanitize_name("**Gamer\nCrew**") == "Gamer Crew");
  CHECK(sanitize_name("\xE2\x80\x9C" "Faith  & Family\xE2\x80\x9D") == "Faith & Family");
  CHECK(sanitize_name("`x`") == "x");
}

TEST_CASE("stub backend duplicates get suffixes in profile order") {
  StubBackend stub([](const std::string&) { return "Patriots"; });
  std::vector<ClusterProfile> profiles;
  for (std::size_t c = 0; c < 3; ++c) profiles.push_back(profile(3, c, {"w" + std::to_string(c)}));
  profiles.push_back(profile(4, 0, {"v"}));
  const auto names = name_clusters(profiles, &stub);
  REQUIRE(names.size() == 4);
  CHECK(names[0].unique_name == "Patriots");
  CHECK(names[1].unique_name == "Patriots 2");
  CHECK(names[2].unique_name == "Patriots 3");
  CHECK(names[3].unique_name == "Patriots");
  for (const auto& n : names) {
    CHECK(n.raw_name == "Patriots");
    CHECK(n.backend == NameSource::External);
  }
}

TEST_CASE("in-flight requests are bounded") {
  StubBackend stub([](const std::string& prompt) { return "n" + std::to_string(prompt.size()); });
  std::vector<ClusterProfile> profiles;
  for (std::size_t c = 0; c < 16; ++c) profiles.push_back(profile(16, c, {std::string(c + 1, 'w')}));
  NamingOptions opts;
  opts.max_in_flight = 3;
  const auto names = name_clusters(profiles, &stub, opts);
  CHECK(stub.peak() <= 3);
  CHECK(stub.calls() == 16);
  for (std::size_t c = 0; c < 16; ++c) CHECK(names[c].cluster == c);
}

TEST_CASE("bad replies fall back") {
  std::vector<std::string> logged;
  NamingOptions opts;
  opts.max_in_flight = 1;
  opts.log = [&](const std::string& m) { logged.push_back(m); };
  const std::vector<ClusterProfile> profiles{profile(2, 0, {"a", "b"}), profile(2, 1, {"c"})};

  StubBackend empty([](const std::string&) { return "  \"\"  "; });
  auto names = name_clusters(profiles, &empty, opts);
  CHECK(names[0].unique_name == "a b");
  CHECK(names[0].backend == NameSource::Fallback);
  CHECK(logged.size() == 2);

  StubBackend wordy([](const std::string&) { return std::string(121, 'x'); });
  names = name_clusters(profiles, &wordy, opts);
  CHECK(names[1].unique_name == "c");

  StubBackend long_utf8([](const std::string&) {
    std::string s;
    for (int i = 0; i < 120; ++i) s += "\xC3\xA9";
    return s;
  });
  names = name_clusters(profiles, &long_utf8, opts);
  CHECK(names[0].backend == NameSource::External);
}

TEST_CASE("unreachable backend") {
  StubBackend down([](const std::string&) -> std::string {
    throw Error(ErrorCode::BackendUnavailable, "connection refused");
  });
  const std::vector<ClusterProfile> profiles{profile(2, 0, {"a"}), profile(2, 1, {"b"})};
  CHECK(error_code_of([&] { name_clusters(profiles, &down); }) == ErrorCode::BackendUnavailable);
  NamingOptions opts;
  opts.fallback_on_error = true;
  const auto names = name_clusters(profiles, &down, opts);
  CHECK(names[0].unique_name == "a");
  CHECK(names[1].backend == NameSource::Fallback);
}

TEST_CASE("name table round trip") {
  testing::TempDir dir;
  const std::vector<NameAssignment> names{{1, 0, "All, \"of\" it", "All, \"of\" it", NameSource::External},
                                          {2, 1, "x", "x 2", NameSource::Fallback}};
  const auto csv = name_table_csv(names);
  CHECK(csv.rfind("k,cluster,raw_name,unique_name,backend\n", 0) == 0);
  testing::write(dir / "names.csv", csv);
  CHECK(read_name_table(dir / "names.csv") == names);
}

TEST_CASE("http backend against a local server") {
  std::mutex mu;
  std::vector<nlohmann::json> bodies;
  std::vector<std::string> auth;
  std::atomic<int> failures_left{2};
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    if (failures_left-- > 0) {
      res.status = 503;
      return;
    }
    std::lock_guard lock(mu);
    bodies.push_back(nlohmann::json::parse(req.body));
    auth.push_back(req.get_header_value("Authorization"));
    res.set_content(R"({"choices": [{"text": "  Gamers\n"}]})", "application/json");
  });

  ::setenv("CLUSTAB_TEST_TOKEN", "secret-token", 1);
  auto cfg = local_config(server);
  cfg.model = "namer-1";
  cfg.response_field = "choices.0.text";
  HttpBackend backend(cfg);
  CHECK(backend.complete("hello") == "  Gamers\n");
  REQUIRE(bodies.size() == 1);
  CHECK(bodies[0]["prompt"] == "hello");
  CHECK(bodies[0]["model"] == "namer-1");
  CHECK(auth[0] == "Bearer secret-token");
  ::unsetenv("CLUSTAB_TEST_TOKEN");

  const auto names = name_clusters({profile(1, 0, {"a"})}, &backend);
  CHECK(names[0].unique_name == "Gamers");
  CHECK(names[0].backend == NameSource::External);
}

TEST_CASE("http backend failures") {
  SUBCASE("persistent server errors exhaust the retries") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 500;
    });
    auto cfg = local_config(server);
    cfg.retries = 3;
    HttpBackend backend(cfg);
    CHECK(error_code_of([&] { backend.complete("x"); }) == ErrorCode::BackendUnavailable);
    CHECK(hits == 4);
  }
  SUBCASE("malformed payloads") {
    LocalServer server([](const httplib::Request& req, httplib::Response& res) {
      res.set_content(req.body.find("json") != std::string::npos ? "not json" : R"({"other": "x"})",
                      "application/json");
    });
    HttpBackend backend(local_config(server));
    CHECK(error_code_of([&] { backend.complete("json please"); }) == ErrorCode::MalformedResponse);
    CHECK(error_code_of([&] { backend.complete("field please"); }) == ErrorCode::MalformedResponse);
  }
  SUBCASE("nothing listening") {
    int port = 0;
    {
      httplib::Server probe;
      port = probe.bind_to_any_port("127.0.0.1");
    }
    HttpBackendConfig cfg;
    cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/x";
    cfg.retries = 1;
    cfg.backoff = std::chrono::milliseconds(1);
    cfg.timeout = std::chrono::seconds(2);
    HttpBackend backend(cfg);
    CHECK(error_code_of([&] { backend.complete("x"); }) == ErrorCode::BackendUnavailable);
  }
  CHECK(error_code_of([] { HttpBackend(HttpBackendConfig{}); }) == ErrorCode::InvalidArgument);
}
