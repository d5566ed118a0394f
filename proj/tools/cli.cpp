#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "clustab/csv.hpp"
#include "clustab/embedding.hpp"
#include "clustab/error.hpp"
#include "clustab/harness.hpp"
#include "clustab/metrics.hpp"
#include "clustab/pipeline.hpp"
#include "clustab/sankey.hpp"
#include "clustab/synthetic.hpp"
#include "clustab/text.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clustab::cli {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfRange:
      return kConfigError;
    case ErrorCode::Io:
    case ErrorCode::ParseError:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::MismatchedItems:
    case ErrorCode::EmptyIntersection:
    case ErrorCode::InsufficientResolutions:
      return kIoError;
    case ErrorCode::BackendUnavailable:
      return kBackendUnavailable;
    default:
      return kNumericError;
  }
}

/// Runs `body`, translating library errors into exit codes and messages.
template <class Body>
int guarded(std::ostream& err, const char* command, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "clustab " << command << ": " << e.what() << " [" << to_string(e.code()) << "]\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "clustab " << command << ": " << e.what() << "\n";
    return kNumericError;
  }
}

void apply_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

/// Data for commands that refit: --input, else the input recorded in the archive.
EmbeddingMatrix load_input(const RunConfig& config) {
  std::string input = config.input;
  std::string format = config.format;
  const fs::path recorded = fs::path(config.out) / "config.json";
  if (input.empty() && fs::exists(recorded)) {
    std::ifstream f(recorded);
    std::stringstream ss;
    ss << f.rdbuf();
    const auto archived = RunConfig::from_json(ss.str());
    input = archived.input;
    format = archived.format;
  }
  if (input.empty()) throw Error(ErrorCode::InvalidArgument, "no --input given and none recorded in the archive");
  return load_embeddings(input, parse_embedding_format(format));
}

harness::PerturbationSpec spec_for(const RunConfig& c, harness::PerturbationKind kind) {
  harness::PerturbationSpec s;
  s.kind = kind;
  s.fraction = c.fraction;
  s.repetitions = c.repetitions;
  s.seed_first = c.seed_first;
  s.seed_last = c.seed_last;
  s.master_seed = c.master_seed;
  s.row_compare = c.row_compare == "predict" ? harness::RowComparison::Predict : harness::RowComparison::Restrict;
  return s;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  parse_embedding_format(format);
  if (k_min < 1) fail("k_min must be at least 1");
  if (k_max < k_min) fail("k_max (" + std::to_string(k_max) + ") < k_min (" + std::to_string(k_min) + ")");
  gmm::GmmConfig probe = gmm;
  probe.k = k_min;
  probe.validate();
  if (!(fraction > 0.0 && fraction <= 1.0)) fail("fraction must lie in (0, 1]");
  if (repetitions < 1) fail("repetitions must be at least 1");
  if (seed_last < seed_first) fail("seed range is empty");
  if (row_compare != "restrict" && row_compare != "predict") fail("row_compare must be restrict or predict");
  for (const auto& k : kinds) harness::parse_kind(k);
  sankey::resolve_threshold(threshold, 1);
  if (jobs < 0) fail("jobs must be nonnegative");
  if (out.empty()) fail("output directory is empty");
}

std::string RunConfig::to_json() const {
  Json j;
  j["input"] = input;
  j["format"] = format;
  j["k_min"] = k_min;
  j["k_max"] = k_max;
  j["gmm"] = {{"covariance", "diag"},         {"max_iter", gmm.max_iter},   {"tol", gmm.tol},
              {"reg_covar", gmm.reg_covar},   {"seed", gmm.seed},           {"n_init", gmm.n_init},
              {"init", gmm::to_string(gmm.init)}};
  j["stability"] = {{"kinds", kinds},           {"fraction", fraction},       {"repetitions", repetitions},
                    {"seed_first", seed_first}, {"seed_last", seed_last},     {"master_seed", master_seed},
                    {"row_compare", row_compare}, {"fit_reference", fit_reference}};
  j["sankey"] = {{"threshold", threshold}, {"names", names}};
  j["naming"] = {{"backend_url", naming.backend_url},
                 {"model", naming.model},
                 {"token_env", naming.token_env},
                 {"response_field", naming.response_field},
                 {"timeout_s", naming.timeout_s},
                 {"retries", naming.retries},
                 {"max_in_flight", naming.max_in_flight},
                 {"fallback", naming.fallback},
                 {"fallback_on_error", naming.fallback_on_error},
                 {"texts", naming.texts},
                 {"stopwords", naming.stopwords},
                 {"emoji_map", naming.emoji_map}};
  j["out"] = out;
  j["jobs"] = jobs;
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) { return from_json(text, RunConfig{}); }

RunConfig RunConfig::from_json(const std::string& text, const RunConfig& base) {
  RunConfig c = base;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed config JSON: ") + e.what());
  }
  try {
    auto take = [](const Json& obj, const char* key, auto& field) {
      if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
    };
    take(j, "input", c.input);
    take(j, "format", c.format);
    take(j, "k_min", c.k_min);
    take(j, "k_max", c.k_max);
    take(j, "out", c.out);
    take(j, "jobs", c.jobs);
    if (j.contains("gmm")) {
      const auto& g = j["gmm"];
      if (g.contains("covariance") && g["covariance"] != "diag") {
        throw Error(ErrorCode::InvalidArgument, "only diagonal covariance is supported");
      }
      take(g, "max_iter", c.gmm.max_iter);
      take(g, "tol", c.gmm.tol);
      take(g, "reg_covar", c.gmm.reg_covar);
      take(g, "seed", c.gmm.seed);
      take(g, "n_init", c.gmm.n_init);
      if (g.contains("init")) c.gmm.init = gmm::parse_init_method(g["init"].get<std::string>());
    }
    if (j.contains("stability")) {
      const auto& s = j["stability"];
      take(s, "kinds", c.kinds);
      take(s, "fraction", c.fraction);
      take(s, "repetitions", c.repetitions);
      take(s, "seed_first", c.seed_first);
      take(s, "seed_last", c.seed_last);
      take(s, "master_seed", c.master_seed);
      take(s, "row_compare", c.row_compare);
      take(s, "fit_reference", c.fit_reference);
    }
    if (j.contains("sankey")) {
      const auto& s = j["sankey"];
      if (s.contains("threshold")) {
        c.threshold = s["threshold"].is_string() ? s["threshold"].get<std::string>()
                                                 : s["threshold"].dump();
      }
      take(s, "names", c.names);
    }
    if (j.contains("naming")) {
      const auto& n = j["naming"];
      take(n, "backend_url", c.naming.backend_url);
      take(n, "model", c.naming.model);
      take(n, "token_env", c.naming.token_env);
      take(n, "response_field", c.naming.response_field);
      take(n, "timeout_s", c.naming.timeout_s);
      take(n, "retries", c.naming.retries);
      take(n, "max_in_flight", c.naming.max_in_flight);
      take(n, "fallback", c.naming.fallback);
      take(n, "fallback_on_error", c.naming.fallback_on_error);
      take(n, "texts", c.naming.texts);
      take(n, "stopwords", c.naming.stopwords);
      take(n, "emoji_map", c.naming.emoji_map);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("invalid config field: ") + e.what());
  }
  return c;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
  } catch (const Error& e) {
    err << "clustab sweep: " << e.what() << "\n";
    return kConfigError;
  }
  return guarded(err, "sweep", [&] {
    apply_jobs(config.jobs);
    if (config.input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
    const auto data = load_embeddings(config.input, parse_embedding_format(config.format));
    const auto result = pipeline::run_sweep(data, config.gmm, config.k_min, config.k_max);
    const fs::path dir(config.out);
    pipeline::write_archive(result, dir);
    write_file(dir / "config.json", config.to_json());

    out << "  K  occupied      log_likelihood  n_iter  converged  ami_prev  stability_prev\n";
    for (const auto& [k, model] : result.models) {
      std::string ami = "-";
      std::string stab = "-";
      for (const auto& c : result.consecutive) {
        if (c.k_current == k) {
          ami = fixed(c.ami.ami, 4);
          stab = fixed(c.stability.average, 4);
        }
      }
      out << std::setw(3) << k << std::setw(10) << result.partition(k).occupied_clusters() << std::setw(20)
          << fixed(model.final_log_likelihood, 4) << std::setw(8) << model.n_iter << std::setw(11)
          << (model.converged ? "yes" : "no") << std::setw(10) << ami << std::setw(16) << stab << "\n";
    }
    return kOk;
  });
}

int cmd_stability(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
  } catch (const Error& e) {
    err << "clustab stability: " << e.what() << "\n";
    return kConfigError;
  }
  return guarded(err, "stability", [&] {
    apply_jobs(config.jobs);
    const fs::path dir(config.out);
    const bool have_archive = fs::exists(pipeline::partition_path(dir, config.k_min));
    if (!have_archive && !config.fit_reference) {
      throw Error(ErrorCode::Io, "no sweep archive in '" + dir.string() + "' (run sweep or pass --fit-reference)");
    }
    const auto data = load_input(config);
    const harness::KRange range{config.k_min, config.k_max};

    harness::ReferenceSet refs;
    if (have_archive) {
      const auto archive = pipeline::read_archive(dir);
      for (std::size_t k = range.min; k <= range.max; ++k) {
        const auto it = archive.partitions.find(k);
        if (it == archive.partitions.end()) {
          if (!config.fit_reference) throw Error(ErrorCode::Io, "archive lacks partition for K=" + std::to_string(k));
          refs.clear();
          break;
        }
        refs.emplace(k, it->second);
      }
      if (!refs.empty() && refs.begin()->second.ids() != data.ids()) {
        throw Error(ErrorCode::MismatchedItems, "archive partitions do not cover the input rows");
      }
    }
    if (refs.empty()) {
      ensure_dir(dir);
      refs = harness::fit_references(data, config.gmm, range);
    }

    harness::HarnessOptions options;
    options.jobs = config.jobs;
    options.references = &refs;
    std::vector<harness::StabilityCurve> curves;
    for (const auto& name : config.kinds) {
      const auto kind = harness::parse_kind(name);
      auto curve = harness::run_protocol(data, config.gmm, range, spec_for(config, kind), options);
      const std::string stem = "stability_" + harness::to_string(kind);
      write_file(dir / (stem + ".csv"), harness::curve_csv(curve));
      write_file(dir / (stem + ".json"), harness::curve_json(curve));
      write_file(dir / (stem + "_per_rep.csv"), harness::curve_per_rep_csv(curve));
      out << harness::to_string(kind) << ":";
      for (std::size_t i = 0; i < curve.k_values.size(); ++i) {
        out << " K" << curve.k_values[i] << "=" << fixed(curve.mean_ami[i], 3) << "±" << fixed(curve.std_ami[i], 3);
      }
      out << "\n";
      curves.push_back(std::move(curve));
    }
    write_file(dir / "stability_curves.csv", harness::combined_csv(curves));
    return kOk;
  });
}

int cmd_sankey(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, "sankey", [&] {
    const fs::path dir(config.out);
    const auto archive = pipeline::read_archive(dir);
    const std::size_t n = archive.partitions.begin()->second.size();
    const std::size_t threshold = sankey::resolve_threshold(config.threshold, n);
    sankey::NameMap names;
    if (!config.names.empty()) {
      for (const auto& a : naming::read_name_table(config.names)) names[{a.k, a.cluster}] = a.unique_name;
    }
    const auto graph = sankey::build_graph(archive, config.names.empty() ? nullptr : &names, threshold);
    sankey::export_json(graph, dir / "graph.json");
    sankey::export_html(graph, dir / "graph.html");
    out << "graph: " << graph.nodes.size() << " nodes, " << graph.edges.size() << " edges, threshold "
        << threshold << "\n";
    return kOk;
  });
}

int cmd_name(const RunConfig& config, std::ostream& out, std::ostream& err, naming::NamingBackend* backend) {
  return guarded(err, "name", [&] {
    const fs::path dir(config.out);
    const auto archive = pipeline::read_archive(dir);
    if (config.naming.texts.empty()) throw Error(ErrorCode::InvalidArgument, "--texts is required");
    if (!backend && !config.naming.fallback && config.naming.backend_url.empty()) {
      throw Error(ErrorCode::InvalidArgument, "set --backend-url or pass --fallback");
    }

    const auto& reference = archive.partitions.begin()->second;
    std::ifstream tf(config.naming.texts);
    if (!tf) throw Error(ErrorCode::Io, "cannot open texts file '" + config.naming.texts + "'");
    const auto records = csv::read_all(tf);
    if (records.empty() || records.front().size() < 2 || records.front()[0] != "id") {
      throw Error(ErrorCode::ParseError, "texts file needs an id,text header");
    }
    std::unordered_map<std::string, std::string> by_id;
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (records[r].size() < 2) continue;
      by_id[records[r][0]] = records[r][1];
    }
    std::vector<std::string> texts;
    texts.reserve(reference.size());
    for (const auto& id : reference.ids()) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::ParseError, "texts file has no entry for id '" + id + "'");
      texts.push_back(it->second);
    }

    auto options = text::TextOptions::defaults();
    if (!config.naming.stopwords.empty()) options.stopwords = text::load_stopwords(config.naming.stopwords);
    if (!config.naming.emoji_map.empty()) options.emoji_map = text::load_emoji_map(config.naming.emoji_map);
    const naming::Corpus corpus(std::move(texts), options);

    std::vector<naming::ClusterProfile> profiles;
    for (const auto& [k, p] : archive.partitions) {
      const auto sizes = p.cluster_sizes();
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) continue;
        profiles.push_back(naming::profile_cluster(corpus, p, k, c, naming::profile_seed(config.gmm.seed, k, c)));
      }
    }

    std::unique_ptr<naming::HttpBackend> http;
    if (!backend && !config.naming.fallback) {
      naming::HttpBackendConfig hc;
      hc.url = config.naming.backend_url;
      hc.model = config.naming.model;
      hc.token_env = config.naming.token_env;
      hc.response_field = config.naming.response_field;
      hc.timeout = std::chrono::seconds(config.naming.timeout_s);
      hc.retries = config.naming.retries;
      http = std::make_unique<naming::HttpBackend>(hc);
      backend = http.get();
    }
    if (config.naming.fallback) backend = nullptr;

    naming::NamingOptions opts;
    opts.max_in_flight = config.naming.max_in_flight;
    opts.fallback_on_error = config.naming.fallback_on_error;
    opts.log = [&err](const std::string& msg) { err << "clustab name: " << msg << "\n"; };
    const auto names = naming::name_clusters(profiles, backend, opts);
    write_file(dir / "names.csv", naming::name_table_csv(names));
    out << "named " << names.size() << " clusters -> " << (dir / "names.csv").string() << "\n";
    return kOk;
  });
}

namespace {

int cmd_synth(const std::string& kind, std::size_t n, std::size_t d, std::size_t blobs, double separation,
              std::uint64_t seed, const std::string& path, const std::string& format, const std::string& texts,
              std::ostream& out, std::ostream& err) {
  return guarded(err, "synth", [&] {
    synthetic::LabeledData fixture =
        kind == "nested" ? synthetic::nested_blobs(n, d, seed)
                         : synthetic::separated_blobs(n, d, blobs, separation, 1.0, seed);
    save_embeddings(fixture.data, path, parse_embedding_format(format));
    if (!texts.empty()) {
      const auto bios = synthetic::bios(fixture.truth, seed);
      std::string csv_text = "id,text\n";
      for (std::size_t i = 0; i < bios.size(); ++i) csv_text += csv::join({fixture.data.ids()[i], bios[i]}) + "\n";
      write_file(texts, csv_text);
    }
    out << "wrote " << n << " x " << d << " " << kind << " fixture to " << path << "\n";
    return kOk;
  });
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster stability across resolutions for embedding matrices"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  std::string backend_url;
  std::vector<CLI::Option*> set;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration; flags override it");
    sub->add_option("--input", flags.input, "Embedding file");
    sub->add_option("--format", flags.format, "Embedding format: csv or bin");
    sub->add_option("--k-min", flags.k_min, "Smallest K");
    sub->add_option("--k-max", flags.k_max, "Largest K");
    sub->add_option("--seed", flags.gmm.seed, "GMM random seed");
    sub->add_option("--max-iter", flags.gmm.max_iter, "EM iteration cap");
    sub->add_option("--tol", flags.gmm.tol, "Convergence threshold on mean log-likelihood");
    sub->add_option("--reg-covar", flags.gmm.reg_covar, "Variance floor");
    sub->add_option("--n-init", flags.gmm.n_init, "Initializations per fit");
    sub->add_option("--jobs", flags.jobs, "Worker threads");
    sub->add_option("--out", flags.out, "Archive / output directory");
  };

  auto* sweep = app.add_subcommand("sweep", "Fit every K and write the sweep archive");
  auto* stability = app.add_subcommand("stability", "Run the single-level stability protocols");
  auto* sankey_cmd = app.add_subcommand("sankey", "Build graph.json and graph.html from an archive");
  auto* name = app.add_subcommand("name", "Name every cluster in an archive");
  for (auto* sub : {sweep, stability, sankey_cmd, name}) add_common(sub);

  std::string kinds_text;
  stability->add_option("--kinds", kinds_text, "Comma-separated: dimension,row,seed");
  stability->add_option("--reps", flags.repetitions, "Repetitions for subsampling protocols");
  stability->add_option("--fraction", flags.fraction, "Subsample fraction");
  stability->add_option("--seed-first", flags.seed_first, "First seed of the seed protocol");
  stability->add_option("--seed-last", flags.seed_last, "Last seed of the seed protocol");
  stability->add_option("--master-seed", flags.master_seed, "Seed for subsample draws");
  stability->add_option("--row-compare", flags.row_compare, "restrict or predict");
  stability->add_flag("--fit-reference", flags.fit_reference, "Fit reference partitions when no archive exists");

  sankey_cmd->add_option("--threshold", flags.threshold, "Minimum edge flow: count or percentage (x%)");
  sankey_cmd->add_option("--names", flags.names, "Name table CSV for node labels");

  name->add_option("--texts", flags.naming.texts, "CSV with id,text columns");
  name->add_option("--backend-url", flags.naming.backend_url, "Text-completion endpoint");
  name->add_option("--model,--backend-model", flags.naming.model, "Model identifier sent to the backend");
  name->add_option("--token-env", flags.naming.token_env, "Environment variable holding the auth token");
  name->add_option("--response-field", flags.naming.response_field, "Dotted path of the reply text");
  name->add_option("--max-in-flight", flags.naming.max_in_flight, "Concurrent backend requests");
  name->add_flag("--fallback", flags.naming.fallback, "Name offline from top words");
  name->add_flag("--fallback-on-error", flags.naming.fallback_on_error, "Use fallback names when the backend fails");
  name->add_option("--stopwords", flags.naming.stopwords, "Stopword list, one per line");
  name->add_option("--emoji-map", flags.naming.emoji_map, "Tab-separated emoji replacements");

  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian fixture");
  std::string synth_kind = "blobs", synth_out, synth_format = "csv", synth_texts;
  std::size_t synth_n = 2000, synth_d = 64, synth_blobs = 4;
  double synth_sep = 10.0;
  std::uint64_t synth_seed = 0;
  synth->add_option("--kind", synth_kind, "blobs or nested")->check(CLI::IsMember({"blobs", "nested"}));
  synth->add_option("--n", synth_n, "Items");
  synth->add_option("--d", synth_d, "Dimensions");
  synth->add_option("--blobs", synth_blobs, "Blob count (blobs kind)");
  synth->add_option("--separation", synth_sep, "Pairwise center distance in sigmas");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--format", synth_format, "csv or bin");
  synth->add_option("--texts", synth_texts, "Also write synthetic bios to this CSV");
  synth->add_option("--out", synth_out, "Output embedding file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (synth->parsed()) {
    return cmd_synth(synth_kind, synth_n, synth_d, synth_blobs, synth_sep, synth_seed, synth_out, synth_format,
                     synth_texts, out, err);
  }

  CLI::App* active = app.get_subcommands().front();
  RunConfig config;
  auto given = [&](const char* flag) { return active->get_option_no_throw(flag) && active->count(flag) > 0; };
  // Follow-up commands start from the settings the sweep recorded.
  if (config_path.empty() && active != sweep) {
    const fs::path recorded = fs::path(given("--out") ? flags.out : config.out) / "config.json";
    if (fs::exists(recorded)) config_path = recorded.string();
  }
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      err << "clustab: cannot open config '" << config_path << "'\n";
      return kIoError;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      config = RunConfig::from_json(ss.str());
    } catch (const Error& e) {
      err << "clustab: " << e.what() << "\n";
      return kConfigError;
    }
  }
  // Flags given on the command line override the file.
  if (given("--input")) config.input = flags.input;
  if (given("--format")) config.format = flags.format;
  if (given("--k-min")) config.k_min = flags.k_min;
  if (given("--k-max")) config.k_max = flags.k_max;
  if (given("--seed")) config.gmm.seed = flags.gmm.seed;
  if (given("--max-iter")) config.gmm.max_iter = flags.gmm.max_iter;
  if (given("--tol")) config.gmm.tol = flags.gmm.tol;
  if (given("--reg-covar")) config.gmm.reg_covar = flags.gmm.reg_covar;
  if (given("--n-init")) config.gmm.n_init = flags.gmm.n_init;
  if (given("--jobs")) config.jobs = flags.jobs;
  if (given("--out")) config.out = flags.out;
  if (given("--kinds")) {
    config.kinds.clear();
    std::stringstream ks(kinds_text);
    for (std::string part; std::getline(ks, part, ',');)
      if (!part.empty()) config.kinds.push_back(std::string(csv::trim(part)));
  }
  if (given("--reps")) config.repetitions = flags.repetitions;
  if (given("--fraction")) config.fraction = flags.fraction;
  if (given("--seed-first")) config.seed_first = flags.seed_first;
  if (given("--seed-last")) config.seed_last = flags.seed_last;
  if (given("--master-seed")) config.master_seed = flags.master_seed;
  if (given("--row-compare")) config.row_compare = flags.row_compare;
  if (given("--fit-reference")) config.fit_reference = flags.fit_reference;
  if (given("--threshold")) config.threshold = flags.threshold;
  if (given("--names")) config.names = flags.names;
  if (given("--texts")) config.naming.texts = flags.naming.texts;
  if (given("--backend-url")) config.naming.backend_url = flags.naming.backend_url;
  if (given("--model")) config.naming.model = flags.naming.model;
  if (given("--token-env")) config.naming.token_env = flags.naming.token_env;
  if (given("--response-field")) config.naming.response_field = flags.naming.response_field;
  if (given("--max-in-flight")) config.naming.max_in_flight = flags.naming.max_in_flight;
  if (given("--fallback")) config.naming.fallback = flags.naming.fallback;
  if (given("--fallback-on-error")) config.naming.fallback_on_error = flags.naming.fallback_on_error;
  if (given("--stopwords")) config.naming.stopwords = flags.naming.stopwords;
  if (given("--emoji-map")) config.naming.emoji_map = flags.naming.emoji_map;

  if (active == sweep) return cmd_sweep(config, out, err);
  if (active == stability) return cmd_stability(config, out, err);
  if (active == sankey_cmd) return cmd_sankey(config, out, err);
  return cmd_name(config, out, err);
}

}  // namespace clustab::cli
