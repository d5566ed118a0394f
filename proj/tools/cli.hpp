#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "clustab/gmm.hpp"
#include "clustab/naming.hpp"

namespace clustab::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kIoError = 2,
  kNumericError = 3,
  kBackendUnavailable = 4,
};

struct NamingSettings {
  std::string backend_url;
  std::string model;
  std::string token_env = "CLUSTAB_API_TOKEN";
  std::string response_field = "text";
  int timeout_s = 30;
  std::size_t retries = 3;
  std::size_t max_in_flight = 4;
  bool fallback = false;
  bool fallback_on_error = false;
  std::string texts;
  std::string stopwords;
  std::string emoji_map;
};

/// Effective configuration of a run. Defaults reproduce the reference
/// method: K 1..20, seed 0, 2000 EM iterations, 80% subsamples x 100,
/// seeds 1..100, flow threshold 150.
struct RunConfig {
  std::string input;
  std::string format = "csv";
  std::size_t k_min = 1;
  std::size_t k_max = 20;
  gmm::GmmConfig gmm;
  double fraction = 0.8;
  std::size_t repetitions = 100;
  std::uint64_t seed_first = 1;
  std::uint64_t seed_last = 100;
  std::uint64_t master_seed = 0;
  std::string row_compare = "restrict";
  std::vector<std::string> kinds = {"dimension", "row", "seed"};
  bool fit_reference = false;
  std::string threshold = "150";
  std::string names;  // name table for sankey labels
  NamingSettings naming;
  std::string out = "clustab_out";
  int jobs = 0;

  /// Throws Error(InvalidArgument) on the first inconsistent field.
  void validate() const;
  std::string to_json() const;
  /// Fields present in `text` override those of `base`.
  static RunConfig from_json(const std::string& text);
  static RunConfig from_json(const std::string& text, const RunConfig& base);
};

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_stability(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sankey(const RunConfig& config, std::ostream& out, std::ostream& err);
/// `backend` overrides the configured HTTP backend (used by tests).
int cmd_name(const RunConfig& config, std::ostream& out, std::ostream& err,
             naming::NamingBackend* backend = nullptr);

/// Full command line entry point.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace clustab::cli
