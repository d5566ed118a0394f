#include <doctest.h>

#include <atomic>
#include <json.hpp>

#include "clustab/harness.hpp"
#include "clustab/synthetic.hpp"
#include "support.hpp"

using namespace clustab;
using namespace clustab::harness;
using testing::error_code_of;

namespace {

const synthetic::LabeledData& blobs() {
  static const auto b = synthetic::separated_blobs(240, 12, 4, 12.0, 1.0, 8);
  return b;
}

PerturbationSpec spec(PerturbationKind kind, double fraction, std::size_t reps) {
  PerturbationSpec s;
  s.kind = kind;
  s.fraction = fraction;
  s.repetitions = reps;
  s.seed_first = 1;
  s.seed_last = reps;
  return s;
}

void check_all_one(const StabilityCurve& c) {
  for (double v : c.per_rep.data) CHECK(v == 1.0);
  for (double v : c.mean_ami) CHECK(v == 1.0);
  for (double v : c.std_ami) CHECK(v == 0.0);
}

}  // namespace

TEST_CASE("full-fraction and self-seed controls are exactly one") {
  const KRange range{1, 5};
  check_all_one(dimension_stability(blobs().data, {}, range, spec(PerturbationKind::DimensionSubsample, 1.0, 3)));
  check_all_one(row_stability(blobs().data, {}, range, spec(PerturbationKind::RowSubsample, 1.0, 3)));
  auto self = spec(PerturbationKind::SeedVariation, 0.8, 1);
  self.seed_first = self.seed_last = 0;
  check_all_one(seed_stability(blobs().data, {}, range, self));
}

TEST_CASE("K = 1 is one for every protocol") {
  for (auto kind : {PerturbationKind::DimensionSubsample, PerturbationKind::RowSubsample, PerturbationKind::SeedVariation}) {
    const auto c = run_protocol(blobs().data, {}, {1, 1}, spec(kind, 0.5, 4));
    for (double v : c.per_rep.data) CHECK(v == 1.0);
  }
}

TEST_CASE("separated blobs are stable at their true K") {
  const KRange range{4, 4};
  for (auto kind : {PerturbationKind::DimensionSubsample, PerturbationKind::RowSubsample, PerturbationKind::SeedVariation}) {
    const auto c = run_protocol(blobs().data, {}, range, spec(kind, 0.8, 8));
    CHECK(c.mean_ami[0] >= 0.95);
  }
}

TEST_CASE("curve shape and bounds") {
  const auto c = dimension_stability(blobs().data, {}, {2, 6}, spec(PerturbationKind::DimensionSubsample, 0.5, 5));
  CHECK(c.k_values == std::vector<std::size_t>{2, 3, 4, 5, 6});
  CHECK(c.mean_ami.size() == 5);
  CHECK(c.std_ami.size() == 5);
  CHECK(c.per_rep.rows == 5);
  CHECK(c.per_rep.cols == 5);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(c.std_ami[j] >= 0.0);
    CHECK(c.mean_ami[j] <= 1.0 + 1e-9);
    double mean = 0, var = 0;
    for (std::size_t r = 0; r < 5; ++r) mean += c.per_rep(r, j);
    mean /= 5;
    for (std::size_t r = 0; r < 5; ++r) var += (c.per_rep(r, j) - mean) * (c.per_rep(r, j) - mean);
    CHECK(c.mean_ami[j] == doctest::Approx(mean).epsilon(1e-14));
    CHECK(c.std_ami[j] == doctest::Approx(std::sqrt(var / 5)).epsilon(1e-12));
  }
  for (double v : c.per_rep.data) CHECK((v >= -1.0 && v <= 1.0));
}

TEST_CASE("one repetition gives zero spread") {
  const auto c = row_stability(blobs().data, {}, {1, 6}, spec(PerturbationKind::RowSubsample, 0.7, 1));
  for (double s : c.std_ami) CHECK(s == 0.0);
}

TEST_CASE("curves are reproducible and thread-count invariant") {
  const auto s = spec(PerturbationKind::RowSubsample, 0.8, 6);
  HarnessOptions one;
  one.jobs = 1;
  HarnessOptions three;
  three.jobs = 3;
  const auto a = row_stability(blobs().data, {}, {2, 5}, s, one);
  const auto b = row_stability(blobs().data, {}, {2, 5}, s, three);
  CHECK(a.per_rep == b.per_rep);
  CHECK(a.mean_ami == b.mean_ami);
  auto other = s;
  other.master_seed = 1;
  const auto c = row_stability(blobs().data, {}, {2, 5}, other, one);
  CHECK(curve_csv(c) != "");
}

TEST_CASE("references are fitted once per K") {
  std::atomic<int> calls{0};
  HarnessOptions opts;
  opts.fitter = [&calls](const EmbeddingMatrix& d, const gmm::GmmConfig& c) {
    ++calls;
    return gmm::fit(d, c);
  };
  const KRange range{1, 4};
  const std::size_t reps = 5;
  dimension_stability(blobs().data, {}, range, spec(PerturbationKind::DimensionSubsample, 0.8, reps), opts);
  CHECK(calls == static_cast<int>(4 + reps * 4));

  calls = 0;
  const auto refs = fit_references(blobs().data, {}, range, opts.fitter);
  CHECK(calls == 4);
  opts.references = &refs;
  calls = 0;
  seed_stability(blobs().data, {}, range, spec(PerturbationKind::SeedVariation, 0.8, reps), opts);
  CHECK(calls == static_cast<int>(reps * 4));
  calls = 0;
  row_stability(blobs().data, {}, range, spec(PerturbationKind::RowSubsample, 0.8, reps), opts);
  CHECK(calls == static_cast<int>(reps * 4));
}

TEST_CASE("row subsample inside one blob agrees at K = 1") {
  const auto& b = blobs();
  const auto members = b.truth.members(0);
  const auto one_blob = b.data.select_rows(members);
  const auto c = row_stability(one_blob, {}, {1, 1}, spec(PerturbationKind::RowSubsample, 0.5, 3));
  CHECK(c.mean_ami[0] == 1.0);
}

TEST_CASE("row comparison by prediction") {
  auto s = spec(PerturbationKind::RowSubsample, 0.8, 4);
  s.row_compare = RowComparison::Predict;
  const auto c = row_stability(blobs().data, {}, {4, 4}, s);
  CHECK(c.mean_ami[0] >= 0.95);
  s.fraction = 1.0;
  check_all_one(row_stability(blobs().data, {}, {1, 4}, s));
}

TEST_CASE("spec validation") {
  const auto& data = blobs().data;
  auto s = spec(PerturbationKind::DimensionSubsample, 0.05, 2);
  CHECK(error_code_of([&] { s.validate(data, 4); }) == ErrorCode::InvalidArgument);
  s = spec(PerturbationKind::RowSubsample, 0.01, 2);
  CHECK(error_code_of([&] { s.validate(data, 4); }) == ErrorCode::InvalidArgument);
  s = spec(PerturbationKind::RowSubsample, 0.5, 0);
  CHECK(error_code_of([&] { s.validate(data, 4); }) == ErrorCode::InvalidArgument);
  s = spec(PerturbationKind::RowSubsample, 1.5, 1);
  CHECK(error_code_of([&] { s.validate(data, 4); }) == ErrorCode::InvalidArgument);
  s = spec(PerturbationKind::DimensionSubsample, 0.8, 2);
  CHECK(error_code_of([&] { row_stability(data, {}, {1, 2}, s); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { parse_kind("bootstrap"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("repetition errors carry context") {
  HarnessOptions opts;
  int seen = 0;
  opts.jobs = 1;
  opts.fitter = [&seen](const EmbeddingMatrix& d, const gmm::GmmConfig& c) {
    if (c.seed == 3 && c.k == 2) throw Error(ErrorCode::Numeric, "boom");
    ++seen;
    return gmm::fit(d, c);
  };
  try {
    seed_stability(blobs().data, {}, {1, 2}, spec(PerturbationKind::SeedVariation, 0.8, 4), opts);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
    const std::string msg = e.what();
    CHECK(msg.find("repetition 2") != std::string::npos);
    CHECK(msg.find("K=2") != std::string::npos);
  }
}

TEST_CASE("curve exports") {
  const auto c = seed_stability(blobs().data, {}, {1, 3}, spec(PerturbationKind::SeedVariation, 0.8, 2));
  const auto csv = curve_csv(c);
  CHECK(csv.rfind("k,mean_ami,std_ami\n1,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto wide = curve_per_rep_csv(c);
  CHECK(wide.rfind("repetition,k1,k2,k3\n0,", 0) == 0);
  const auto j = nlohmann::json::parse(curve_json(c));
  CHECK(j["kind"] == "seed");
  CHECK(j["mean_ami"].size() == 3);
  const auto combined = combined_csv({c, c});
  CHECK(combined.rfind("k,seed_mean,seed_std,seed_mean,seed_std\n", 0) == 0);
}
