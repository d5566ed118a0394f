#include "clustab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

#include "clustab/error.hpp"
#include "clustab/metrics.hpp"
#include "clustab/rng.hpp"
#include "json_util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clustab::harness {
namespace {

std::size_t subsample_size(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total)));
}

/// Sorted so that fraction 1.0 reproduces the input exactly.
std::vector<std::size_t> draw_subset(std::uint64_t master, std::size_t rep, std::size_t population,
                                     std::size_t count) {
  Rng rng(derive_seed(master, rep));
  auto picked = rng.sample_without_replacement(population, count);
  std::sort(picked.begin(), picked.end());
  return picked;
}

struct Context {
  const EmbeddingMatrix& data;
  const gmm::GmmConfig& base;
  KRange range;
  const PerturbationSpec& spec;
  const HarnessOptions& options;
};

const Partition& reference_for(const ReferenceSet& refs, std::size_t k) {
  const auto it = refs.find(k);
  if (it == refs.end()) throw Error(ErrorCode::OutOfRange, "no reference partition for K=" + std::to_string(k));
  return it->second;
}

/// Runs one repetition across all K and stores its AMI row. `fit_one`
/// performs the perturbed fit and returns the AMI against the reference.
template <class PerRep>
StabilityCurve run(const Context& ctx, std::size_t draws, PerRep&& per_rep) {
  if (ctx.range.min < 1 || ctx.range.max < ctx.range.min) {
    throw Error(ErrorCode::InvalidArgument, "invalid K range");
  }
  ReferenceSet owned;
  const ReferenceSet* refs = ctx.options.references;
  if (!refs) {
    owned = fit_references(ctx.data, ctx.base, ctx.range, ctx.options.fitter);
    refs = &owned;
  }
  StabilityCurve curve;
  curve.kind = ctx.spec.kind;
  for (std::size_t k = ctx.range.min; k <= ctx.range.max; ++k) curve.k_values.push_back(k);
  const std::size_t nk = curve.k_values.size();
  curve.per_rep = RowMatrix(draws, nk);

  std::vector<std::exception_ptr> failures(draws);
#ifdef _OPENMP
  const int threads = ctx.options.jobs > 0 ? ctx.options.jobs : omp_get_max_threads();
#else
  const int threads = 1;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(draws); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    try {
      per_rep(r, *refs, curve.per_rep.row(r));
    } catch (...) {
      failures[r] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  curve.mean_ami.assign(nk, 0.0);
  curve.std_ami.assign(nk, 0.0);
  for (std::size_t c = 0; c < nk; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < draws; ++r) sum += curve.per_rep(r, c);
    const double mean = sum / static_cast<double>(draws);
    double sq = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
      const double diff = curve.per_rep(r, c) - mean;
      sq += diff * diff;
    }
    curve.mean_ami[c] = mean;
    curve.std_ami[c] = std::sqrt(sq / static_cast<double>(draws));
  }
  return curve;
}

gmm::FitResult fit_at(const Context& ctx, const EmbeddingMatrix& data, std::size_t k,
                      std::uint64_t seed, std::size_t rep) {
  gmm::GmmConfig config = ctx.base;
  config.k = k;
  config.seed = seed;
  try {
    return ctx.options.fitter(data, config);
  } catch (const Error& e) {
    throw e.with_context("repetition " + std::to_string(rep) + ", K=" + std::to_string(k));
  }
}

}  // namespace

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::DimensionSubsample: return "dimension";
    case PerturbationKind::RowSubsample: return "row";
    case PerturbationKind::SeedVariation: return "seed";
  }
  return "unknown";
}

PerturbationKind parse_kind(const std::string& name) {
  if (name == "dimension" || name == "dimension_subsample" || name == "dim") {
    return PerturbationKind::DimensionSubsample;
  }
  if (name == "row" || name == "row_subsample") return PerturbationKind::RowSubsample;
  if (name == "seed" || name == "seed_variation") return PerturbationKind::SeedVariation;
  throw Error(ErrorCode::InvalidArgument, "unknown stability protocol '" + name + "'");
}

std::size_t PerturbationSpec::draws() const {
  return kind == PerturbationKind::SeedVariation ? static_cast<std::size_t>(seed_last - seed_first + 1)
                                                 : repetitions;
}

void PerturbationSpec::validate(const EmbeddingMatrix& data, std::size_t k_max) const {
  if (kind == PerturbationKind::SeedVariation) {
    if (seed_last < seed_first) throw Error(ErrorCode::InvalidArgument, "seed range is empty");
    return;
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fraction must lie in (0, 1]");
  }
  if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be at least 1");
  if (kind == PerturbationKind::DimensionSubsample && subsample_size(fraction, data.cols()) < 1) {
    throw Error(ErrorCode::InvalidArgument, "fraction keeps no dimensions");
  }
  if (kind == PerturbationKind::RowSubsample && subsample_size(fraction, data.rows()) < k_max) {
    throw Error(ErrorCode::InvalidArgument, "row subsample smaller than K=" + std::to_string(k_max));
  }
}

ReferenceSet fit_references(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                            const gmm::Fitter& fitter) {
  ReferenceSet refs;
  for (std::size_t k = range.min; k <= range.max; ++k) {
    gmm::GmmConfig config = base;
    config.k = k;
    try {
      refs.emplace(k, fitter(data, config).partition);
    } catch (const Error& e) {
      throw e.with_context("reference fit, K=" + std::to_string(k));
    }
  }
  return refs;
}

StabilityCurve dimension_stability(const EmbeddingMatrix& data, const gmm::GmmConfig& base,
                                   KRange range, const PerturbationSpec& spec,
                                   const HarnessOptions& options) {
  if (spec.kind != PerturbationKind::DimensionSubsample) {
    throw Error(ErrorCode::InvalidArgument, "dimension_stability needs a dimension_subsample spec");
  }
  spec.validate(data, range.max);
  const Context ctx{data, base, range, spec, options};
  const std::size_t keep = subsample_size(spec.fraction, data.cols());
  return run(ctx, spec.repetitions, [&](std::size_t r, const ReferenceSet& refs, std::span<double> out) {
    const auto columns = draw_subset(spec.master_seed, r, data.cols(), keep);
    const EmbeddingMatrix reduced = data.select_columns(columns);
    for (std::size_t c = 0; c < out.size(); ++c) {
      const std::size_t k = range.min + c;
      const auto fitted = fit_at(ctx, reduced, k, base.seed, r);
      out[c] = metrics::ami(fitted.partition, reference_for(refs, k)).ami;
    }
  });
}

StabilityCurve row_stability(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                             const PerturbationSpec& spec, const HarnessOptions& options) {
  if (spec.kind != PerturbationKind::RowSubsample) {
    throw Error(ErrorCode::InvalidArgument, "row_stability needs a row_subsample spec");
  }
  spec.validate(data, range.max);
  const Context ctx{data, base, range, spec, options};
  const std::size_t keep = subsample_size(spec.fraction, data.rows());
  return run(ctx, spec.repetitions, [&](std::size_t r, const ReferenceSet& refs, std::span<double> out) {
    const auto rows = draw_subset(spec.master_seed, r, data.rows(), keep);
    const EmbeddingMatrix sample = data.select_rows(rows);
    for (std::size_t c = 0; c < out.size(); ++c) {
      const std::size_t k = range.min + c;
      const auto fitted = fit_at(ctx, sample, k, base.seed, r);
      const Partition& ref = reference_for(refs, k);
      if (spec.row_compare == RowComparison::Predict) {
        out[c] = metrics::ami(gmm::predict(fitted.model, data), ref).ami;
      } else {
        const auto [own, restricted] = intersect_partitions(fitted.partition, ref);
        out[c] = metrics::ami(own, restricted).ami;
      }
    }
  });
}

StabilityCurve seed_stability(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                              const PerturbationSpec& spec, const HarnessOptions& options) {
  if (spec.kind != PerturbationKind::SeedVariation) {
    throw Error(ErrorCode::InvalidArgument, "seed_stability needs a seed_variation spec");
  }
  spec.validate(data, range.max);
  const Context ctx{data, base, range, spec, options};
  return run(ctx, spec.draws(), [&](std::size_t r, const ReferenceSet& refs, std::span<double> out) {
    const std::uint64_t seed = spec.seed_first + r;
    for (std::size_t c = 0; c < out.size(); ++c) {
      const std::size_t k = range.min + c;
      const auto fitted = fit_at(ctx, data, k, seed, r);
      out[c] = metrics::ami(fitted.partition, reference_for(refs, k)).ami;
    }
  });
}

StabilityCurve run_protocol(const EmbeddingMatrix& data, const gmm::GmmConfig& base, KRange range,
                            const PerturbationSpec& spec, const HarnessOptions& options) {
  switch (spec.kind) {
    case PerturbationKind::DimensionSubsample: return dimension_stability(data, base, range, spec, options);
    case PerturbationKind::RowSubsample: return row_stability(data, base, range, spec, options);
    case PerturbationKind::SeedVariation: return seed_stability(data, base, range, spec, options);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown protocol");
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string curve_csv(const StabilityCurve& curve) {
  std::string out = "k,mean_ami,std_ami\n";
  for (std::size_t c = 0; c < curve.k_values.size(); ++c) {
    out += std::to_string(curve.k_values[c]) + "," + fmt(curve.mean_ami[c]) + "," + fmt(curve.std_ami[c]) + "\n";
  }
  return out;
}

std::string curve_per_rep_csv(const StabilityCurve& curve) {
  std::string out = "repetition";
  for (auto k : curve.k_values) out += ",k" + std::to_string(k);
  out += "\n";
  for (std::size_t r = 0; r < curve.per_rep.rows; ++r) {
    out += std::to_string(r);
    for (std::size_t c = 0; c < curve.per_rep.cols; ++c) out += "," + fmt(curve.per_rep(r, c));
    out += "\n";
  }
  return out;
}

std::string curve_json(const StabilityCurve& curve) {
  detail::Json j;
  j["kind"] = to_string(curve.kind);
  j["k"] = curve.k_values;
  j["mean_ami"] = curve.mean_ami;
  j["std_ami"] = curve.std_ami;
  detail::Json reps = detail::Json::array();
  for (std::size_t r = 0; r < curve.per_rep.rows; ++r) {
    const auto row = curve.per_rep.row(r);
    reps.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["per_rep"] = std::move(reps);
  return j.dump(2) + "\n";
}

std::string combined_csv(const std::vector<StabilityCurve>& curves) {
  std::string out = "k";
  for (const auto& c : curves) out += "," + to_string(c.kind) + "_mean," + to_string(c.kind) + "_std";
  out += "\n";
  if (curves.empty()) return out;
  for (std::size_t i = 0; i < curves.front().k_values.size(); ++i) {
    out += std::to_string(curves.front().k_values[i]);
    for (const auto& c : curves) out += "," + fmt(c.mean_ami[i]) + "," + fmt(c.std_ami[i]);
    out += "\n";
  }
  return out;
}

}  // namespace clustab::harness
