#include <doctest.h>

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "clustab/gmm.hpp"
#include "clustab/gmm_kernels.hpp"
#include "clustab/kmeans.hpp"
#include "clustab/metrics.hpp"
#include "clustab/rng.hpp"
#include "clustab/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace clustab;
using namespace clustab::gmm;
using testing::error_code_of;

namespace {

MixtureModel make_model(std::vector<double> weights, std::vector<double> means, std::vector<double> vars,
                        std::size_t d) {
  MixtureModel m;
  m.k = weights.size();
  m.d = d;
  m.weights = std::move(weights);
  m.means = RowMatrix(m.k, d);
  m.means.data = std::move(means);
  m.variances = RowMatrix(m.k, d);
  m.variances.data = std::move(vars);
  return m;
}

EmbeddingMatrix column(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return EmbeddingMatrix::with_index_ids(std::move(xs), n, 1);
}

Responsibilities resp_from(std::size_t n, std::size_t k, std::vector<double> values) {
  Responsibilities r{RowMatrix(n, k)};
  r.prob.data = std::move(values);
  return r;
}

/// Two 1-d blobs at -10 and +10 with sigma 0.1, 50 points each.
synthetic::LabeledData two_blobs() {
  RowMatrix centers(2, 1);
  centers(0, 0) = -10;
  centers(1, 0) = 10;
  return synthetic::gaussian_blobs(100, centers, 0.1, 3);
}

void check_model_invariants(const MixtureModel& m, double reg_covar) {
  double wsum = 0;
  for (double w : m.weights) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    wsum += w;
  }
  CHECK(std::abs(wsum - 1.0) <= 1e-9);
  CHECK(m.means.rows == m.variances.rows);
  CHECK(m.means.cols == m.variances.cols);
  for (double v : m.variances.data) CHECK(v >= reg_covar);
}

}  // namespace

TEST_CASE("log density examples") {
  const double half_log_2pi = 0.5 * std::log(2 * std::numbers::pi);
  const std::vector<double> zero{0}, one{1};
  CHECK(log_density_diag(zero, zero, one) == doctest::Approx(-half_log_2pi).epsilon(1e-15));
  CHECK(log_density_diag(one, zero, one) == doctest::Approx(-1.4189385332046727).epsilon(1e-14));

  const std::vector<double> x{1, 2}, mu{0, 0}, var{1, 4};
  const double expected = static_cast<double>(std::log(oracle::density_diag(x, mu, var)));
  CHECK(log_density_diag(x, mu, var) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("log density stays finite where linear densities underflow") {
  std::vector<double> x(384, 3.0), mu(384, 0.0), var(384, 1e-2);
  const double l = log_density_diag(x, mu, var);
  CHECK(std::isfinite(l));
  CHECK(l < -1e5);
}

TEST_CASE("e-step with one component") {
  const auto data = column({-3, 0, 1, 7});
  const auto r = e_step(make_model({1.0}, {0.5}, {2.0}, 1), data);
  for (double p : r.resp.prob.data) CHECK(p == 1.0);
}

TEST_CASE("e-step symmetry") {
  const auto data = column({0.0});
  const auto r = e_step(make_model({0.5, 0.5}, {-1, 1}, {1, 1}, 1), data);
  CHECK(r.resp.prob(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.resp.prob(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("e-step matches the scalar posterior") {
  const auto data = column({0.0});
  const auto model = make_model({0.3, 0.7}, {0, 1}, {1, 1}, 1);
  const long double p0 = 0.3L * oracle::density_diag({0.0}, {0.0}, {1.0});
  const long double p1 = 0.7L * oracle::density_diag({0.0}, {1.0}, {1.0});
  const auto r = e_step(model, data);
  CHECK(r.resp.prob(0, 0) == doctest::Approx(static_cast<double>(p0 / (p0 + p1))).epsilon(1e-14));
  CHECK(r.resp.prob(0, 1) == doctest::Approx(static_cast<double>(p1 / (p0 + p1))).epsilon(1e-14));
  CHECK(r.log_likelihood == doctest::Approx(static_cast<double>(std::log(p0 + p1))).epsilon(1e-14));
}

TEST_CASE("e-step rejects mismatched dimensions") {
  const auto data = EmbeddingMatrix::with_index_ids({1, 2}, 1, 2);
  CHECK(error_code_of([&] { e_step(make_model({1.0}, {0}, {1}, 1), data); }) == ErrorCode::DimensionMismatch);
  CHECK(error_code_of([&] { predict(make_model({1.0}, {0}, {1}, 1), data); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("m-step with all mass on one component") {
  const auto data = column({1, 2, 4, 9});
  const double reg = 1e-6;
  const auto m = m_step(resp_from(4, 2, {1, 0, 1, 0, 1, 0, 1, 0}), data, reg);
  CHECK(m.means(0, 0) == doctest::Approx(4.0));
  const double var = ((1 - 4.0) * (1 - 4.0) + 4 + 0 + 25) / 4.0;
  CHECK(m.variances(0, 0) == doctest::Approx(var + reg).epsilon(1e-14));
  check_model_invariants(m, reg);
}

TEST_CASE("m-step with uniform responsibilities") {
  const auto data = EmbeddingMatrix::with_index_ids({1, 5, 2, -1, 0, 3}, 3, 2);
  std::vector<double> r(3 * 3, 1.0 / 3.0);
  const auto m = m_step(resp_from(3, 3, r), data, 1e-6);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(m.weights[j] == doctest::Approx(1.0 / 3.0));
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(m.means(j, c) == doctest::Approx(m.means(0, c)).epsilon(1e-15));
      CHECK(m.variances(j, c) == doctest::Approx(m.variances(0, c)).epsilon(1e-15));
    }
  }
}

TEST_CASE("m-step against hand computation") {
  const std::vector<double> x{0, 1, 3, 6};
  const std::vector<double> g0{0.9, 0.6, 0.3, 0.2};
  const double reg = 1e-6;
  const auto m = m_step(resp_from(4, 2, {0.9, 0.1, 0.6, 0.4, 0.3, 0.7, 0.2, 0.8}), column(x), reg);
  for (std::size_t j = 0; j < 2; ++j) {
    long double mass = 0, sx = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const long double g = j == 0 ? g0[i] : 1 - g0[i];
      mass += g;
      sx += g * x[i];
    }
    const long double mu = sx / mass;
    long double sv = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const long double g = j == 0 ? g0[i] : 1 - g0[i];
      sv += g * (x[i] - mu) * (x[i] - mu);
    }
    CHECK(m.weights[j] == doctest::Approx(static_cast<double>(mass / 4)).epsilon(1e-14));
    CHECK(m.means(j, 0) == doctest::Approx(static_cast<double>(mu)).epsilon(1e-14));
    CHECK(m.variances(j, 0) == doctest::Approx(static_cast<double>(sv / mass + reg)).epsilon(1e-14));
  }
}

TEST_CASE("m-step reseeds an empty component at the least likely point") {
  const auto data = column({0.0, 0.1, -0.1, 0.05, 8.0});
  const double reg = 1e-6;
  const auto m = m_step(resp_from(5, 2, {1, 0, 1, 0, 1, 0, 1, 0, 1, 0}), data, reg);
  CHECK(m.means(1, 0) == 8.0);
  const std::vector<double> xs{0.0, 0.1, -0.1, 0.05, 8.0};
  long double mean = 0, var = 0;
  for (double v : xs) mean += v;
  mean /= 5;
  for (double v : xs) var += (v - mean) * (v - mean);
  var /= 5;
  CHECK(m.variances(1, 0) == doctest::Approx(static_cast<double>(var) + reg).epsilon(1e-12));
  CHECK(m.weights[1] == doctest::Approx((1.0 / 5.0) / (1.0 + 1.0 / 5.0)).epsilon(1e-14));
  check_model_invariants(m, reg);
}

TEST_CASE("fit with k = 1") {
  const auto data = EmbeddingMatrix::with_index_ids({1, 2, 3, 6, 5, 10}, 3, 2);
  const auto r = fit(data, GmmConfig{});
  CHECK(r.partition.labels() == std::vector<Label>{0, 0, 0});
  CHECK(r.model.means(0, 0) == doctest::Approx(3.0));
  CHECK(r.model.means(0, 1) == doctest::Approx(6.0));
  CHECK(r.model.converged);
}

TEST_CASE("fit recovers two separated blobs") {
  const auto blobs = two_blobs();
  GmmConfig cfg;
  cfg.k = 2;
  const auto r = fit(blobs.data, cfg);
  CHECK(metrics::ami(r.partition, blobs.truth).ami == 1.0);
  CHECK(r.partition.occupied_clusters() == 2);
}

TEST_CASE("fit is deterministic") {
  const auto data = synthetic::noise(300, 5, 8);
  GmmConfig cfg;
  cfg.k = 4;
  cfg.seed = 17;
  const auto a = fit(data, cfg);
  const auto b = fit(data, cfg);
  CHECK(a.partition == b.partition);
  CHECK(a.model.means == b.model.means);
  CHECK(a.model.final_log_likelihood == b.model.final_log_likelihood);
}

TEST_CASE("fit errors") {
  const auto data = column({1, 2});
  GmmConfig cfg;
  cfg.k = 3;
  CHECK(error_code_of([&] { fit(data, cfg); }) == ErrorCode::InsufficientData);
  cfg.k = 1;
  cfg.tol = 0;
  CHECK(error_code_of([&] { fit(data, cfg); }) == ErrorCode::InvalidArgument);
  cfg.tol = 1e-3;
  cfg.reg_covar = 0;
  CHECK(error_code_of([&] { fit(data, cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("n_init keeps the best attempt") {
  const auto data = synthetic::noise(200, 3, 2);
  GmmConfig cfg;
  cfg.k = 5;
  cfg.n_init = 4;
  const auto multi = fit(data, cfg);
  cfg.n_init = 1;
  const auto single = fit(data, cfg);
  CHECK(multi.model.final_log_likelihood >= single.model.final_log_likelihood);
}

TEST_CASE("predict agrees with fit") {
  const auto blobs = two_blobs();
  GmmConfig cfg;
  cfg.k = 2;
  const auto r = fit(blobs.data, cfg);
  CHECK(predict(r.model, blobs.data) == r.partition);

  const auto one = make_model({1.0}, {0}, {1}, 1);
  const auto single = predict(one, blobs.data);
  for (auto l : single.labels()) CHECK(l == 0);

  const auto model = make_model({0.5, 0.5}, {-10, 10}, {1, 1}, 1);
  CHECK(predict(model, column({10.0})).label(0) == 1);
  CHECK(predict(model, column({-10.0})).label(0) == 0);
}

TEST_CASE("argmax ties go to the lowest index") {
  const auto r = resp_from(2, 3, {0.25, 0.5, 0.25, 0.4, 0.2, 0.4});
  CHECK(hard_labels(r) == std::vector<Label>{1, 0});
  const auto model = make_model({0.5, 0.5}, {-1, 1}, {1, 1}, 1);
  CHECK(predict(model, column({0.0})).label(0) == 0);
}

TEST_CASE("EM invariants on random data") {
  Rng rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 20 + rng.index(180);
    const std::size_t d = 1 + rng.index(8);
    const std::size_t k = 1 + rng.index(5);
    const auto data = synthetic::noise(n, d, rng.next_u64());
    GmmConfig cfg;
    cfg.k = k;
    cfg.seed = rng.next_u64();
    cfg.init = trial % 2 ? InitMethod::RandomResponsibility : InitMethod::KMeans;
    const auto r = fit(data, cfg);
    check_model_invariants(r.model, cfg.reg_covar);
    const auto& trace = r.model.log_likelihood_trace;
    REQUIRE(trace.size() == r.model.n_iter + 1);
    for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] >= trace[t - 1] - 1e-7 * std::abs(trace[t - 1]));
    const auto e = e_step(r.model, data);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const double p = e.resp.prob(i, j);
        CHECK((p >= 0.0 && p <= 1.0));
        s += p;
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("max_iter caps the iterations") {
  const auto data = synthetic::noise(200, 4, 1);
  GmmConfig cfg;
  cfg.k = 6;
  cfg.max_iter = 2;
  cfg.tol = 1e-12;
  const auto r = fit(data, cfg);
  CHECK(r.model.n_iter == 2);
  CHECK_FALSE(r.model.converged);
}

TEST_CASE("parallel kernels agree with the reference kernels") {
  const auto data = synthetic::noise(517, 37, 4);
  GmmConfig cfg;
  cfg.k = 5;
  cfg.max_iter = 5;
  const auto model = fit(data, cfg, KernelPath::Reference).model;

  RowMatrix rp, rr;
  std::vector<double> lp, lr;
  const double llp = kernels::e_step(model, data, rp, lp);
  const double llr = reference::e_step(model, data, rr, lr);
  CHECK(llp == doctest::Approx(llr).epsilon(1e-12));
  for (std::size_t i = 0; i < rp.data.size(); ++i) CHECK(std::abs(rp.data[i] - rr.data[i]) <= 1e-12);

  const auto mp = kernels::moments(rp, data);
  const auto mr = reference::moments(rp, data);
  for (std::size_t j = 0; j < mp.mass.size(); ++j) CHECK(mp.mass[j] == doctest::Approx(mr.mass[j]).epsilon(1e-12));
  for (std::size_t i = 0; i < mp.means.data.size(); ++i) {
    CHECK(mp.means.data[i] == doctest::Approx(mr.means.data[i]).epsilon(1e-11));
    CHECK(mp.variances.data[i] == doctest::Approx(mr.variances.data[i]).epsilon(1e-10));
  }

  const auto fp = fit(data, [] { GmmConfig c; c.k = 5; return c; }(), KernelPath::Parallel);
  const auto fr = fit(data, [] { GmmConfig c; c.k = 5; return c; }(), KernelPath::Reference);
  CHECK(fp.partition == fr.partition);
}

TEST_CASE("fits do not depend on the thread count") {
#ifdef _OPENMP
  const auto data = synthetic::noise(800, 40, 6);
  GmmConfig cfg;
  cfg.k = 7;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = fit(data, cfg);
  omp_set_num_threads(4);
  const auto four = fit(data, cfg);
  omp_set_num_threads(3);
  const auto three = fit(data, cfg);
  omp_set_num_threads(saved);
  CHECK(one.partition == four.partition);
  CHECK(one.model.means == four.model.means);
  CHECK(one.model.variances == four.model.variances);
  CHECK(one.model.log_likelihood_trace == four.model.log_likelihood_trace);
  CHECK(one.model.log_likelihood_trace == three.model.log_likelihood_trace);
#else
  MESSAGE("built without OpenMP");
#endif
}

TEST_CASE("k-means++ seeding picks distinct well-spread centers") {
  const auto blobs = synthetic::separated_blobs(400, 8, 4, 20.0, 1.0, 12);
  Rng rng(0);
  const auto labels = kmeans::cluster(blobs.data, 4, rng);
  const auto p = Partition(blobs.data.shared_ids(), labels, 4);
  CHECK(metrics::ami(p, blobs.truth).ami == 1.0);
}

TEST_CASE("model json round trip") {
  const auto data = synthetic::noise(100, 3, 9);
  GmmConfig cfg;
  cfg.k = 3;
  cfg.seed = 4;
  const auto m = fit(data, cfg).model;
  const auto back = model_from_json(model_to_json(m));
  CHECK(back.k == m.k);
  CHECK(back.weights == m.weights);
  CHECK(back.means == m.means);
  CHECK(back.variances == m.variances);
  CHECK(back.final_log_likelihood == m.final_log_likelihood);
  CHECK(back.n_iter == m.n_iter);
  CHECK(back.converged == m.converged);
  CHECK(back.config == m.config);
  CHECK(error_code_of([] { model_from_json("{\"k\": 1}"); }) == ErrorCode::ParseError);
}
