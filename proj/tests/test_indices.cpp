#include "doctest.h"
#include "oracles.hpp"

#include "sensi/errors.hpp"
#include "sensi/indices.hpp"
#include "sensi/models.hpp"
#include "sensi/rng.hpp"
#include "sensi/sampling.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

using namespace sensi;

namespace {

std::pair<JointSample, TildeSample>
model_samples(const ModelFunction& model, std::size_t n, std::size_t n_prime, std::uint64_t seed)
{
  JointSample joint;
  joint.x = sample_inputs(model.law, n, child_seed(seed, 0));
  joint.y = evaluate_model(model, joint.x);
  return { joint, TildeSample{ sample_inputs(model.law, n_prime, child_seed(seed, 1)) } };
}

EstimatorOptions
fixed_options(double h1, double h2)
{
  EstimatorOptions o;
  o.mean_fit.bandwidth = FixedBandwidth{ h1 };
  o.variance_fit.bandwidth = FixedBandwidth{ h2 };
  return o;
}

std::vector<double>
column(const Eigen::MatrixXd& m, Eigen::Index c)
{
  return { m.col(c).data(), m.col(c).data() + m.rows() };
}

bool
same_report(const SensitivityReport& a, const SensitivityReport& b)
{
  if (a.inputs.size() != b.inputs.size() || a.var_y != b.var_y ||
      a.replicates.size() != b.replicates.size())
    return false;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const auto& p = a.inputs[i];
    const auto& q = b.inputs[i];
    const auto same = [](double u, double v) { return u == v || (std::isnan(u) && std::isnan(v)); };
    if (!same(p.s1_raw, q.s1_raw) || !same(p.s2_raw, q.s2_raw) || !same(p.h1, q.h1) ||
        !same(p.h2, q.h2) || !same(p.s1_ci.low, q.s1_ci.low) || !same(p.s1_ci.high, q.s1_ci.high) ||
        !same(p.s2_ci.low, q.s2_ci.low) || !same(p.s2_ci.high, q.s2_ci.high))
      return false;
  }
  for (std::size_t k = 0; k < a.replicates.size(); ++k)
    if (a.replicates[k].s1_raw != b.replicates[k].s1_raw ||
        a.replicates[k].s2_raw != b.replicates[k].s2_raw)
      return false;
  return true;
}

} // namespace

TEST_CASE("T1 is the unbiased variance of the fitted means")
{
  CHECK(estimate_t1(std::vector<double>{ 3, 3, 3, 3 }) == 0.0);
  CHECK(estimate_t1(std::vector<double>{ 0, 2 }) == 2.0);
  CHECK_THROWS_AS(estimate_t1(std::vector<double>{ 1 }), InvalidArgument);
  CHECK(unbiased_variance(std::vector<double>{ 1, 2, 3, 4 }) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("T2 is the mean of the fitted variances")
{
  CHECK(estimate_t2(std::vector<double>{ 0, 0, 0 }) == 0.0);
  CHECK(estimate_t2(std::vector<double>{ 1, 3 }) == 2.0);
  CHECK_THROWS_AS(estimate_t2(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("Jacques pair index closed form")
{
  CHECK(jacques_index_analytic(-0.2, 0.4) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(jacques_index_analytic(0.0, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  for (double rho : { -0.9, 0.0, 0.7 })
    CHECK(jacques_index_analytic(rho, 0.0) == 0.5);
  CHECK(jacques_index_analytic(-0.2, 0.4) == additive_gaussian(-0.2, 0.4).indices.extra.at("S23"));
  CHECK_THROWS_AS(jacques_index_analytic(-2.0, 1.0), InvalidArgument);
}

TEST_CASE("clipping and quantiles")
{
  CHECK(clip_unit(-0.2) == 0.0);
  CHECK(clip_unit(1.3) == 1.0);
  CHECK(clip_unit(0.4) == 0.4);
  CHECK(quantile({ 4, 1, 3, 2 }, 0.0) == 1.0);
  CHECK(quantile({ 4, 1, 3, 2 }, 1.0) == 4.0);
  CHECK(quantile({ 4, 1, 3, 2 }, 0.5) == 2.5);
  CHECK(quantile({ 10, 20 }, 0.25) == 12.5);
}

TEST_CASE("deterministic output Y = X1 has index one")
{
  ModelFunction m{ "identity", 1, [](std::span<const double> x) { return x[0]; },
                   IndependentLaw{ { { Marginal::Kind::Uniform, 0, 1 } } } };
  const auto [joint, tilde] = model_samples(m, 200, 2000, 3);
  const auto r = estimate_indices(joint, tilde, EstimatorOptions{});
  REQUIRE(r.inputs.size() == 1);
  CHECK(r.inputs[0].s1_raw >= 0.95);
  CHECK(r.inputs[0].s1_raw <= 1.05);
  CHECK(r.inputs[0].s2_raw >= 0.95);
  CHECK(r.inputs[0].s2_raw <= 1.05);
  CHECK(r.n == 200);
  CHECK(r.n_prime == 2000);
  CHECK(r.interval_method == "none");
  CHECK(r.inputs[0].s1_ci.empty());
}

TEST_CASE("estimate_indices matches a hand pipeline built on naive weighted least squares")
{
  const auto am = additive_gaussian(0.3, 0.8);
  auto [joint, tilde] = model_samples(am.model, 60, 40, 21);
  const double h1 = 0.6;
  const double h2 = 0.9;
  const auto r = estimate_indices(joint, tilde, fixed_options(h1, h2));
  const auto kernel = [](double u) { return KernelSpec{}.eval(u); };
  const double var_y = oracle::mean_var(joint.y).second;
  CHECK(r.var_y == doctest::Approx(var_y).epsilon(1e-12));
  for (Eigen::Index i = 0; i < 3; ++i) {
    const auto x = column(joint.x, i);
    std::vector<double> r2(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
      r2[k] = std::pow(joint.y[k] - oracle::naive_wls(x, joint.y, x[k], h1, 1, kernel)[0], 2);
    std::vector<double> m_t;
    double t2 = 0.0;
    for (Eigen::Index j = 0; j < tilde.x.rows(); ++j) {
      const double xt = tilde.x(j, i);
      m_t.push_back(oracle::naive_wls(x, joint.y, xt, h1, 1, kernel)[0]);
      t2 += std::max(0.0, oracle::naive_wls(x, r2, xt, h2, 1, kernel)[0]);
    }
    t2 /= static_cast<double>(tilde.x.rows());
    const double t1 = oracle::mean_var(m_t).second;
    const auto& got = r.inputs[static_cast<std::size_t>(i)];
    CAPTURE(i);
    CHECK(got.t1 == doctest::Approx(t1).epsilon(1e-8));
    CHECK(got.t2 == doctest::Approx(t2).epsilon(1e-8));
    CHECK(got.s1_raw == doctest::Approx(t1 / var_y).epsilon(1e-8));
    CHECK(got.s2_raw == doctest::Approx(1.0 - t2 / var_y).epsilon(1e-8));
    CHECK(got.h1 == h1);
    CHECK(got.h2 == h2);
  }
}

TEST_CASE("replications report the mean of independent runs")
{
  const auto am = additive_gaussian(-0.2, 0.4);
  EstimatorOptions o;
  o.seed = 2024;
  const auto r = replicate_indices(am.model, 50, 1000, 20, o);
  CHECK(r.replications == 20);
  CHECK(r.interval_method == "replication");
  REQUIRE(r.replicates.size() == 60);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> s1;
    for (const auto& row : r.replicates)
      if (row.input == i)
        s1.push_back(row.s1_raw);
    REQUIRE(s1.size() == 20);
    CAPTURE(i);
    CHECK(r.inputs[i].s1_raw == doctest::Approx(oracle::mean_var(s1).first).epsilon(1e-12));
    CHECK(r.inputs[i].s1_clipped == clip_unit(r.inputs[i].s1_raw));
    CHECK(r.inputs[i].s1_ci.low == doctest::Approx(quantile(s1, 0.025)).epsilon(1e-12));
    CHECK(r.inputs[i].s1_ci.high == doctest::Approx(quantile(s1, 0.975)).epsilon(1e-12));
  }
  // replication r uses the same samples as a direct run on child seeds 2r, 2r + 1
  JointSample joint;
  joint.x = sample_inputs(am.model.law, 50, child_seed(o.seed, 6));
  joint.y = evaluate_model(am.model, joint.x);
  const TildeSample tilde{ sample_inputs(am.model.law, 1000, child_seed(o.seed, 7)) };
  const auto direct = estimate_indices(joint, tilde, EstimatorOptions{});
  for (const auto& row : r.replicates)
    if (row.replicate == 3)
      CHECK(row.s1_raw == direct.inputs[row.input].s1_raw);
}

TEST_CASE("raw S1 is nonnegative and clipped values stay in [0, 1]")
{
  const auto am = additive_gaussian(0.5, 2.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [joint, tilde] = model_samples(am.model, 30, 200, seed);
    const auto r = estimate_indices(joint, tilde, EstimatorOptions{});
    for (const auto& in : r.inputs) {
      CHECK(in.s1_raw >= 0.0);
      CHECK(in.t2 >= 0.0);
      CHECK(in.s1_clipped == clip_unit(in.s1_raw));
      CHECK(in.s2_clipped == clip_unit(in.s2_raw));
      CHECK(in.s1_clipped >= 0.0);
      CHECK(in.s2_clipped <= 1.0);
    }
  }
}

TEST_CASE("T1 + T2 recovers the output variance")
{
  const auto am = additive_gaussian(-0.2, 0.4);
  std::vector<double> gap(3, 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [joint, tilde] = model_samples(am.model, 400, 4000, 300 + seed);
    const auto r = estimate_indices(joint, tilde, EstimatorOptions{});
    for (std::size_t i = 0; i < 3; ++i)
      gap[i] += std::abs(r.inputs[i].t1 + r.inputs[i].t2 - r.var_y) / r.var_y / 20.0;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CAPTURE(i);
    CHECK(gap[i] <= 0.15);
  }
}

TEST_CASE("MSE of S1 does not increase with n")
{
  const auto am = additive_gaussian(-0.2, 0.4);
  const double truth = am.indices.s[0];
  std::vector<double> mse;
  for (std::size_t n : { 50u, 100u, 200u, 400u }) {
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto [joint, tilde] = model_samples(am.model, n, 2000, 7000 + seed);
      acc += std::pow(estimate_indices(joint, tilde, EstimatorOptions{}).inputs[0].s1_raw - truth, 2);
    }
    mse.push_back(acc / 50.0);
  }
  CAPTURE(mse[0]);
  CAPTURE(mse[1]);
  CAPTURE(mse[2]);
  CAPTURE(mse[3]);
  for (std::size_t k = 1; k < mse.size(); ++k)
    CHECK(mse[k] <= mse[k - 1]);
}

TEST_CASE("reports are bit-identical across runs and thread counts")
{
  const auto am = additive_gaussian(-0.2, 0.4);
  const auto [joint, tilde] = model_samples(am.model, 80, 300, 5);
  EstimatorOptions o;
  o.bootstrap_reps = 20;
  o.seed = 99;
  const int threads = omp_get_max_threads();
  const auto a = estimate_indices(joint, tilde, o);
  const auto b = estimate_indices(joint, tilde, o);
  omp_set_num_threads(1);
  const auto c = estimate_indices(joint, tilde, o);
  omp_set_num_threads(4);
  const auto d = estimate_indices(joint, tilde, o);
  omp_set_num_threads(threads);
  CHECK(same_report(a, b));
  CHECK(same_report(a, c));
  CHECK(same_report(a, d));
  o.seed = 100;
  CHECK_FALSE(same_report(a, estimate_indices(joint, tilde, o)));
}

TEST_CASE("rescaling Y leaves the indices unchanged at fixed bandwidths")
{
  const auto am = additive_gaussian(0.3, 0.8);
  const auto [joint, tilde] = model_samples(am.model, 100, 500, 8);
  const auto o = fixed_options(0.5, 0.7);
  const auto base = estimate_indices(joint, tilde, o);
  for (double c : { -3.0, 0.01, 250.0 }) {
    JointSample scaled = joint;
    for (double& v : scaled.y)
      v *= c;
    const auto r = estimate_indices(scaled, tilde, o);
    for (std::size_t i = 0; i < 3; ++i) {
      CAPTURE(c);
      CHECK(std::abs(r.inputs[i].s1_raw - base.inputs[i].s1_raw) <= 1e-10);
      CHECK(std::abs(r.inputs[i].s2_raw - base.inputs[i].s2_raw) <= 1e-10);
    }
  }
}

TEST_CASE("shifting inputs and tilde together leaves the indices unchanged")
{
  const auto am = additive_gaussian(0.3, 0.8);
  const auto [joint, tilde] = model_samples(am.model, 100, 500, 9);
  const auto o = fixed_options(0.5, 0.7);
  const auto base = estimate_indices(joint, tilde, o);
  JointSample moved = joint;
  TildeSample moved_tilde = tilde;
  moved.x.array() += 7.5;
  moved_tilde.x.array() += 7.5;
  const auto r = estimate_indices(moved, moved_tilde, o);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(r.inputs[i].s1_raw - base.inputs[i].s1_raw) <= 1e-9);
    CHECK(std::abs(r.inputs[i].s2_raw - base.inputs[i].s2_raw) <= 1e-9);
  }
}

TEST_CASE("bootstrap intervals bracket the estimates")
{
  const auto am = additive_gaussian(-0.2, 0.4);
  const auto [joint, tilde] = model_samples(am.model, 100, 500, 10);
  EstimatorOptions o;
  o.bootstrap_reps = 60;
  o.seed = 3;
  const auto r = estimate_indices(joint, tilde, o);
  CHECK(r.interval_method == "bootstrap");
  CHECK(r.bootstrap_reps == 60);
  CHECK(r.replicates.size() == 180);
  for (const auto& in : r.inputs) {
    CHECK_FALSE(in.s1_ci.empty());
    CHECK(in.s1_ci.low < in.s1_ci.high);
    CHECK(in.s2_ci.low < in.s2_ci.high);
    CHECK(in.s1_ci.low <= in.s1_raw + 0.05);
    CHECK(in.s1_ci.high >= in.s1_raw - 0.05);
  }
  std::vector<double> rep0;
  for (const auto& row : r.replicates)
    if (row.input == 0)
      rep0.push_back(row.s1_raw);
  CHECK(r.inputs[0].s1_ci.low == doctest::Approx(quantile(rep0, 0.025)).epsilon(1e-12));
  CHECK(r.inputs[0].s1_ci.high == doctest::Approx(quantile(rep0, 0.975)).epsilon(1e-12));

  o.freeze_bandwidths = true;
  const auto frozen = estimate_indices(joint, tilde, o);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(frozen.inputs[i].s1_raw == r.inputs[i].s1_raw);
  o.ci_level = 1.5;
  CHECK_THROWS_AS(estimate_indices(joint, tilde, o), InvalidArgument);
}

TEST_CASE("missing local data is reported with the input index")
{
  Rng rng(4);
  JointSample joint;
  joint.x.resize(40, 2);
  for (Eigen::Index k = 0; k < 40; ++k) {
    joint.x(k, 0) = rng.uniform();
    joint.x(k, 1) = k < 20 ? rng.uniform(0.0, 0.2) : rng.uniform(0.8, 1.0);
    joint.y.push_back(joint.x(k, 0) + joint.x(k, 1));
  }
  TildeSample tilde{ Eigen::MatrixXd(3, 2) };
  tilde.x << 0.2, 0.1, 0.5, 0.5, 0.8, 0.9;
  EstimatorOptions o = fixed_options(0.1, 0.1);
  o.mean_fit.kernel.family = KernelFamily::Epanechnikov;
  o.variance_fit.kernel.family = KernelFamily::Epanechnikov;
  try {
    estimate_indices(joint, tilde, o);
    FAIL("expected NoLocalData");
  } catch (const NoLocalData& e) {
    CHECK(e.input_index() == 1);
    CHECK(e.point() == 0.5);
  }
}

TEST_CASE("constant output is degenerate")
{
  JointSample joint;
  joint.x = Eigen::MatrixXd::Random(20, 2);
  joint.y.assign(20, 4.0);
  TildeSample tilde{ Eigen::MatrixXd::Random(50, 2) };
  CHECK_THROWS_AS(estimate_indices(joint, tilde, EstimatorOptions{}), DegenerateOutput);
}

TEST_CASE("sample shape is validated")
{
  JointSample small;
  small.x = Eigen::MatrixXd::Random(5, 1);
  small.y.assign(5, 1.0);
  CHECK_THROWS_AS(small.validate(), InvalidArgument);
  JointSample joint;
  joint.x = Eigen::MatrixXd::Random(20, 2);
  joint.y = std::vector<double>(20);
  for (std::size_t k = 0; k < 20; ++k)
    joint.y[k] = static_cast<double>(k);
  TildeSample wrong{ Eigen::MatrixXd::Random(50, 3) };
  CHECK_THROWS_AS(estimate_indices(joint, wrong, EstimatorOptions{}), InvalidArgument);
}

TEST_CASE("Ratto index of a noiseless dependence is one")
{
  GaussianSpec g{ Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2) };
  ModelFunction m{ "x1", 2, [](std::span<const double> x) { return x[0]; }, g };
  CHECK(ratto_index(ConditionalSampler(g, 0), m, 100, 50, 1) >= 0.95);
}

TEST_CASE("Ratto index of an unrelated input is near zero")
{
  GaussianSpec g{ Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2) };
  ModelFunction m{ "x2", 2, [](std::span<const double> x) { return x[1]; }, g };
  const double s = ratto_index(ConditionalSampler(g, 0), m, 100, 50, 2);
  CHECK(s >= 0.0);
  CHECK(s <= 0.05);
  // oracle: with Y independent of X1, SSB/SST is r times the variance of
  // n means of r iid draws over the total sum of squares, about 1 / r
  CHECK(std::abs(s - 1.0 / 50.0) <= 0.01);
}

TEST_CASE("Ratto index on the additive model")
{
  const auto am = additive_gaussian(-0.2, 0.4);
  const auto& g = std::get<GaussianSpec>(am.model.law);
  // a single run has a standard error near 0.04 at n = 200, so the
  // tolerance applies to the mean over independent seeds
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    mean += ratto_index(ConditionalSampler(g, 1), am.model, 200, 100, seed) / 20.0;
  CHECK(std::abs(mean - 0.4232) <= 0.05);
  CHECK_THROWS_AS(ratto_index(ConditionalSampler(g, 1), am.model, 1, 100, 5), InvalidArgument);
  CHECK_THROWS_AS(ratto_index(ConditionalSampler(g, 1), am.model, 100, 1, 5), InvalidArgument);
}
