#include "sensi/indices.hpp"

#include "parallel.hpp"
#include "sensi/bandwidth.hpp"
#include "sensi/errors.hpp"
#include "sensi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sensi {

namespace {

std::vector<double>
column(const Eigen::MatrixXd& m, std::size_t c)
{
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    out[static_cast<std::size_t>(r)] = m(r, static_cast<Eigen::Index>(c));
  return out;
}

// Relative threshold below which the output sample counts as constant.
double
checked_output_variance(std::span<const double> y, const std::string& context)
{
  const double var_y = unbiased_variance(y);
  double scale = 0.0;
  for (double v : y)
    scale += v * v;
  scale /= static_cast<double>(y.size());
  if (!(var_y > 1e-14 * scale) || !std::isfinite(var_y))
    throw DegenerateOutput(context + ": output sample has zero variance (var = " +
                           std::to_string(var_y) + ")");
  return var_y;
}

Interval
percentile_interval(const std::vector<double>& values, double level)
{
  if (values.empty())
    return {};
  const double tail = 0.5 * (1.0 - level);
  return { quantile(values, tail), quantile(values, 1.0 - tail) };
}

void
finish_indices(InputIndices& out, double var_y)
{
  out.s1_raw = out.t1 / var_y;
  out.s2_raw = 1.0 - out.t2 / var_y;
  out.s1_clipped = clip_unit(out.s1_raw);
  out.s2_clipped = clip_unit(out.s2_raw);
}

} // namespace

void
JointSample::validate() const
{
  if (x.cols() < 1)
    throw InvalidArgument("joint sample needs at least one input column");
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw InvalidArgument("joint sample has " + std::to_string(x.rows()) +
                          " input rows but " + std::to_string(y.size()) + " outputs");
  if (y.size() < 10)
    throw InvalidArgument("joint sample needs n >= 10, got " + std::to_string(y.size()));
  if (!x.allFinite() || !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
    throw InvalidArgument("joint sample contains non-finite values");
}

double
unbiased_variance(std::span<const double> values)
{
  if (values.size() < 2)
    throw InvalidArgument("sample variance needs at least 2 values");
  const double mean =
    std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values)
    sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(values.size() - 1);
}

double
estimate_t1(std::span<const double> mhat_tilde)
{
  if (mhat_tilde.size() < 2)
    throw InvalidArgument("T1 needs n' >= 2");
  return unbiased_variance(mhat_tilde);
}

double
estimate_t2(std::span<const double> sigma2_tilde)
{
  if (sigma2_tilde.empty())
    throw InvalidArgument("T2 needs n' >= 1");
  return std::accumulate(sigma2_tilde.begin(), sigma2_tilde.end(), 0.0) /
         static_cast<double>(sigma2_tilde.size());
}

double
jacques_index_analytic(double rho, double sigma)
{
  const double denom = 2.0 + sigma * sigma + 2.0 * rho * sigma;
  if (!(denom > 0.0))
    throw InvalidArgument("2 + sigma^2 + 2 rho sigma must be positive");
  return (1.0 + sigma * sigma + 2.0 * rho * sigma) / denom;
}

void
EstimatorOptions::validate() const
{
  mean_fit.validate();
  variance_fit.validate();
  if (bootstrap_reps < 0)
    throw InvalidArgument("bootstrap replicates must be >= 0");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw InvalidArgument("confidence level must lie in (0, 1)");
}

double
clip_unit(double v)
{
  return std::min(1.0, std::max(0.0, v));
}

double
quantile(std::vector<double> values, double q)
{
  if (values.empty())
    throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

SingleInputFit
fit_single_input(std::span<const double> x, std::span<const double> y,
                 std::span<const double> tilde_x, const EstimatorOptions& options,
                 double h1, double h2)
{
  const RegressionSample sample{ { x.begin(), x.end() }, { y.begin(), y.end() } };
  sample.validate(true);
  const auto& mean_fit = options.mean_fit;

  SingleInputFit out;
  out.h1 = h1 > 0.0 ? h1 : resolve_bandwidth(sample, mean_fit, sample.x, tilde_x);

  const LocalSmoother smoother(sample.x, mean_fit.order, mean_fit.kernel,
                               mean_fit.ridge_factor);
  const auto mhat_x = smoother.predict(sample.y, sample.x, out.h1);
  const auto mhat_tilde = smoother.predict(sample.y, tilde_x, out.h1);
  const auto r2 = squared_residuals(sample, mhat_x);

  const auto variance = h2 > 0.0
                          ? fit_variance(sample.x, r2, options.variance_fit, tilde_x, h2)
                          : fit_variance(sample.x, r2, options.variance_fit, tilde_x);
  out.h2 = variance.h2_used;
  out.t1 = estimate_t1(mhat_tilde);
  out.t2 = estimate_t2(variance.sigma2);
  out.clamped_count = variance.clamped_count;
  return out;
}

SensitivityReport
estimate_indices(const JointSample& joint, const TildeSample& tilde,
                 const EstimatorOptions& options)
{
  joint.validate();
  options.validate();
  if (tilde.dim() != joint.dim())
    throw InvalidArgument("tilde sample has " + std::to_string(tilde.dim()) +
                          " columns, joint sample " + std::to_string(joint.dim()));
  if (tilde.size() < 2)
    throw InvalidArgument("tilde sample needs n' >= 2");
  if (!tilde.x.allFinite())
    throw InvalidArgument("tilde sample contains non-finite values");

  const std::size_t d = joint.dim();
  const std::size_t n = joint.size();

  SensitivityReport report;
  report.var_y = checked_output_variance(joint.y, "joint sample");
  report.n = n;
  report.n_prime = tilde.size();
  report.bootstrap_reps = options.bootstrap_reps;
  report.seed = options.seed;
  report.ci_level = options.ci_level;
  report.inputs.resize(d);

  std::vector<std::vector<double>> x_cols(d);
  std::vector<std::vector<double>> tilde_cols(d);
  for (std::size_t i = 0; i < d; ++i) {
    x_cols[i] = column(joint.x, i);
    tilde_cols[i] = column(tilde.x, i);
  }

  detail::parallel_for(d, [&](std::size_t i) {
    try {
      const auto fit = fit_single_input(x_cols[i], joint.y, tilde_cols[i], options);
      auto& out = report.inputs[i];
      out.input = i;
      out.h1 = fit.h1;
      out.h2 = fit.h2;
      out.t1 = fit.t1;
      out.t2 = fit.t2;
      out.clamped_count = fit.clamped_count;
      finish_indices(out, report.var_y);
    } catch (const NoLocalData& e) {
      throw e.with_input(static_cast<int>(i));
    }
  });

  const auto reps = static_cast<std::size_t>(options.bootstrap_reps);
  if (reps == 0)
    return report;

  // resampling plans are drawn up front so the parallel refits stay deterministic
  std::vector<std::vector<std::size_t>> plans(reps);
  std::vector<std::vector<double>> resampled_y(reps);
  std::vector<double> resampled_var(reps);
  for (std::size_t b = 0; b < reps; ++b) {
    Rng rng(child_seed(options.seed, b));
    plans[b].resize(n);
    resampled_y[b].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      plans[b][k] = static_cast<std::size_t>(rng.index(n));
      resampled_y[b][k] = joint.y[plans[b][k]];
    }
    resampled_var[b] =
      checked_output_variance(resampled_y[b], "bootstrap replicate " + std::to_string(b));
  }

  report.interval_method = "bootstrap";
  report.replicates.resize(reps * d);
  detail::parallel_for(reps * d, [&](std::size_t task) {
    const std::size_t b = task / d;
    const std::size_t i = task % d;
    std::vector<double> xb(n);
    for (std::size_t k = 0; k < n; ++k)
      xb[k] = x_cols[i][plans[b][k]];
    const auto& base = report.inputs[i];
    try {
      const auto fit =
        options.freeze_bandwidths
          ? fit_single_input(xb, resampled_y[b], tilde_cols[i], options, base.h1, base.h2)
          : fit_single_input(xb, resampled_y[b], tilde_cols[i], options);
      auto& row = report.replicates[task];
      row.replicate = b;
      row.input = i;
      row.s1_raw = fit.t1 / resampled_var[b];
      row.s2_raw = 1.0 - fit.t2 / resampled_var[b];
    } catch (const NoLocalData& e) {
      throw e.with_input(static_cast<int>(i));
    }
  });

  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> s1(reps);
    std::vector<double> s2(reps);
    for (std::size_t b = 0; b < reps; ++b) {
      s1[b] = report.replicates[b * d + i].s1_raw;
      s2[b] = report.replicates[b * d + i].s2_raw;
    }
    report.inputs[i].s1_ci = percentile_interval(s1, options.ci_level);
    report.inputs[i].s2_ci = percentile_interval(s2, options.ci_level);
  }
  return report;
}

SensitivityReport
replicate_indices(const ModelFunction& model, std::size_t n, std::size_t n_prime,
                  int replications, const EstimatorOptions& options)
{
  if (replications < 1)
    throw InvalidArgument("replications must be >= 1");
  if (law_dimension(model.law) != model.dim)
    throw InvalidArgument("model " + model.name + " has an input law of the wrong dimension");
  options.validate();
  EstimatorOptions single = options;
  single.bootstrap_reps = 0;

  const auto reps = static_cast<std::size_t>(replications);
  std::vector<SensitivityReport> runs(reps);
  detail::parallel_for(reps, [&](std::size_t r) {
    JointSample joint;
    joint.x = sample_inputs(model.law, n, child_seed(options.seed, 2 * r));
    joint.y = evaluate_model(model, joint.x);
    TildeSample tilde{ sample_inputs(model.law, n_prime, child_seed(options.seed, 2 * r + 1)) };
    runs[r] = estimate_indices(joint, tilde, single);
  });

  const std::size_t d = model.dim;
  SensitivityReport report;
  report.n = n;
  report.n_prime = n_prime;
  report.replications = replications;
  report.seed = options.seed;
  report.ci_level = options.ci_level;
  report.interval_method = replications > 1 ? "replication" : "none";
  report.inputs.resize(d);
  report.replicates.reserve(reps * d);

  const double scale = 1.0 / static_cast<double>(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    report.var_y += scale * runs[r].var_y;
    for (std::size_t i = 0; i < d; ++i) {
      const auto& src = runs[r].inputs[i];
      auto& dst = report.inputs[i];
      dst.input = i;
      dst.s1_raw += scale * src.s1_raw;
      dst.s2_raw += scale * src.s2_raw;
      dst.h1 += scale * src.h1;
      dst.h2 += scale * src.h2;
      dst.t1 += scale * src.t1;
      dst.t2 += scale * src.t2;
      dst.clamped_count += src.clamped_count;
      report.replicates.push_back({ r, i, src.s1_raw, src.s2_raw });
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    auto& dst = report.inputs[i];
    dst.s1_clipped = clip_unit(dst.s1_raw);
    dst.s2_clipped = clip_unit(dst.s2_raw);
    if (replications > 1) {
      std::vector<double> s1(reps);
      std::vector<double> s2(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        s1[r] = runs[r].inputs[i].s1_raw;
        s2[r] = runs[r].inputs[i].s2_raw;
      }
      dst.s1_ci = percentile_interval(s1, options.ci_level);
      dst.s2_ci = percentile_interval(s2, options.ci_level);
    }
  }
  return report;
}

double
ratto_index(const ConditionalSampler& sampler, const ModelFunction& model, std::size_t n,
            std::size_t r, std::uint64_t seed)
{
  if (n < 2 || r < 2)
    throw InvalidArgument("Ratto estimator needs n >= 2 and r >= 2");
  if (sampler.spec().dim() != model.dim)
    throw InvalidArgument("conditional sampler and model differ in dimension");

  Rng rng(seed);
  std::vector<double> y(n * r);
  std::vector<double> group_mean(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double xi = sampler.draw_marginal(rng);
    const auto block = sampler.complete(xi, r, rng);
    const auto values = evaluate_model(model, block);
    std::copy(values.begin(), values.end(), y.begin() + static_cast<std::ptrdiff_t>(j * r));
    group_mean[j] =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(r);
  }
  const double grand = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  double ssb = 0.0;
  for (double m : group_mean)
    ssb += (m - grand) * (m - grand);
  ssb *= static_cast<double>(r);
  double sst = 0.0;
  for (double v : y)
    sst += (v - grand) * (v - grand);
  if (!(sst > 0.0))
    throw DegenerateOutput("Ratto estimator: model output is constant");
  return ssb / sst;
}

} // namespace sensi
