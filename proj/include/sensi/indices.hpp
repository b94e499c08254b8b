#pragma once

#include "sensi/condvar.hpp"
#include "sensi/locfit.hpp"
#include "sensi/models.hpp"
#include "sensi/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sensi {

/// Inputs drawn from the joint law together with the model outputs.
struct JointSample
{
  Eigen::MatrixXd x; ///< n x d
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }

  /// n >= 10, d >= 1, matching lengths and finite entries.
  void validate() const;
};

/// Input-only sample used to average the fitted moments (no model runs).
struct TildeSample
{
  Eigen::MatrixXd x; ///< n' x d

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

/// Sample variance with divisor n - 1.
double
unbiased_variance(std::span<const double> values);

/// Empirical variance (divisor n' - 1) of the fitted means on the tilde sample.
double
estimate_t1(std::span<const double> mhat_tilde);

/// Mean of the fitted conditional variances on the tilde sample.
double
estimate_t2(std::span<const double> sigma2_tilde);

/// Closed-form index of the pair (X2, X3) in the additive Gaussian model.
double
jacques_index_analytic(double rho, double sigma);

struct EstimatorOptions
{
  LocalFitConfig mean_fit{};
  VarianceFitConfig variance_fit{};
  int bootstrap_reps = 0;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  bool freeze_bandwidths = false; ///< reuse the full-sample h1, h2 in bootstrap refits

  void validate() const;
};

struct Interval
{
  double low = std::numeric_limits<double>::quiet_NaN();
  double high = std::numeric_limits<double>::quiet_NaN();

  bool empty() const { return !(low <= high); }
};

struct InputIndices
{
  std::size_t input = 0;
  double s1_raw = 0.0;
  double s2_raw = 0.0;
  double s1_clipped = 0.0;
  double s2_clipped = 0.0;
  Interval s1_ci;
  Interval s2_ci;
  double h1 = 0.0;
  double h2 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  int clamped_count = 0; ///< negative variance fits set to zero
};

struct ReplicateRow
{
  std::size_t replicate = 0;
  std::size_t input = 0;
  double s1_raw = 0.0;
  double s2_raw = 0.0;
};

struct SensitivityReport
{
  std::vector<InputIndices> inputs;
  double var_y = 0.0;
  std::size_t n = 0;
  std::size_t n_prime = 0;
  int bootstrap_reps = 0;
  int replications = 1; ///< independent samples averaged into `inputs`
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  std::string interval_method = "none"; ///< "none", "bootstrap" or "replication"
  std::vector<ReplicateRow> replicates;
};

/// Index estimates for one input column, without intervals.
struct SingleInputFit
{
  double h1 = 0.0;
  double h2 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  int clamped_count = 0;
};

/// Fits m and sigma^2 of y given x, then averages them over `tilde_x`.
/// Positive h1 / h2 override the bandwidth policies.
SingleInputFit
fit_single_input(std::span<const double> x, std::span<const double> y,
                 std::span<const double> tilde_x, const EstimatorOptions& options,
                 double h1 = 0.0, double h2 = 0.0);

/// Indices of every input from a joint sample and a tilde sample, with
/// bootstrap percentile intervals when options.bootstrap_reps > 0.
///
/// Throws DegenerateOutput for constant y and NoLocalData tagged with the
/// input index.
SensitivityReport
estimate_indices(const JointSample& joint, const TildeSample& tilde,
                 const EstimatorOptions& options);

/// Repeats the whole estimation on `replications` independent joint and
/// tilde samples drawn from the model's input law. The report holds the
/// replicate means, percentile intervals across replicates, and every
/// replicate in `replicates`.
SensitivityReport
replicate_indices(const ModelFunction& model, std::size_t n, std::size_t n_prime,
                  int replications, const EstimatorOptions& options);

/// Between-group over total sum of squares from conditional resampling:
/// n values of X_i, r completions of the other inputs each, n r model runs.
double
ratto_index(const ConditionalSampler& sampler, const ModelFunction& model, std::size_t n,
            std::size_t r, std::uint64_t seed);

/// min(1, max(0, v))
double
clip_unit(double v);

/// Linear-interpolation quantile (q in [0, 1]) of unsorted values.
double
quantile(std::vector<double> values, double q);

} // namespace sensi
