#pragma once

#include "sensi/bandwidth_policy.hpp"
#include "sensi/kernel.hpp"
#include "sensi/locfit.hpp"

#include <span>
#include <vector>

namespace sensi {

/// Smoother settings for the residual-based conditional variance.
struct VarianceFitConfig
{
  int order = 1; ///< q, 0..2
  KernelSpec kernel{};
  BandwidthPolicy bandwidth = LoocvBandwidth{};
  bool clamp_negative = true;
  double ridge_factor = 1e-8;

  void validate() const;

  /// The equivalent mean-regression config, used for bandwidth selection.
  LocalFitConfig as_local_fit() const;
};

struct VarianceFitResult
{
  std::vector<double> sigma2;
  std::vector<double> raw; ///< fitted values before clamping
  int clamped_count = 0;
  double h2_used = 0.0;
};

/// (y_i - mhat_i)^2 for the in-sample fitted means.
std::vector<double>
squared_residuals(const RegressionSample& sample, std::span<const double> mhat_at_x);

/// Local polynomial regression of r2 on sample_x, evaluated at xs, with an
/// explicit bandwidth.
VarianceFitResult
fit_variance(std::span<const double> sample_x, std::span<const double> r2,
             const VarianceFitConfig& config, std::span<const double> xs, double h2);

/// Same, with h2 chosen by config.bandwidth on the pair (sample_x, r2).
VarianceFitResult
fit_variance(std::span<const double> sample_x, std::span<const double> r2,
             const VarianceFitConfig& config, std::span<const double> xs);

} // namespace sensi
