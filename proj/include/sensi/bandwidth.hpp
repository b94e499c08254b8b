#pragma once

#include "sensi/bandwidth_policy.hpp"
#include "sensi/locfit.hpp"

#include <span>
#include <vector>

namespace sensi {

/// Default grid: `count` geometric points from h_min to the range of x.
///
/// h_min is the distance from the median of x to its (order+2)-th nearest
/// observation, ties counted with multiplicity (the nearest nonzero distance
/// when that one is zero).
BandwidthGrid
default_grid(std::span<const double> x, int order, int count = 12);

/// Grid from an explicit range, or the default grid when none is given.
BandwidthGrid
resolve_grid(const std::optional<GridRange>& range, std::span<const double> x, int order);

/// Cross-validation score sum_i (y_i - mhat_{-i}(x_i))^2 for every grid value;
/// +inf marks a bandwidth where some held-out fit has no local data.
std::vector<double>
loocv_scores(const RegressionSample& sample, const LocalFitConfig& config,
             const BandwidthGrid& grid);

double
select_loocv(const RegressionSample& sample, const LocalFitConfig& config,
             const BandwidthGrid& grid);

struct EbbsTrace
{
  std::vector<double> squared_bias; ///< averaged over evaluation points, per grid value
  std::vector<double> variance;
  std::vector<double> mse;
  double pilot_variance = 0.0;
  double selected = 0.0;
};

/// Empirical-bias bandwidth selection.
///
/// For each evaluation point the fitted value mhat_h(x) is regressed on
/// (1, h^2) (plus h^3 when bias_order = 2) over `window` grid values ending
/// at h (the first `window` values near the bottom of the grid); the
/// non-constant part of that fit at h is the empirical bias.
/// The variance is sigma2_pilot * sum_i w_i(x, h)^2 with sigma2_pilot the
/// normalised residual variance of the LOOCV fit. Empty `xs` means the
/// sample's own x values.
EbbsTrace
ebbs_trace(const RegressionSample& sample, const LocalFitConfig& config,
           const BandwidthGrid& grid, std::span<const double> xs, int bias_order = 1,
           int window = 5);

double
select_ebbs(const RegressionSample& sample, const LocalFitConfig& config,
            const BandwidthGrid& grid, std::span<const double> xs, int bias_order = 1,
            int window = 5);

/// Grid values at which every point of `cover` has at least one sample
/// point with nonzero kernel weight. Returns the grid unchanged when no
/// value qualifies.
BandwidthGrid
covering_grid(const BandwidthGrid& grid, std::span<const double> x,
              std::span<const double> cover, const KernelSpec& kernel);

/// Bandwidth according to config.bandwidth. Selection grids are restricted
/// to bandwidths that can fit at every point of `cover`.
double
resolve_bandwidth(const RegressionSample& sample, const LocalFitConfig& config,
                  std::span<const double> xs = {}, std::span<const double> cover = {});

} // namespace sensi
