#pragma once

#include "sensi/bandwidth_policy.hpp"
#include "sensi/kernel.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace sensi {

/// Paired one-dimensional predictor/response sample.
struct RegressionSample
{
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }

  /// Checks equal lengths, n >= 2 and finite entries. With
  /// `require_distinct`, also at least two distinct x values.
  void validate(bool require_distinct = true) const;
};

/// Hyperparameters of the local polynomial smoother for E(Y | X = x).
struct LocalFitConfig
{
  int order = 1; ///< polynomial order p, 0..3
  KernelSpec kernel{};
  BandwidthPolicy bandwidth = LoocvBandwidth{};
  double ridge_factor = 1e-8; ///< ridge = factor * trace(design normal matrix)

  void validate() const;
};

struct LocalFitResult
{
  std::vector<double> beta; ///< coefficients of (X - x0)^j, j = 0..p
  double mhat = 0.0;
  int effective_points = 0; ///< sample points with nonzero kernel weight
  bool condition_flag = false; ///< ridge fallback engaged

  /// Estimate of the nu-th derivative, nu! * beta[nu].
  double derivative(int nu) const;
};

/// Local polynomial smoother over a fixed design.
///
/// Sorts the design once; every fit then only touches the points inside the
/// kernel support around x0. Regressors are ((X - x0)/h)^j and the weighted
/// design is factored with a column-pivoted Householder QR. A rank-deficient
/// design falls back to ridge-regularised normal equations.
class LocalSmoother
{
public:
  LocalSmoother(std::span<const double> x, int order, KernelSpec kernel,
                double ridge_factor = 1e-8);

  std::size_t size() const { return sorted_x_.size(); }
  int order() const { return order_; }

  /// Full fit at x0 for response y (given in the original design order).
  LocalFitResult fit(std::span<const double> y, double x0, double h) const;

  /// Weights w with mhat(x0) = sum_i w_i y_i, in the original design order.
  /// `exclude` (original index) drops that point from the fit.
  std::vector<double> weights(double x0, double h, std::ptrdiff_t exclude = -1) const;

  /// mhat at each of `xs`, OpenMP-parallel over evaluation points.
  std::vector<double> predict(std::span<const double> y, std::span<const double> xs,
                              double h) const;

  /// Single-threaded reference for predict(); results are bit-identical.
  std::vector<double> predict_serial(std::span<const double> y,
                                     std::span<const double> xs, double h) const;

  /// Fit at each design point x_i with point i held out.
  std::vector<double> predict_leave_one_out(std::span<const double> y, double h) const;
  std::vector<double> predict_leave_one_out_serial(std::span<const double> y,
                                                   double h) const;

  /// Sum of squared smoother weights at x0 (variance factor of mhat).
  double squared_weight_sum(double x0, double h) const;

  /// mhat at each of `xs` together with the squared weight sums.
  std::pair<std::vector<double>, std::vector<double>>
  predict_with_weight_norms(std::span<const double> y, std::span<const double> xs,
                            double h) const;

  /// Leverages L_ii: weight of point i in the fit at its own x_i.
  std::vector<double> leverages(double h) const;

private:
  struct Window;

  void solve_window(double x0, double h, std::ptrdiff_t exclude_sorted,
                    Window& window) const;
  double fit_value(std::span<const double> sorted_y, double x0, double h,
                   std::ptrdiff_t exclude_sorted) const;
  std::vector<double> sort_response(std::span<const double> y) const;

  std::vector<double> sorted_x_;
  std::vector<std::size_t> order_index_; ///< sorted position -> original index
  std::vector<std::size_t> rank_of_;     ///< original index -> sorted position
  int order_;
  KernelSpec kernel_;
  double ridge_factor_;
};

LocalFitResult
fit_at(const RegressionSample& sample, const LocalFitConfig& config, double x0, double h);

/// Element k is fit_at(sample, config, xs[k], h).mhat.
std::vector<double>
predict(const RegressionSample& sample, const LocalFitConfig& config,
        std::span<const double> xs, double h);

std::vector<double>
smoother_weights(const RegressionSample& sample, const LocalFitConfig& config, double x0,
                 double h);

} // namespace sensi
