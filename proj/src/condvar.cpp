#include "sensi/condvar.hpp"

#include "sensi/bandwidth.hpp"
#include "sensi/errors.hpp"

#include <cmath>

namespace sensi {

void
VarianceFitConfig::validate() const
{
  if (order < 0 || order > 2)
    throw InvalidArgument("variance fit order must be in 0..2, got " +
                          std::to_string(order));
  as_local_fit().validate();
}

LocalFitConfig
VarianceFitConfig::as_local_fit() const
{
  LocalFitConfig config;
  config.order = order;
  config.kernel = kernel;
  config.bandwidth = bandwidth;
  config.ridge_factor = ridge_factor;
  return config;
}

std::vector<double>
squared_residuals(const RegressionSample& sample, std::span<const double> mhat_at_x)
{
  if (sample.y.size() != mhat_at_x.size())
    throw InvalidArgument("squared residuals: " + std::to_string(sample.y.size()) +
                          " responses but " + std::to_string(mhat_at_x.size()) +
                          " fitted values");
  std::vector<double> out(sample.y.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = sample.y[i] - mhat_at_x[i];
    out[i] = r * r;
  }
  return out;
}

VarianceFitResult
fit_variance(std::span<const double> sample_x, std::span<const double> r2,
             const VarianceFitConfig& config, std::span<const double> xs, double h2)
{
  config.validate();
  if (sample_x.size() != r2.size())
    throw InvalidArgument("variance fit: x and squared residuals differ in length");
  for (double v : r2) {
    if (!(v >= 0.0))
      throw InvalidArgument("squared residuals must be nonnegative");
  }
  const LocalSmoother smoother(sample_x, config.order, config.kernel, config.ridge_factor);

  VarianceFitResult result;
  result.h2_used = h2;
  result.raw = smoother.predict(r2, xs, h2);
  result.sigma2 = result.raw;
  if (config.clamp_negative) {
    for (double& v : result.sigma2) {
      if (v < 0.0) {
        v = 0.0;
        ++result.clamped_count;
      }
    }
  }
  return result;
}

VarianceFitResult
fit_variance(std::span<const double> sample_x, std::span<const double> r2,
             const VarianceFitConfig& config, std::span<const double> xs)
{
  config.validate();
  RegressionSample residuals{ { sample_x.begin(), sample_x.end() },
                              { r2.begin(), r2.end() } };
  const double h2 = resolve_bandwidth(residuals, config.as_local_fit(), residuals.x, xs);
  return fit_variance(sample_x, r2, config, xs, h2);
}

} // namespace sensi
