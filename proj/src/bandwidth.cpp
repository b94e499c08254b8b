#include "sensi/bandwidth.hpp"

#include "sensi/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace sensi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Scores within this band of the minimum count as ties.
double
tie_tolerance(std::span<const double> y)
{
  double sum = 0.0;
  for (double v : y)
    sum += v * v;
  return 1e-10 * sum / static_cast<double>(y.size()) +
         std::numeric_limits<double>::min();
}

// Index of the smallest finite score, ties resolved toward the larger h.
std::optional<std::size_t>
pick_smallest(const std::vector<double>& scores, double tolerance)
{
  double best = kInf;
  for (double s : scores)
    best = std::min(best, s);
  if (!std::isfinite(best))
    return std::nullopt;
  for (std::size_t k = scores.size(); k-- > 0;) {
    if (scores[k] <= best + tolerance)
      return k;
  }
  return std::nullopt;
}

} // namespace

BandwidthGrid
default_grid(std::span<const double> x, int order, int count)
{
  if (x.size() < 2)
    throw InvalidArgument("default bandwidth grid needs at least 2 points");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double range = sorted.back() - sorted.front();
  if (!(range > 0.0))
    throw InvalidArgument("default bandwidth grid needs two distinct x values");
  const std::size_t mid = sorted.size() / 2;
  const double median =
    sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  std::vector<double> distance(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k)
    distance[k] = std::abs(sorted[k] - median);
  std::sort(distance.begin(), distance.end());
  const auto need = std::min(distance.size(), static_cast<std::size_t>(order + 2));
  double low = distance[need - 1];
  if (!(low > 0.0)) {
    // ties at the median: step out to the nearest other value
    const auto next = std::upper_bound(distance.begin(), distance.end(), 0.0);
    if (next != distance.end())
      low = *next;
  }
  if (!(low > 0.0) || low > 0.5 * range)
    low = std::min(0.5 * range, std::max(low, 1e-3 * range));
  return BandwidthGrid::geometric(low, range, count);
}

BandwidthGrid
resolve_grid(const std::optional<GridRange>& range, std::span<const double> x, int order)
{
  if (range)
    return BandwidthGrid::geometric(range->low, range->high, range->count);
  return default_grid(x, order);
}

std::vector<double>
loocv_scores(const RegressionSample& sample, const LocalFitConfig& config,
             const BandwidthGrid& grid)
{
  sample.validate(true);
  config.validate();
  grid.validate(1);
  if (sample.size() < static_cast<std::size_t>(config.order + 3))
    throw InvalidArgument("cross-validation needs n >= order + 3");

  const LocalSmoother smoother(sample.x, config.order, config.kernel,
                               config.ridge_factor);
  std::vector<double> scores(grid.values.size(), kInf);
  for (std::size_t g = 0; g < grid.values.size(); ++g) {
    try {
      const auto held_out = smoother.predict_leave_one_out(sample.y, grid.values[g]);
      double score = 0.0;
      for (std::size_t i = 0; i < sample.size(); ++i) {
        const double r = sample.y[i] - held_out[i];
        score += r * r;
      }
      scores[g] = score;
    } catch (const NoLocalData&) {
      scores[g] = kInf;
    }
  }
  return scores;
}

double
select_loocv(const RegressionSample& sample, const LocalFitConfig& config,
             const BandwidthGrid& grid)
{
  if (grid.values.empty())
    throw InvalidArgument("cross-validation grid is empty");
  const auto scores = loocv_scores(sample, config, grid);
  const auto best = pick_smallest(scores, tie_tolerance(sample.y) * sample.size());
  if (!best) {
    // report the widest bandwidth's failure, it is the most informative
    const LocalSmoother smoother(sample.x, config.order, config.kernel,
                                 config.ridge_factor);
    smoother.predict_leave_one_out_serial(sample.y, grid.values.back());
    throw InvalidArgument("cross-validation failed for every bandwidth");
  }
  return grid.values[*best];
}

EbbsTrace
ebbs_trace(const RegressionSample& sample, const LocalFitConfig& config,
           const BandwidthGrid& grid, std::span<const double> xs, int bias_order,
           int window)
{
  if (bias_order < 1 || bias_order > 2)
    throw InvalidArgument("EBBS bias order must be 1 or 2");
  grid.validate(static_cast<std::size_t>(bias_order + 2));
  sample.validate(true);
  config.validate();
  if (xs.empty())
    xs = sample.x;
  const std::size_t points = grid.values.size();
  const auto width = static_cast<std::size_t>(
    std::clamp(window, bias_order + 2, static_cast<int>(points)));

  EbbsTrace trace;

  // pilot residual variance from the cross-validated fit
  const double pilot_h = select_loocv(sample, config, grid);
  const LocalSmoother smoother(sample.x, config.order, config.kernel,
                               config.ridge_factor);
  {
    const auto fitted = smoother.predict(sample.y, sample.x, pilot_h);
    const auto leverage = smoother.leverages(pilot_h);
    double rss = 0.0;
    double trace_l = 0.0;
    double trace_ll = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double r = sample.y[i] - fitted[i];
      rss += r * r;
      trace_l += leverage[i];
      trace_ll += smoother.squared_weight_sum(sample.x[i], pilot_h);
    }
    const double dof = static_cast<double>(sample.size()) - 2.0 * trace_l + trace_ll;
    trace.pilot_variance = rss / std::max(dof, 1.0);
  }

  // fitted values and weight norms for every (h, x)
  std::vector<std::vector<double>> fitted(points);
  std::vector<std::vector<double>> norms(points);
  std::vector<bool> feasible(points, true);
  for (std::size_t g = 0; g < points; ++g) {
    try {
      auto [values, squares] = smoother.predict_with_weight_norms(sample.y, xs,
                                                                  grid.values[g]);
      fitted[g] = std::move(values);
      norms[g] = std::move(squares);
    } catch (const NoLocalData&) {
      feasible[g] = false;
    }
  }

  trace.squared_bias.assign(points, kInf);
  trace.variance.assign(points, kInf);
  trace.mse.assign(points, kInf);
  const auto terms = static_cast<Eigen::Index>(bias_order + 1);
  for (std::size_t g = 0; g < points; ++g) {
    // window of h_g and the grid values below it, so the bias is read off
    // how far mhat moved on the way from smaller bandwidths
    const std::size_t start = g + 1 >= width ? g + 1 - width : 0;
    bool usable = true;
    for (std::size_t k = start; k < start + width; ++k)
      usable = usable && feasible[k];
    if (!usable)
      continue;

    // least squares in u = h / h_g, so the bias at h_g is the sum of the
    // non-constant coefficients
    Eigen::MatrixXd design(static_cast<Eigen::Index>(width), terms);
    for (std::size_t k = 0; k < width; ++k) {
      const double u = grid.values[start + k] / grid.values[g];
      const auto row = static_cast<Eigen::Index>(k);
      design(row, 0) = 1.0;
      design(row, 1) = u * u;
      if (bias_order == 2)
        design(row, 2) = u * u * u;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);

    double bias_sum = 0.0;
    double variance_sum = 0.0;
    Eigen::VectorXd response(static_cast<Eigen::Index>(width));
    for (std::size_t j = 0; j < xs.size(); ++j) {
      for (std::size_t k = 0; k < width; ++k)
        response(static_cast<Eigen::Index>(k)) = fitted[start + k][j];
      const Eigen::VectorXd coef = qr.solve(response);
      const double bias = coef.tail(terms - 1).sum();
      bias_sum += bias * bias;
      variance_sum += trace.pilot_variance * norms[g][j];
    }
    const auto count = static_cast<double>(xs.size());
    trace.squared_bias[g] = bias_sum / count;
    trace.variance[g] = variance_sum / count;
    trace.mse[g] = trace.squared_bias[g] + trace.variance[g];
  }

  const auto best = pick_smallest(trace.mse, tie_tolerance(sample.y));
  if (!best)
    throw InvalidArgument("EBBS found no bandwidth with local data at every point");
  trace.selected = grid.values[*best];
  return trace;
}

double
select_ebbs(const RegressionSample& sample, const LocalFitConfig& config,
            const BandwidthGrid& grid, std::span<const double> xs, int bias_order,
            int window)
{
  return ebbs_trace(sample, config, grid, xs, bias_order, window).selected;
}

BandwidthGrid
covering_grid(const BandwidthGrid& grid, std::span<const double> x,
              std::span<const double> cover, const KernelSpec& kernel)
{
  if (cover.empty() || x.empty())
    return grid;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  double gap = 0.0;
  for (double c : cover) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
    double nearest = kInf;
    if (it != sorted.end())
      nearest = *it - c;
    if (it != sorted.begin())
      nearest = std::min(nearest, c - *std::prev(it));
    gap = std::max(gap, nearest);
  }
  BandwidthGrid out;
  for (double h : grid.values)
    if (kernel.eval(gap / h) > 0.0)
      out.values.push_back(h);
  return out.values.empty() ? grid : out;
}

double
resolve_bandwidth(const RegressionSample& sample, const LocalFitConfig& config,
                  std::span<const double> xs, std::span<const double> cover)
{
  if (const auto* fixed = std::get_if<FixedBandwidth>(&config.bandwidth)) {
    if (!(fixed->value > 0.0))
      throw InvalidArgument("fixed bandwidth must be positive");
    return fixed->value;
  }
  if (const auto* cv = std::get_if<LoocvBandwidth>(&config.bandwidth))
    return select_loocv(sample, config,
                        covering_grid(resolve_grid(cv->range, sample.x, config.order),
                                      sample.x, cover, config.kernel));
  const auto& ebbs = std::get<EbbsBandwidth>(config.bandwidth);
  auto grid = covering_grid(resolve_grid(ebbs.range, sample.x, config.order), sample.x, cover,
                            config.kernel);
  if (grid.values.size() < static_cast<std::size_t>(ebbs.window))
    grid = resolve_grid(ebbs.range, sample.x, config.order);
  return select_ebbs(sample, config, grid, xs, ebbs.bias_order, ebbs.window);
}

} // namespace sensi
