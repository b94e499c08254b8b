#include "sensi/locfit.hpp"

#include "parallel.hpp"
#include "sensi/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace sensi {

void
RegressionSample::validate(bool require_distinct) const
{
  if (x.size() != y.size())
    throw InvalidArgument("regression sample: x has " + std::to_string(x.size()) +
                          " values but y has " + std::to_string(y.size()));
  if (x.size() < 2)
    throw InvalidArgument("regression sample needs at least 2 points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw InvalidArgument("regression sample has a non-finite value at row " +
                            std::to_string(i));
  }
  if (require_distinct) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi)
      throw InvalidArgument("regression sample needs at least two distinct x values");
  }
}

void
LocalFitConfig::validate() const
{
  if (order < 0 || order > 3)
    throw InvalidArgument("local polynomial order must be in 0..3, got " +
                          std::to_string(order));
  if (ridge_factor < 0.0)
    throw InvalidArgument("ridge factor must be nonnegative");
  if (const auto* fixed = std::get_if<FixedBandwidth>(&bandwidth)) {
    if (!(fixed->value > 0.0))
      throw InvalidArgument("fixed bandwidth must be positive");
  }
}

double
LocalFitResult::derivative(int nu) const
{
  if (nu < 0 || static_cast<std::size_t>(nu) >= beta.size())
    throw InvalidArgument("derivative order exceeds the polynomial order");
  double factorial = 1.0;
  for (int j = 2; j <= nu; ++j)
    factorial *= j;
  return factorial * beta[static_cast<std::size_t>(nu)];
}

struct LocalSmoother::Window
{
  std::vector<std::size_t> rows; // sorted positions with nonzero kernel weight
  std::vector<double> root_kernel;
  std::vector<double> weights;
  Eigen::MatrixXd design;
  bool ridge = false;
};

namespace {

void
check_bandwidth(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidArgument("bandwidth must be positive and finite");
}

} // namespace

LocalSmoother::LocalSmoother(std::span<const double> x, int order, KernelSpec kernel,
                             double ridge_factor)
  : order_(order)
  , kernel_(kernel)
  , ridge_factor_(ridge_factor)
{
  if (order < 0 || order > 3)
    throw InvalidArgument("local polynomial order must be in 0..3");
  if (x.empty())
    throw InvalidArgument("local smoother needs a nonempty design");
  order_index_.resize(x.size());
  std::iota(order_index_.begin(), order_index_.end(), std::size_t{ 0 });
  std::stable_sort(order_index_.begin(), order_index_.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  sorted_x_.resize(x.size());
  rank_of_.resize(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) {
    sorted_x_[r] = x[order_index_[r]];
    rank_of_[order_index_[r]] = r;
  }
}

void
LocalSmoother::solve_window(double x0, double h, std::ptrdiff_t exclude_sorted,
                            Window& window) const
{
  check_bandwidth(h);
  const double radius = kernel_.support_radius() * h;
  const auto first = std::lower_bound(sorted_x_.begin(), sorted_x_.end(), x0 - radius);
  const auto last = std::upper_bound(first, sorted_x_.end(), x0 + radius);

  window.rows.clear();
  window.root_kernel.clear();
  for (auto it = first; it != last; ++it) {
    const auto pos = static_cast<std::size_t>(it - sorted_x_.begin());
    if (static_cast<std::ptrdiff_t>(pos) == exclude_sorted)
      continue;
    const double k = kernel_.eval((*it - x0) / h);
    if (k > 0.0) {
      window.rows.push_back(pos);
      window.root_kernel.push_back(std::sqrt(k));
    }
  }
  if (window.rows.empty())
    throw NoLocalData(x0, h);

  const auto m = static_cast<Eigen::Index>(window.rows.size());
  const Eigen::Index cols = order_ + 1;
  auto& a = window.design;
  a.resize(m, cols);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double u = (sorted_x_[window.rows[static_cast<std::size_t>(r)]] - x0) / h;
    a(r, 0) = window.root_kernel[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 1; c < cols; ++c)
      a(r, c) = a(r, c - 1) * u;
  }

  Eigen::VectorXd t;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m, cols);
  qr.setThreshold(1e-10);
  qr.compute(a);
  if (qr.rank() == cols) {
    window.ridge = false;
    const Eigen::VectorXd g =
      qr.colsPermutation().transpose() * Eigen::VectorXd::Unit(cols, 0);
    const auto r_factor = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    // thin Q = A P R^{-1}, so Q z = A (P R^{-1} z)
    const Eigen::VectorXd z = r_factor.transpose().solve(g);
    const Eigen::VectorXd coef = qr.colsPermutation() * r_factor.solve(z);
    t = a * coef;
  } else {
    window.ridge = true;
    Eigen::MatrixXd normal = a.transpose() * a;
    const double eps = ridge_factor_ * normal.trace();
    normal.diagonal().array() += eps;
    const Eigen::VectorXd s = normal.ldlt().solve(Eigen::VectorXd::Unit(cols, 0));
    t = a * s;
  }
  window.weights.resize(window.rows.size());
  for (std::size_t r = 0; r < window.rows.size(); ++r)
    window.weights[r] = window.root_kernel[r] * t(static_cast<Eigen::Index>(r));
}

std::vector<double>
LocalSmoother::sort_response(std::span<const double> y) const
{
  if (y.size() != sorted_x_.size())
    throw InvalidArgument("response length does not match the design");
  std::vector<double> sorted(y.size());
  for (std::size_t r = 0; r < y.size(); ++r)
    sorted[r] = y[order_index_[r]];
  return sorted;
}

double
LocalSmoother::fit_value(std::span<const double> sorted_y, double x0, double h,
                         std::ptrdiff_t exclude_sorted) const
{
  // Moment sums of the scaled design; falls back to the QR window when the
  // normal matrix is poorly conditioned.
  check_bandwidth(h);
  const double radius = kernel_.support_radius() * h;
  const auto begin = std::lower_bound(sorted_x_.begin(), sorted_x_.end(), x0 - radius);
  const auto end = std::upper_bound(begin, sorted_x_.end(), x0 + radius);
  const int cols = order_ + 1;
  double s[7] = {};
  double t[4] = {};
  bool any = false;
  for (auto it = begin; it != end; ++it) {
    const auto pos = it - sorted_x_.begin();
    if (pos == exclude_sorted)
      continue;
    const double u = (*it - x0) / h;
    const double k = kernel_.eval(u);
    if (!(k > 0.0))
      continue;
    any = true;
    const double yk = k * sorted_y[static_cast<std::size_t>(pos)];
    double power = 1.0;
    for (int j = 0; j <= 2 * order_; ++j) {
      s[j] += k * power;
      if (j < cols)
        t[j] += yk * power;
      power *= u;
    }
  }
  if (!any)
    throw NoLocalData(x0, h);

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> normal(cols, cols);
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> rhs(cols);
  for (int a = 0; a < cols; ++a) {
    rhs(a) = t[a];
    for (int b = 0; b < cols; ++b)
      normal(a, b) = s[a + b];
  }
  const Eigen::LDLT<decltype(normal)> ldlt(normal);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-6)
    return ldlt.solve(rhs)(0);

  thread_local Window window;
  solve_window(x0, h, exclude_sorted, window);
  double sum = 0.0;
  for (std::size_t r = 0; r < window.rows.size(); ++r)
    sum += window.weights[r] * sorted_y[window.rows[r]];
  return sum;
}

LocalFitResult
LocalSmoother::fit(std::span<const double> y, double x0, double h) const
{
  const auto sorted_y = sort_response(y);
  Window window;
  solve_window(x0, h, -1, window);

  const auto m = static_cast<Eigen::Index>(window.rows.size());
  const Eigen::Index cols = order_ + 1;
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r)
    b(r) = window.root_kernel[static_cast<std::size_t>(r)] *
           sorted_y[window.rows[static_cast<std::size_t>(r)]];

  Eigen::VectorXd scaled;
  if (!window.ridge) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m, cols);
    qr.setThreshold(1e-10);
    qr.compute(window.design);
    scaled = qr.solve(b);
  } else {
    Eigen::MatrixXd normal = window.design.transpose() * window.design;
    normal.diagonal().array() += ridge_factor_ * normal.trace();
    scaled = normal.ldlt().solve(window.design.transpose() * b);
  }

  LocalFitResult result;
  result.beta.resize(static_cast<std::size_t>(cols));
  double scale = 1.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    result.beta[static_cast<std::size_t>(j)] = scaled(j) / scale;
    scale *= h;
  }
  result.mhat = result.beta[0];
  result.effective_points = static_cast<int>(window.rows.size());
  result.condition_flag = window.ridge;
  return result;
}

std::vector<double>
LocalSmoother::weights(double x0, double h, std::ptrdiff_t exclude) const
{
  std::ptrdiff_t exclude_sorted = -1;
  if (exclude >= 0) {
    if (static_cast<std::size_t>(exclude) >= size())
      throw InvalidArgument("excluded index out of range");
    exclude_sorted = static_cast<std::ptrdiff_t>(rank_of_[static_cast<std::size_t>(exclude)]);
  }
  Window window;
  solve_window(x0, h, exclude_sorted, window);
  std::vector<double> out(size(), 0.0);
  for (std::size_t r = 0; r < window.rows.size(); ++r)
    out[order_index_[window.rows[r]]] = window.weights[r];
  return out;
}

double
LocalSmoother::squared_weight_sum(double x0, double h) const
{
  thread_local Window window;
  solve_window(x0, h, -1, window);
  double sum = 0.0;
  for (double w : window.weights)
    sum += w * w;
  return sum;
}

std::pair<std::vector<double>, std::vector<double>>
LocalSmoother::predict_with_weight_norms(std::span<const double> y,
                                         std::span<const double> xs, double h) const
{
  check_bandwidth(h);
  const auto sorted_y = sort_response(y);
  std::vector<double> values(xs.size());
  std::vector<double> norms(xs.size());
  detail::parallel_for(xs.size(), [&](std::size_t k) {
    thread_local Window window;
    solve_window(xs[k], h, -1, window);
    double sum = 0.0;
    double squares = 0.0;
    for (std::size_t r = 0; r < window.rows.size(); ++r) {
      sum += window.weights[r] * sorted_y[window.rows[r]];
      squares += window.weights[r] * window.weights[r];
    }
    values[k] = sum;
    norms[k] = squares;
  });
  return { std::move(values), std::move(norms) };
}

std::vector<double>
LocalSmoother::leverages(double h) const
{
  check_bandwidth(h);
  std::vector<double> out(size(), 0.0);
  detail::parallel_for(size(), [&](std::size_t r) {
    thread_local Window window;
    solve_window(sorted_x_[r], h, -1, window);
    for (std::size_t j = 0; j < window.rows.size(); ++j) {
      if (window.rows[j] == r) {
        out[order_index_[r]] = window.weights[j];
        break;
      }
    }
  });
  return out;
}

std::vector<double>
LocalSmoother::predict(std::span<const double> y, std::span<const double> xs,
                       double h) const
{
  check_bandwidth(h);
  const auto sorted_y = sort_response(y);
  std::vector<double> out(xs.size());
  detail::parallel_for(xs.size(),
                       [&](std::size_t k) { out[k] = fit_value(sorted_y, xs[k], h, -1); });
  return out;
}

std::vector<double>
LocalSmoother::predict_serial(std::span<const double> y, std::span<const double> xs,
                              double h) const
{
  check_bandwidth(h);
  const auto sorted_y = sort_response(y);
  std::vector<double> out(xs.size());
  detail::serial_for(xs.size(),
                     [&](std::size_t k) { out[k] = fit_value(sorted_y, xs[k], h, -1); });
  return out;
}

std::vector<double>
LocalSmoother::predict_leave_one_out(std::span<const double> y, double h) const
{
  check_bandwidth(h);
  const auto sorted_y = sort_response(y);
  std::vector<double> out(size());
  detail::parallel_for(size(), [&](std::size_t r) {
    out[order_index_[r]] =
      fit_value(sorted_y, sorted_x_[r], h, static_cast<std::ptrdiff_t>(r));
  });
  return out;
}

std::vector<double>
LocalSmoother::predict_leave_one_out_serial(std::span<const double> y, double h) const
{
  check_bandwidth(h);
  const auto sorted_y = sort_response(y);
  std::vector<double> out(size());
  detail::serial_for(size(), [&](std::size_t r) {
    out[order_index_[r]] =
      fit_value(sorted_y, sorted_x_[r], h, static_cast<std::ptrdiff_t>(r));
  });
  return out;
}

LocalFitResult
fit_at(const RegressionSample& sample, const LocalFitConfig& config, double x0, double h)
{
  sample.validate(false);
  config.validate();
  return LocalSmoother(sample.x, config.order, config.kernel, config.ridge_factor)
    .fit(sample.y, x0, h);
}

std::vector<double>
predict(const RegressionSample& sample, const LocalFitConfig& config,
        std::span<const double> xs, double h)
{
  sample.validate(false);
  config.validate();
  return LocalSmoother(sample.x, config.order, config.kernel, config.ridge_factor)
    .predict(sample.y, xs, h);
}

std::vector<double>
smoother_weights(const RegressionSample& sample, const LocalFitConfig& config, double x0,
                 double h)
{
  sample.validate(false);
  config.validate();
  return LocalSmoother(sample.x, config.order, config.kernel, config.ridge_factor)
    .weights(x0, h);
}

} // namespace sensi
