#include "sensi/theory.hpp"

#include "parallel.hpp"
#include "sensi/errors.hpp"
#include "sensi/indices.hpp"
#include "sensi/io.hpp"
#include "sensi/locfit.hpp"
#include "sensi/rng.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

namespace sensi {

namespace {

struct ReplicateErrors
{
  std::vector<double> t1; ///< one entry per h
  std::vector<double> t2;
  std::vector<double> t2_value;
};

double
mean_of(const std::vector<double>& v)
{
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double
standard_error(const std::vector<double>& v)
{
  if (v.size() < 2)
    return 0.0;
  return std::sqrt(unbiased_variance(v) / static_cast<double>(v.size()));
}

double
sign(double v)
{
  return static_cast<double>((v > 0.0) - (v < 0.0));
}

} // namespace

double
TheoremConstants::t1_bias(std::size_t n, double h1) const
{
  return m1 * h1 * h1 + m2 / (static_cast<double>(n) * h1);
}

double
TheoremConstants::t2_bias(double h2) const
{
  return v1 * h2 * h2;
}

double
TheoremConstants::t2_scaled_variance(std::size_t n, double h1, double h2) const
{
  return mean_variance_sq + v2 * h2 * h2 + v3 * h1 * h1 +
         v4 / (static_cast<double>(n) * h2);
}

TheoremConstants
compute_constants(const HeteroFixture& fixture, const KernelSpec& kernel, double tolerance)
{
  if (!fixture.mean || !fixture.mean_dd || !fixture.variance || !fixture.variance_dd ||
      !fixture.density || !fixture.lambda2)
    throw InvalidArgument("fixture " + fixture.name + " lacks a moment or derivative callback");
  if (!(fixture.high > fixture.low))
    throw InvalidArgument("fixture support must be a nonempty interval");
  if (!(tolerance > 0.0))
    throw InvalidArgument("quadrature tolerance must be positive");

  const auto integrate = [&](auto&& f) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, fixture.low, fixture.high, 20, tolerance);
  };
  const auto& m = fixture.mean;
  const auto& mdd = fixture.mean_dd;
  const auto& s2 = fixture.variance;
  const auto& s2dd = fixture.variance_dd;
  const auto& f = fixture.density;

  const double mu2 = moment_mu(kernel, 2);
  const double nu0 = moment_nu(kernel, 0);

  const double e_m = integrate([&](double x) { return m(x) * f(x); });
  const double e_m2 = integrate([&](double x) { return m(x) * m(x) * f(x); });
  const double e_m_mdd = integrate([&](double x) { return m(x) * mdd(x) * f(x); });
  const double e_mdd = integrate([&](double x) { return mdd(x) * f(x); });
  const double e_s2 = integrate([&](double x) { return s2(x) * f(x); });
  const double e_s4 = integrate([&](double x) { return s2(x) * s2(x) * f(x); });
  const double e_s2dd = integrate([&](double x) { return s2dd(x) * f(x); });
  const double e_s2_s2dd = integrate([&](double x) { return s2(x) * s2dd(x) * f(x); });
  const double int_s2 = integrate([&](double x) { return s2(x); });
  const double int_s4_l2 =
    integrate([&](double x) { return s2(x) * s2(x) * fixture.lambda2(x); });

  TheoremConstants c;
  c.kernel = kernel;
  c.model = fixture.name;
  c.m1 = mu2 * (e_m_mdd - e_m * e_mdd);
  c.m2 = nu0 * int_s2;
  c.v1 = 0.5 * mu2 * e_s2dd;
  c.v2 = mu2 * e_s2_s2dd;
  c.v3 = -mu2 * e_s2dd * e_s2;
  c.v4 = nu0 * int_s4_l2;
  c.var_mean = e_m2 - e_m * e_m;
  c.mean_variance = e_s2;
  c.mean_variance_sq = e_s4;
  return c;
}

void
ExpansionConfig::validate() const
{
  if (order_p < 0 || order_p > 3 || order_q < 0 || order_q > 2)
    throw InvalidArgument("expansion check needs p in 0..3 and q in 0..2");
  if (n_list.empty() || h_list.empty())
    throw InvalidArgument("expansion check needs at least one n and one h");
  for (std::size_t n : n_list) {
    if (n < 10)
      throw InvalidArgument("expansion check needs n >= 10");
  }
  for (double h : h_list) {
    if (!(h > 0.0))
      throw InvalidArgument("expansion check bandwidths must be positive");
  }
  if (h2 < 0.0)
    throw InvalidArgument("variance bandwidth must be positive (or 0 for h2 = h1)");
  if (n_prime < 2)
    throw InvalidArgument("expansion check needs n' >= 2");
  if (reps < 2)
    throw InvalidArgument("expansion check needs at least 2 replicates");
}

std::optional<BiasFit>
fit_t1_bias(const std::vector<ExpansionRow>& rows)
{
  if (rows.size() < 2)
    return std::nullopt;
  const auto count = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(count, 2);
  Eigen::VectorXd response(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    design(k, 0) = row.h1 * row.h1;
    design(k, 1) = 1.0 / (static_cast<double>(row.n) * row.h1);
    response(k) = row.t1_bias;
  }
  // scale columns so the rank test is not fooled by their magnitudes
  const Eigen::Vector2d scale = design.colwise().norm().transpose();
  if (!(scale.minCoeff() > 0.0))
    return std::nullopt;
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-8);
  if (qr.rank() < 2)
    return std::nullopt;
  const Eigen::VectorXd coef = qr.solve(response).cwiseQuotient(scale);
  return BiasFit{ coef(0), coef(1) };
}

ExpansionReport
empirical_expansion_check(const HeteroFixture& fixture, const ExpansionConfig& config)
{
  config.validate();
  ExpansionReport report;
  report.constants = compute_constants(fixture, config.kernel);
  const auto& constants = report.constants;
  const std::size_t hs = config.h_list.size();
  const auto reps = static_cast<std::size_t>(config.reps);

  for (std::size_t n : config.n_list) {
    std::vector<ReplicateErrors> errors(reps);
    detail::parallel_for(reps, [&](std::size_t r) {
      const auto sample = fixture.draw(n, child_seed(config.seed, 2 * r));
      const auto tilde = fixture.draw_inputs(config.n_prime, child_seed(config.seed, 2 * r + 1));

      double t1_reference = constants.var_mean;
      double t2_reference = constants.mean_variance;
      if (config.control_variates) {
        std::vector<double> m_true(tilde.size());
        std::vector<double> s2_true(tilde.size());
        for (std::size_t j = 0; j < tilde.size(); ++j) {
          m_true[j] = fixture.mean(tilde[j]);
          s2_true[j] = fixture.variance(tilde[j]);
        }
        t1_reference = estimate_t1(m_true);
        t2_reference = estimate_t2(s2_true);
      }

      const LocalSmoother mean_smoother(sample.x, config.order_p, config.kernel);
      const LocalSmoother variance_smoother(sample.x, config.order_q, config.kernel);
      auto& out = errors[r];
      out.t1.resize(hs);
      out.t2.resize(hs);
      out.t2_value.resize(hs);
      for (std::size_t k = 0; k < hs; ++k) {
        const double h1 = config.h_list[k];
        const double h2 = config.h2 > 0.0 ? config.h2 : h1;
        const auto mhat_x = mean_smoother.predict_serial(sample.y, sample.x, h1);
        const auto mhat_tilde = mean_smoother.predict_serial(sample.y, tilde, h1);
        const auto r2 = squared_residuals(sample, mhat_x);
        auto sigma2 = variance_smoother.predict_serial(r2, tilde, h2);
        for (double& v : sigma2)
          v = std::max(v, 0.0);
        const double t2 = estimate_t2(sigma2);
        out.t1[k] = estimate_t1(mhat_tilde) - t1_reference;
        out.t2[k] = t2 - t2_reference;
        out.t2_value[k] = t2;
      }
    });

    for (std::size_t k = 0; k < hs; ++k) {
      ExpansionRow row;
      row.n = n;
      row.h1 = config.h_list[k];
      row.h2 = config.h2 > 0.0 ? config.h2 : row.h1;
      row.reps = config.reps;
      std::vector<double> e1(reps);
      std::vector<double> e2(reps);
      std::vector<double> t2(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        e1[r] = errors[r].t1[k];
        e2[r] = errors[r].t2[k];
        t2[r] = errors[r].t2_value[k];
        if (sign(e2[r]) == sign(constants.v1))
          ++row.t2_sign_agreements;
      }
      row.t1_bias = mean_of(e1);
      row.t1_bias_se = standard_error(e1);
      row.t1_predicted = constants.t1_bias(n, row.h1);
      row.t2_bias = mean_of(e2);
      row.t2_bias_se = standard_error(e2);
      row.t2_predicted = constants.t2_bias(row.h2);
      row.t2_scaled_variance = static_cast<double>(config.n_prime) * unbiased_variance(t2);
      row.t2_scaled_variance_predicted = constants.t2_scaled_variance(n, row.h1, row.h2);
      report.rows.push_back(row);
    }
  }
  report.fit = fit_t1_bias(report.rows);
  return report;
}

std::string
expansion_csv(const ExpansionReport& report)
{
  std::ostringstream os;
  os << "quantity,n,h1,h2,measured,std_error,predicted,ratio\n";
  const auto line = [&](const char* quantity, const ExpansionRow& row, double measured,
                        double se, double predicted) {
    os << quantity << ',' << row.n << ',' << format_double(row.h1) << ','
       << format_double(row.h2) << ',' << format_double(measured) << ','
       << format_double(se) << ',' << format_double(predicted) << ','
       << format_double(measured / predicted) << '\n';
  };
  for (const auto& row : report.rows) {
    line("t1_bias", row, row.t1_bias, row.t1_bias_se, row.t1_predicted);
    line("t2_bias", row, row.t2_bias, row.t2_bias_se, row.t2_predicted);
    line("t2_scaled_variance", row, row.t2_scaled_variance, 0.0,
         row.t2_scaled_variance_predicted);
  }
  return os.str();
}

} // namespace sensi
