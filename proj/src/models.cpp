#include "sensi/models.hpp"

#include "sensi/errors.hpp"
#include "sensi/rng.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace sensi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double
parse_argument(std::string_view text)
{
  while (!text.empty() && text.front() == ' ')
    text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ')
    text.remove_suffix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw InvalidArgument("cannot parse model argument '" + std::string(text) + "'");
  return value;
}

} // namespace

std::size_t
law_dimension(const InputLaw& law)
{
  if (const auto* gaussian = std::get_if<GaussianSpec>(&law))
    return gaussian->dim();
  return std::get<IndependentLaw>(law).marginals.size();
}

Eigen::MatrixXd
sample_inputs(const InputLaw& law, std::size_t n, std::uint64_t seed)
{
  if (const auto* gaussian = std::get_if<GaussianSpec>(&law))
    return mvn_sample(*gaussian, n, seed);
  const auto& marginals = std::get<IndependentLaw>(law).marginals;
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(marginals.size()));
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < marginals.size(); ++c) {
      const auto& m = marginals[c];
      out(r, static_cast<Eigen::Index>(c)) = m.kind == Marginal::Kind::Uniform
                                               ? rng.uniform(m.a, m.b)
                                               : m.a + m.b * rng.normal();
    }
  }
  return out;
}

std::vector<double>
evaluate_model(const ModelFunction& model, const Eigen::MatrixXd& x)
{
  if (static_cast<std::size_t>(x.cols()) != model.dim)
    throw InvalidArgument("model " + model.name + " expects " + std::to_string(model.dim) +
                          " inputs, got " + std::to_string(x.cols()));
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  std::vector<double> row(model.dim);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < model.dim; ++c)
      row[c] = x(r, static_cast<Eigen::Index>(c));
    out[static_cast<std::size_t>(r)] = model.eval(row);
  }
  return out;
}

AnalyticModel
additive_gaussian(double rho, double sigma)
{
  if (!(sigma > 0.0) || std::abs(rho) > 1.0)
    throw InvalidArgument("additive model needs sigma > 0 and |rho| <= 1");
  const double denom = 2.0 + sigma * sigma + 2.0 * rho * sigma;
  if (!(denom > 0.0))
    throw InvalidArgument("additive model has zero output variance");

  GaussianSpec law;
  law.mean = Eigen::VectorXd::Zero(3);
  law.cov = Eigen::MatrixXd::Identity(3, 3);
  law.cov(1, 2) = law.cov(2, 1) = rho * sigma;
  law.cov(2, 2) = sigma * sigma;

  AnalyticModel out;
  out.model.name = "additive(" + std::to_string(rho) + "," + std::to_string(sigma) + ")";
  out.model.dim = 3;
  out.model.eval = [](std::span<const double> x) { return x[0] + x[1] + x[2]; };
  out.model.law = law;
  out.indices.s = { 1.0 / denom,
                    (1.0 + rho * sigma) * (1.0 + rho * sigma) / denom,
                    (sigma + rho) * (sigma + rho) / denom };
  out.indices.extra["S23"] = (1.0 + sigma * sigma + 2.0 * rho * sigma) / denom;
  return out;
}

double
peak_valley_value(double x1, double x2)
{
  const double a = 8.0 * x1 - 2.0;
  const double b = 5.0 * x2 - 3.0;
  return 0.2 * std::exp(x1 - 3.0) + 2.2 * std::abs(x2) + 1.3 * std::pow(x2, 6) -
         2.0 * x2 * x2 - 0.5 * std::pow(x2, 4) - 0.5 * std::pow(x1, 4) +
         2.5 * x1 * x1 + 0.7 * x1 * x1 * x1 + 3.0 / (a * a + b * b + 1.0) +
         std::sin(5.0 * x1) * std::cos(3.0 * x1 * x1);
}

AnalyticModel
peak_valley()
{
  AnalyticModel out;
  out.model.name = "peakvalley";
  out.model.dim = 2;
  out.model.eval = [](std::span<const double> x) { return peak_valley_value(x[0], x[1]); };
  out.model.law = IndependentLaw{ { { Marginal::Kind::Uniform, -1.0, 1.0 },
                                    { Marginal::Kind::Uniform, -1.0, 1.0 } } };
  out.indices.s = { 0.9375, 0.0625 };
  // 2000 x 2000 Gauss-Legendre tensor quadrature of the function
  out.indices.extra["S1_quadrature"] = 0.8937352;
  out.indices.extra["S2_quadrature"] = 0.0594914;
  return out;
}

Eigen::MatrixXd
peak_valley_design(bool unit_square)
{
  const double lo = unit_square ? 0.0 : -1.0;
  const std::vector<double> low{ lo, lo };
  const std::vector<double> high{ 1.0, 1.0 };
  return regular_grid(low, high, 6);
}

RegressionSample
HeteroFixture::draw(std::size_t n, std::uint64_t seed) const
{
  Rng rng(seed);
  RegressionSample sample;
  sample.x.resize(n);
  sample.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(low, high);
    const double eps = rng.normal();
    sample.x[i] = x;
    sample.y[i] = mean(x) + std::sqrt(variance(x)) * eps;
  }
  return sample;
}

std::vector<double>
HeteroFixture::draw_inputs(std::size_t n, std::uint64_t seed) const
{
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out)
    x = rng.uniform(low, high);
  return out;
}

HeteroFixture
hetero_sine()
{
  HeteroFixture f;
  f.name = "heterosine";
  f.mean = [](double x) { return std::sin(kTwoPi * x); };
  f.mean_dd = [](double x) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * x); };
  f.variance = [](double x) { return (0.2 + 0.1 * x) * (0.2 + 0.1 * x); };
  f.variance_dd = [](double) { return 0.02; };
  f.density = [](double) { return 1.0; };
  f.lambda2 = [](double) { return 2.0; };
  return f;
}

HeteroFixture
hetero_linear()
{
  HeteroFixture f = hetero_sine();
  f.name = "heterolinear";
  f.mean = [](double x) { return 2.0 * x; };
  f.mean_dd = [](double) { return 0.0; };
  return f;
}

HeteroFixture
sine_noiseless()
{
  HeteroFixture f = hetero_sine();
  f.name = "sine-noiseless";
  f.variance = [](double) { return 0.0; };
  f.variance_dd = [](double) { return 0.0; };
  return f;
}

HeteroFixture
hetero_fixture(std::string_view name)
{
  if (name.starts_with("builtin:"))
    name.remove_prefix(8);
  if (name == "heterosine")
    return hetero_sine();
  if (name == "heterolinear")
    return hetero_linear();
  if (name == "sine-noiseless")
    return sine_noiseless();
  throw InvalidArgument("unknown theory fixture '" + std::string(name) +
                        "' (expected heterosine, heterolinear or sine-noiseless)");
}

AnalyticModel
hetero_sine_model()
{
  AnalyticModel out;
  out.model.name = "heterosine";
  out.model.dim = 2;
  out.model.eval = [](std::span<const double> v) {
    return std::sin(kTwoPi * v[0]) + (0.2 + 0.1 * v[0]) * v[1];
  };
  out.model.law = IndependentLaw{ { { Marginal::Kind::Uniform, 0.0, 1.0 },
                                    { Marginal::Kind::Normal, 0.0, 1.0 } } };
  // Var(m) = 1/2, E(sigma^2) = 0.04 + 0.02 + 0.01/3, E(Y | eps) = 0.25 eps
  const double noise = 0.04 + 0.02 + 0.01 / 3.0;
  const double total = 0.5 + noise;
  out.indices.s = { 0.5 / total, 0.0625 / total };
  return out;
}

AnalyticModel
parse_builtin_model(std::string_view text)
{
  if (text.starts_with("builtin:"))
    text.remove_prefix(8);
  if (text == "peakvalley")
    return peak_valley();
  if (text == "heterosine")
    return hetero_sine_model();
  constexpr std::string_view additive = "additive(";
  if (text.starts_with(additive) && text.ends_with(")")) {
    const auto body = text.substr(additive.size(), text.size() - additive.size() - 1);
    const auto comma = body.find(',');
    if (comma == std::string_view::npos)
      throw InvalidArgument("additive model needs two arguments: additive(rho,sigma)");
    return additive_gaussian(parse_argument(body.substr(0, comma)),
                             parse_argument(body.substr(comma + 1)));
  }
  throw InvalidArgument("unknown builtin model '" + std::string(text) +
                        "' (expected additive(rho,sigma), peakvalley or heterosine)");
}

} // namespace sensi
