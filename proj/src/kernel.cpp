#include "sensi/kernel.hpp"

#include "sensi/errors.hpp"

#include <cmath>
#include <numbers>

namespace sensi {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// radius where the standard normal density drops to the zero cutoff
const double kGaussianRadius =
  std::sqrt(-2.0 * std::log(KernelSpec::kZeroCutoff / kInvSqrt2Pi));

double
double_factorial(int k)
{
  double out = 1.0;
  for (int j = k; j > 1; j -= 2)
    out *= j;
  return out;
}

void
check_order(int k)
{
  if (k < 0 || k > 7)
    throw InvalidArgument("kernel moment order must lie in [0, 7], got " +
                          std::to_string(k));
}

} // namespace

double
KernelSpec::eval(double u) const
{
  double value = 0.0;
  switch (family) {
    case KernelFamily::Gaussian:
      value = kInvSqrt2Pi * std::exp(-0.5 * u * u);
      break;
    case KernelFamily::Epanechnikov:
      value = std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
      break;
    case KernelFamily::Uniform:
      value = std::abs(u) <= 1.0 ? 0.5 : 0.0;
      break;
  }
  return value < kZeroCutoff ? 0.0 : value;
}

double
KernelSpec::support_radius() const
{
  return family == KernelFamily::Gaussian ? kGaussianRadius : 1.0;
}

double
moment_mu(const KernelSpec& kernel, int k)
{
  check_order(k);
  if (k % 2 == 1)
    return 0.0;
  switch (kernel.family) {
    case KernelFamily::Gaussian:
      return double_factorial(k - 1);
    case KernelFamily::Epanechnikov:
      return 1.5 * (1.0 / (k + 1) - 1.0 / (k + 3));
    case KernelFamily::Uniform:
      return 1.0 / (k + 1);
  }
  return 0.0;
}

double
moment_nu(const KernelSpec& kernel, int k)
{
  check_order(k);
  if (k % 2 == 1)
    return 0.0;
  switch (kernel.family) {
    case KernelFamily::Gaussian:
      // K^2 is 1/(2 sqrt(pi)) times the N(0, 1/2) density
      return 0.5 / std::sqrt(std::numbers::pi) * double_factorial(k - 1) /
             std::pow(2.0, k / 2);
    case KernelFamily::Epanechnikov:
      return 1.125 * (1.0 / (k + 1) - 2.0 / (k + 3) + 1.0 / (k + 5));
    case KernelFamily::Uniform:
      return 0.5 / (k + 1);
  }
  return 0.0;
}

KernelSpec
parse_kernel(std::string_view name)
{
  if (name == "gaussian")
    return { KernelFamily::Gaussian };
  if (name == "epanechnikov")
    return { KernelFamily::Epanechnikov };
  if (name == "uniform")
    return { KernelFamily::Uniform };
  throw InvalidArgument("unknown kernel '" + std::string(name) +
                        "' (expected gaussian, epanechnikov or uniform)");
}

std::string
to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::Epanechnikov:
      return "epanechnikov";
    case KernelFamily::Uniform:
      return "uniform";
  }
  return "unknown";
}

} // namespace sensi
