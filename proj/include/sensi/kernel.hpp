#pragma once

#include <string>
#include <string_view>

namespace sensi {

enum class KernelFamily
{
  Gaussian,
  Epanechnikov,
  Uniform
};

/// A symmetric probability density used to weight observations.
///
/// Values below `kZeroCutoff` are reported as exactly zero, which gives the
/// Gaussian family an effective support of about 7.27 standard deviations.
struct KernelSpec
{
  KernelFamily family = KernelFamily::Gaussian;

  static constexpr double kZeroCutoff = 1e-12;

  double eval(double u) const;

  /// Radius outside of which eval() returns zero.
  double support_radius() const;

  bool operator==(const KernelSpec&) const = default;
};

inline double
eval(const KernelSpec& kernel, double u)
{
  return kernel.eval(u);
}

/// mu_k = int u^k K(u) du, for 0 <= k <= 7.
double
moment_mu(const KernelSpec& kernel, int k);

/// nu_k = int u^k K(u)^2 du, for 0 <= k <= 7.
double
moment_nu(const KernelSpec& kernel, int k);

/// Accepts "gaussian", "epanechnikov" or "uniform".
KernelSpec
parse_kernel(std::string_view name);

std::string
to_string(KernelFamily family);

} // namespace sensi
