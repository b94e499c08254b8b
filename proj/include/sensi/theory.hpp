#pragma once

#include "sensi/kernel.hpp"
#include "sensi/models.hpp"
#include "sensi/theory_config.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sensi {

/// Asymptotic bias and variance constants of T1 and T2 for one fixture.
struct TheoremConstants
{
  double m1 = 0.0; ///< h1^2 coefficient of the T1 bias
  double m2 = 0.0; ///< 1/(n h1) coefficient of the T1 bias
  double v1 = 0.0; ///< h2^2 coefficient of the T2 bias
  double v2 = 0.0; ///< h2^2 coefficient of n' Var(T2)
  double v3 = 0.0; ///< h1^2 coefficient of n' Var(T2)
  double v4 = 0.0; ///< 1/(n h2) coefficient of n' Var(T2)

  double var_mean = 0.0;      ///< Var(m(X))
  double mean_variance = 0.0; ///< E(sigma^2(X))
  double mean_variance_sq = 0.0; ///< E(sigma^4(X))

  KernelSpec kernel{};
  std::string model;

  double t1_bias(std::size_t n, double h1) const;
  double t2_bias(double h2) const;
  double t2_scaled_variance(std::size_t n, double h1, double h2) const;
};

/// All constants by adaptive Gauss-Kronrod quadrature over the fixture's
/// support, to the given relative tolerance.
TheoremConstants
compute_constants(const HeteroFixture& fixture, const KernelSpec& kernel,
                  double tolerance = 1e-10);

struct ExpansionConfig
{
  KernelSpec kernel{};
  int order_p = 1;
  int order_q = 1;
  std::vector<std::size_t> n_list{ 2000 };
  std::vector<double> h_list{ 0.08 }; ///< h1 values
  double h2 = 0.0;                    ///< variance-fit bandwidth, 0 means h2 = h1
  std::size_t n_prime = 2000;
  int reps = 200;
  std::uint64_t seed = 0;
  bool control_variates = true; ///< subtract the tilde-sample noise of the true moments

  void validate() const;
};

struct ExpansionRow
{
  std::size_t n = 0;
  double h1 = 0.0;
  double h2 = 0.0;
  int reps = 0;

  double t1_bias = 0.0;
  double t1_bias_se = 0.0;
  double t1_predicted = 0.0;

  double t2_bias = 0.0;
  double t2_bias_se = 0.0;
  double t2_predicted = 0.0;
  int t2_sign_agreements = 0; ///< replicates whose T2 error has the sign of V1

  double t2_scaled_variance = 0.0; ///< n' Var(T2) across replicates
  double t2_scaled_variance_predicted = 0.0;

  double t1_ratio() const { return t1_bias / t1_predicted; }
  double t2_ratio() const { return t2_bias / t2_predicted; }
  double t2_variance_ratio() const
  {
    return t2_scaled_variance / t2_scaled_variance_predicted;
  }
};

/// Least-squares fit of the measured T1 bias on (h^2, 1/(n h)).
struct BiasFit
{
  double h2_coefficient = 0.0;
  double inverse_nh_coefficient = 0.0;
};

struct ExpansionReport
{
  TheoremConstants constants;
  std::vector<ExpansionRow> rows;
  std::optional<BiasFit> fit; ///< present when the rows span both predictors
};

/// Monte-Carlo bias and variance of T1 and T2 at fixed bandwidths, compared
/// with the expansions. Each replicate draws a fresh design and tilde sample;
/// replicate r uses the same child seeds for every (n, h).
ExpansionReport
empirical_expansion_check(const HeteroFixture& fixture, const ExpansionConfig& config);

/// Least squares of bias on (h^2, 1/(n h)) without intercept; nullopt when
/// the design is rank deficient.
std::optional<BiasFit>
fit_t1_bias(const std::vector<ExpansionRow>& rows);

/// Long-format CSV: quantity,n,h1,h2,measured,std_error,predicted,ratio.
std::string
expansion_csv(const ExpansionReport& report);

} // namespace sensi
