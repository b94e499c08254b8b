#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sensi {

class Rng;

/// Multivariate normal input law.
struct GaussianSpec
{
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

struct CovarianceCheck
{
  double min_eigenvalue = 0.0;
  bool projected = false; ///< small negative eigenvalues were zeroed
};

/// Symmetric entries agree to 1e-12 and eigenvalues are >= -1e-10. Matrices
/// with eigenvalues in [-1e-10, 0) are projected onto the PSD cone in place
/// and the projection is written to std::clog. Throws InvalidCovariance.
CovarianceCheck
validate_gaussian(GaussianSpec& spec);

/// Lower factor L with L L^T = cov: Cholesky when positive definite,
/// otherwise the symmetric eigen square root.
Eigen::MatrixXd
covariance_factor(const Eigen::MatrixXd& cov);

/// n x d matrix of draws mean + L z, z standard normal from Rng(seed).
Eigen::MatrixXd
mvn_sample(const GaussianSpec& spec, std::size_t n, std::uint64_t seed);

/// Law of the other d-1 coordinates given X_i = xi.
GaussianSpec
conditional_mvn(const GaussianSpec& spec, std::size_t i, double xi);

/// Draws X_i from its marginal and completes the vector from the exact
/// conditional law of the remaining coordinates.
class ConditionalSampler
{
public:
  ConditionalSampler(GaussianSpec spec, std::size_t conditioned_index);

  std::size_t conditioned_index() const { return index_; }
  const GaussianSpec& spec() const { return spec_; }

  double draw_marginal(Rng& rng) const;

  /// r x d full input vectors with column i fixed at xi.
  Eigen::MatrixXd complete(double xi, std::size_t r, Rng& rng) const;

private:
  GaussianSpec spec_;
  std::size_t index_;
  Eigen::VectorXd gain_;        ///< cov_{-i,i} / cov_{i,i}
  Eigen::MatrixXd factor_;      ///< factor of the Schur complement
  Eigen::VectorXd other_mean_;  ///< mean_{-i}
};

/// n x d uniform draws on the box [low, high]; with `lhs` each column is
/// stratified into n equal cells holding one point each.
Eigen::MatrixXd
uniform_sample(std::span<const double> low, std::span<const double> high, std::size_t n,
               std::uint64_t seed, bool lhs);

/// Regular grid with `per_axis` points per axis (corners included), d = low.size(),
/// the first coordinate varying slowest.
Eigen::MatrixXd
regular_grid(std::span<const double> low, std::span<const double> high,
             std::size_t per_axis);

/// Loads {"mean": [...], "cov": [[...], ...]} (.json) or a CSV whose first
/// row is the mean and next d rows the covariance. A "correlation" key with
/// an optional "std" vector is accepted in place of "cov".
GaussianSpec
load_gaussian_spec(const std::filesystem::path& path);

/// Pearson correlation matrix of the columns of `samples`.
Eigen::MatrixXd
sample_correlation(const Eigen::MatrixXd& samples);

} // namespace sensi
