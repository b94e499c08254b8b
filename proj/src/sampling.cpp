#include "sensi/sampling.hpp"

#include "sensi/errors.hpp"
#include "sensi/io.hpp"
#include "sensi/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

namespace sensi {

namespace {

constexpr double kAsymmetryTolerance = 1e-12;
constexpr double kEigenTolerance = 1e-10;

void
check_shape(const GaussianSpec& spec)
{
  if (spec.mean.size() == 0)
    throw InvalidArgument("Gaussian spec has dimension 0");
  if (spec.cov.rows() != spec.mean.size() || spec.cov.cols() != spec.mean.size())
    throw InvalidArgument("covariance must be " + std::to_string(spec.mean.size()) +
                          "x" + std::to_string(spec.mean.size()));
  if (!spec.mean.allFinite() || !spec.cov.allFinite())
    throw InvalidArgument("Gaussian spec has non-finite entries");
}

} // namespace

CovarianceCheck
validate_gaussian(GaussianSpec& spec)
{
  check_shape(spec);
  const double asymmetry = (spec.cov - spec.cov.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > kAsymmetryTolerance)
    throw InvalidCovariance("covariance is not symmetric (max asymmetry " +
                              std::to_string(asymmetry) + ")",
                            std::nan(""));

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(spec.cov);
  CovarianceCheck check;
  check.min_eigenvalue = eigen.eigenvalues().minCoeff();
  if (check.min_eigenvalue < -kEigenTolerance)
    throw InvalidCovariance("covariance is not positive semi-definite (smallest "
                            "eigenvalue " +
                              std::to_string(check.min_eigenvalue) + ")",
                            check.min_eigenvalue);
  if (check.min_eigenvalue < 0.0) {
    const Eigen::VectorXd clipped = eigen.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd projected =
      eigen.eigenvectors() * clipped.asDiagonal() * eigen.eigenvectors().transpose();
    spec.cov = 0.5 * (projected + projected.transpose());
    check.projected = true;
    std::clog << "sensi: covariance projected onto the PSD cone (smallest eigenvalue "
              << check.min_eigenvalue << ")\n";
  }
  return check;
}

Eigen::MatrixXd
covariance_factor(const Eigen::MatrixXd& cov)
{
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success)
    return llt.matrixL();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(cov);
  return eigen.eigenvectors() * eigen.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd
mvn_sample(const GaussianSpec& spec, std::size_t n, std::uint64_t seed)
{
  if (n < 1)
    throw InvalidArgument("mvn_sample needs n >= 1");
  GaussianSpec checked = spec;
  validate_gaussian(checked);
  const Eigen::MatrixXd factor = covariance_factor(checked.cov);
  const auto d = checked.mean.size();
  const auto rows = static_cast<Eigen::Index>(n);

  Rng rng(seed);
  Eigen::MatrixXd out(rows, d);
  Eigen::VectorXd z(d);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < d; ++c)
      z(c) = rng.normal();
    out.row(r) = (checked.mean + factor * z).transpose();
  }
  return out;
}

GaussianSpec
conditional_mvn(const GaussianSpec& spec, std::size_t i, double xi)
{
  check_shape(spec);
  const auto d = static_cast<std::size_t>(spec.mean.size());
  if (i >= d)
    throw InvalidArgument("conditioned index out of range");
  const auto ii = static_cast<Eigen::Index>(i);
  const double var_i = spec.cov(ii, ii);
  if (!(var_i > 0.0))
    throw InvalidArgument("cannot condition on a coordinate with zero variance");

  std::vector<Eigen::Index> others;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k)
    if (k != ii)
      others.push_back(k);
  const auto m = static_cast<Eigen::Index>(others.size());

  GaussianSpec out;
  out.mean.resize(m);
  out.cov.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double gain = spec.cov(others[a], ii) / var_i;
    out.mean(a) = spec.mean(others[a]) + gain * (xi - spec.mean(ii));
    for (Eigen::Index b = 0; b < m; ++b)
      out.cov(a, b) = spec.cov(others[a], others[b]) -
                      spec.cov(others[a], ii) * spec.cov(ii, others[b]) / var_i;
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

ConditionalSampler::ConditionalSampler(GaussianSpec spec, std::size_t conditioned_index)
  : spec_(std::move(spec))
  , index_(conditioned_index)
{
  validate_gaussian(spec_);
  // the conditional law at the marginal mean carries the Schur complement
  const GaussianSpec at_mean =
    conditional_mvn(spec_, index_, spec_.mean(static_cast<Eigen::Index>(index_)));
  other_mean_ = at_mean.mean;
  factor_ = covariance_factor(at_mean.cov);
  const auto ii = static_cast<Eigen::Index>(index_);
  gain_.resize(other_mean_.size());
  Eigen::Index a = 0;
  for (Eigen::Index k = 0; k < spec_.mean.size(); ++k)
    if (k != ii)
      gain_(a++) = spec_.cov(k, ii) / spec_.cov(ii, ii);
}

double
ConditionalSampler::draw_marginal(Rng& rng) const
{
  const auto ii = static_cast<Eigen::Index>(index_);
  return spec_.mean(ii) + std::sqrt(spec_.cov(ii, ii)) * rng.normal();
}

Eigen::MatrixXd
ConditionalSampler::complete(double xi, std::size_t r, Rng& rng) const
{
  const auto d = spec_.mean.size();
  const auto ii = static_cast<Eigen::Index>(index_);
  const Eigen::VectorXd centre = other_mean_ + gain_ * (xi - spec_.mean(ii));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(r), d);
  Eigen::VectorXd z(centre.size());
  for (Eigen::Index row = 0; row < static_cast<Eigen::Index>(r); ++row) {
    for (Eigen::Index c = 0; c < z.size(); ++c)
      z(c) = rng.normal();
    const Eigen::VectorXd rest = centre + factor_ * z;
    Eigen::Index a = 0;
    for (Eigen::Index k = 0; k < d; ++k)
      out(row, k) = k == ii ? xi : rest(a++);
  }
  return out;
}

Eigen::MatrixXd
uniform_sample(std::span<const double> low, std::span<const double> high, std::size_t n,
               std::uint64_t seed, bool lhs)
{
  if (low.size() != high.size() || low.empty())
    throw InvalidArgument("uniform bounds must be nonempty and of equal length");
  for (std::size_t k = 0; k < low.size(); ++k) {
    if (!(low[k] < high[k]))
      throw InvalidArgument("uniform bounds need low < high in every coordinate");
  }
  if (n < 1)
    throw InvalidArgument("uniform_sample needs n >= 1");

  const auto d = static_cast<Eigen::Index>(low.size());
  const auto rows = static_cast<Eigen::Index>(n);
  Rng rng(seed);
  Eigen::MatrixXd out(rows, d);
  if (!lhs) {
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < d; ++c)
        out(r, c) = rng.uniform(low[static_cast<std::size_t>(c)],
                                high[static_cast<std::size_t>(c)]);
    return out;
  }
  std::vector<std::size_t> cells(n);
  for (Eigen::Index c = 0; c < d; ++c) {
    std::iota(cells.begin(), cells.end(), std::size_t{ 0 });
    // Fisher-Yates with the library generator, for reproducibility
    for (std::size_t k = n; k > 1; --k)
      std::swap(cells[k - 1], cells[rng.index(k)]);
    const double lo = low[static_cast<std::size_t>(c)];
    const double width = high[static_cast<std::size_t>(c)] - lo;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double u =
        (static_cast<double>(cells[static_cast<std::size_t>(r)]) + rng.uniform()) /
        static_cast<double>(n);
      out(r, c) = lo + width * u;
    }
  }
  return out;
}

Eigen::MatrixXd
regular_grid(std::span<const double> low, std::span<const double> high,
             std::size_t per_axis)
{
  if (low.size() != high.size() || low.empty())
    throw InvalidArgument("grid bounds must be nonempty and of equal length");
  if (per_axis < 2)
    throw InvalidArgument("regular grid needs at least 2 points per axis");
  const std::size_t d = low.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k)
    total *= per_axis;

  Eigen::MatrixXd out(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d));
  for (std::size_t row = 0; row < total; ++row) {
    std::size_t rest = row;
    for (std::size_t c = d; c-- > 0;) {
      const std::size_t step = rest % per_axis;
      rest /= per_axis;
      const double t = static_cast<double>(step) / static_cast<double>(per_axis - 1);
      out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) =
        step + 1 == per_axis ? high[c] : low[c] + t * (high[c] - low[c]);
    }
  }
  return out;
}

GaussianSpec
load_gaussian_spec(const std::filesystem::path& path)
{
  GaussianSpec spec;
  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in)
      throw InvalidArgument("cannot open " + path.string());
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(path.string() + ": " + e.what());
    }
    try {
      const auto mean = doc.at("mean").get<std::vector<double>>();
      const auto d = static_cast<Eigen::Index>(mean.size());
      spec.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
      const bool has_cov = doc.contains("cov");
      const auto rows =
        doc.at(has_cov ? "cov" : "correlation").get<std::vector<std::vector<double>>>();
      if (static_cast<Eigen::Index>(rows.size()) != d)
        throw InvalidArgument(path.string() + ": matrix has " +
                              std::to_string(rows.size()) + " rows, expected " +
                              std::to_string(d));
      spec.cov.resize(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != d)
          throw InvalidArgument(path.string() + ": matrix row " + std::to_string(r + 1) +
                                " has the wrong length");
        for (Eigen::Index c = 0; c < d; ++c)
          spec.cov(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
      if (!has_cov && doc.contains("std")) {
        const auto sd = doc.at("std").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(sd.size()) != d)
          throw InvalidArgument(path.string() + ": std has the wrong length");
        const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(sd.data(), d);
        spec.cov = s.asDiagonal() * spec.cov * s.asDiagonal();
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(path.string() + ": " + e.what());
    }
  } else {
    const auto table = read_numeric_csv(path, false);
    if (table.rows.empty())
      throw InvalidArgument(path.string() + ": empty Gaussian spec");
    const auto d = table.rows.front().size();
    if (table.rows.size() != d + 1)
      throw InvalidArgument(path.string() + ": expected 1 mean row and " +
                            std::to_string(d) + " covariance rows");
    spec.mean.resize(static_cast<Eigen::Index>(d));
    spec.cov.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c)
      spec.mean(static_cast<Eigen::Index>(c)) = table.rows[0][c];
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        spec.cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          table.rows[r + 1][c];
  }
  validate_gaussian(spec);
  return spec;
}

Eigen::MatrixXd
sample_correlation(const Eigen::MatrixXd& samples)
{
  if (samples.rows() < 2)
    throw InvalidArgument("correlation needs at least 2 rows");
  const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
  const Eigen::MatrixXd cov = centred.transpose() * centred;
  const Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
  return inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
}

} // namespace sensi
