#pragma once

#include <stdexcept>
#include <string>

namespace sensi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated.
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// No sample point carries nonzero kernel weight at an evaluation point.
class NoLocalData : public Error
{
public:
  NoLocalData(double point, double bandwidth, int input_index = -1);

  double point() const { return point_; }
  double bandwidth() const { return bandwidth_; }
  int input_index() const { return input_index_; }

  /// Same error, tagged with the input column it came from.
  NoLocalData with_input(int input_index) const
  {
    return NoLocalData(point_, bandwidth_, input_index);
  }

private:
  double point_;
  double bandwidth_;
  int input_index_;
};

/// The output sample has zero variance, so no index is defined.
class DegenerateOutput : public Error
{
public:
  using Error::Error;
};

/// Covariance matrix is asymmetric or indefinite beyond tolerance.
class InvalidCovariance : public Error
{
public:
  InvalidCovariance(const std::string& what, double min_eigenvalue)
    : Error(what)
    , min_eigenvalue_(min_eigenvalue)
  {
  }

  double min_eigenvalue() const { return min_eigenvalue_; }

private:
  double min_eigenvalue_;
};

} // namespace sensi
