#include "sensi/errors.hpp"

#include <sstream>

namespace sensi {

namespace {

std::string
describe(double point, double bandwidth, int input_index)
{
  std::ostringstream os;
  os.precision(17);
  os << "no local data: every kernel weight is zero at x0=" << point
     << " (h=" << bandwidth << ")";
  if (input_index >= 0)
    os << " for input " << input_index + 1;
  return os.str();
}

} // namespace

NoLocalData::NoLocalData(double point, double bandwidth, int input_index)
  : Error(describe(point, bandwidth, input_index))
  , point_(point)
  , bandwidth_(bandwidth)
  , input_index_(input_index)
{
}

} // namespace sensi
