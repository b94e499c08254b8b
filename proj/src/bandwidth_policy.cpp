#include "sensi/bandwidth_policy.hpp"

#include "sensi/errors.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace sensi {

namespace {

double
parse_number(std::string_view text, std::string_view what)
{
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw InvalidArgument("cannot parse " + std::string(what) + " from '" +
                          std::string(text) + "'");
  return value;
}

} // namespace

BandwidthGrid
BandwidthGrid::geometric(double low, double high, int count)
{
  if (!(low > 0.0) || !(high > low) || count < 2)
    throw InvalidArgument("geometric grid needs 0 < low < high and count >= 2");
  BandwidthGrid grid;
  grid.values.resize(static_cast<std::size_t>(count));
  const double ratio = std::log(high / low) / (count - 1);
  for (int k = 0; k < count; ++k)
    grid.values[static_cast<std::size_t>(k)] = low * std::exp(ratio * k);
  grid.values.front() = low;
  grid.values.back() = high;
  return grid;
}

void
BandwidthGrid::validate(std::size_t min_length) const
{
  if (values.size() < min_length)
    throw InvalidArgument("bandwidth grid has " + std::to_string(values.size()) +
                          " values, need at least " + std::to_string(min_length));
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0) || !std::isfinite(values[k]))
      throw InvalidArgument("bandwidth grid values must be positive");
    if (k > 0 && !(values[k] > values[k - 1]))
      throw InvalidArgument("bandwidth grid must be strictly increasing");
  }
}

BandwidthPolicy
parse_bandwidth_policy(std::string_view text)
{
  if (text == "loocv")
    return LoocvBandwidth{};
  if (text == "ebbs")
    return EbbsBandwidth{};
  constexpr std::string_view prefix = "fixed:";
  if (text.starts_with(prefix)) {
    const double value = parse_number(text.substr(prefix.size()), "fixed bandwidth");
    if (!(value > 0.0))
      throw InvalidArgument("fixed bandwidth must be positive");
    return FixedBandwidth{ value };
  }
  throw InvalidArgument("unknown bandwidth policy '" + std::string(text) +
                        "' (expected loocv, ebbs or fixed:<value>)");
}

GridRange
parse_grid_range(std::string_view text)
{
  const auto first = text.find(',');
  const auto second = first == std::string_view::npos ? first : text.find(',', first + 1);
  if (second == std::string_view::npos)
    throw InvalidArgument("bandwidth grid must be 'min,max,count', got '" +
                          std::string(text) + "'");
  GridRange range;
  range.low = parse_number(text.substr(0, first), "grid minimum");
  range.high = parse_number(text.substr(first + 1, second - first - 1), "grid maximum");
  const double count = parse_number(text.substr(second + 1), "grid count");
  if (count != std::floor(count) || count < 2)
    throw InvalidArgument("grid count must be an integer >= 2");
  range.count = static_cast<int>(count);
  if (!(range.low > 0.0) || !(range.high > range.low))
    throw InvalidArgument("grid bounds must satisfy 0 < min < max");
  return range;
}

std::string
describe(const BandwidthPolicy& policy)
{
  std::ostringstream os;
  if (const auto* fixed = std::get_if<FixedBandwidth>(&policy))
    os << "fixed:" << fixed->value;
  else if (std::holds_alternative<LoocvBandwidth>(policy))
    os << "loocv";
  else
    os << "ebbs";
  return os.str();
}

} // namespace sensi
