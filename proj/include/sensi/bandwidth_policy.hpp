#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sensi {

/// Strictly increasing positive candidate bandwidths.
struct BandwidthGrid
{
  std::vector<double> values;

  /// `count` points spaced geometrically from `low` to `high` inclusive.
  static BandwidthGrid geometric(double low, double high, int count);

  /// Throws InvalidArgument unless the grid is strictly increasing, positive
  /// and holds at least `min_length` values.
  void validate(std::size_t min_length = 1) const;
};

/// User override for the automatic grid: bounds and point count.
struct GridRange
{
  double low = 0.0;
  double high = 0.0;
  int count = 12;
};

struct FixedBandwidth
{
  double value = 0.0;
};

/// Leave-one-out cross-validation over a grid.
struct LoocvBandwidth
{
  std::optional<GridRange> range; ///< automatic grid when empty
};

/// Empirical-bias bandwidth selection over a grid.
struct EbbsBandwidth
{
  std::optional<GridRange> range;
  int bias_order = 1; ///< 1: bias ~ a1 h^2; 2: adds a2 h^3
  int window = 5;     ///< grid neighbours in each local bias fit
};

using BandwidthPolicy = std::variant<FixedBandwidth, LoocvBandwidth, EbbsBandwidth>;

/// Parses "loocv", "ebbs" or "fixed:<value>".
BandwidthPolicy
parse_bandwidth_policy(std::string_view text);

/// Parses "min,max,count".
GridRange
parse_grid_range(std::string_view text);

std::string
describe(const BandwidthPolicy& policy);

} // namespace sensi
