#pragma once

#include "sensi/errors.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sensi {

/// Unreadable or malformed input file; the message names file and line.
class MalformedInput : public InvalidArgument
{
public:
  using InvalidArgument::InvalidArgument;
};

struct NumericTable
{
  std::vector<std::string> header; ///< empty when read without a header
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers; ///< 1-based source line of each row
};

/// Comma-separated numbers, one record per line; blank lines are skipped.
/// Every row must have the same number of fields.
NumericTable
read_numeric_csv(const std::filesystem::path& path, bool has_header);

/// Resolves a column selection against a header: 1-based indices, ranges
/// ("1-8"), comma lists ("1,3,5") or column names. Returns 0-based indices.
std::vector<std::size_t>
select_columns(std::string_view selection, const std::vector<std::string>& header);

/// Columns of `table` as an n x k matrix.
Eigen::MatrixXd
table_columns(const NumericTable& table, const std::vector<std::size_t>& columns);

/// Shortest decimal text that reads back to the same double.
std::string
format_double(double value);

} // namespace sensi
