#include "sensi/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sensi {

namespace {

std::string_view
trim(std::string_view text)
{
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() &&
         (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  return text;
}

std::vector<std::string_view>
split_fields(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return fields;
}

bool
parse_double(std::string_view text, double& value)
{
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && !text.empty();
}

} // namespace

NumericTable
read_numeric_csv(const std::filesystem::path& path, bool has_header)
{
  std::ifstream in(path);
  if (!in)
    throw MalformedInput("cannot open " + path.string());

  NumericTable table;
  std::string line;
  std::size_t line_number = 0;
  std::size_t width = 0;
  bool expecting_header = has_header;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1 && line.starts_with("\xEF\xBB\xBF"))
      line.erase(0, 3);
    if (trim(line).empty())
      continue;
    const auto fields = split_fields(line);
    if (expecting_header) {
      for (const auto field : fields)
        table.header.emplace_back(field);
      width = fields.size();
      expecting_header = false;
      continue;
    }
    if (width == 0)
      width = fields.size();
    if (fields.size() != width)
      throw MalformedInput(path.string() + ":" + std::to_string(line_number) +
                           ": expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!parse_double(fields[k], row[k]) || !std::isfinite(row[k]))
        throw MalformedInput(path.string() + ":" + std::to_string(line_number) +
                             ": field " + std::to_string(k + 1) + " ('" +
                             std::string(fields[k]) + "') is not a finite number");
    }
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(line_number);
  }
  if (expecting_header)
    throw MalformedInput(path.string() + ": missing header row");
  return table;
}

std::vector<std::size_t>
select_columns(std::string_view selection, const std::vector<std::string>& header)
{
  std::vector<std::size_t> out;
  const auto width = header.size();
  auto check_index = [&](long long one_based, std::string_view token) {
    if (one_based < 1 || static_cast<std::size_t>(one_based) > width)
      throw MalformedInput("column '" + std::string(token) + "' is out of range (file has " +
                           std::to_string(width) + " columns)");
    return static_cast<std::size_t>(one_based - 1);
  };
  auto parse_int = [](std::string_view text, long long& value) {
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc() && ptr == end && !text.empty();
  };

  for (const auto raw : split_fields(selection)) {
    const auto token = trim(raw);
    if (token.empty())
      throw MalformedInput("empty column selection in '" + std::string(selection) + "'");
    const auto name = std::find(header.begin(), header.end(), token);
    if (name != header.end()) {
      out.push_back(static_cast<std::size_t>(name - header.begin()));
      continue;
    }
    long long first = 0;
    long long last = 0;
    const auto dash = token.find('-', 1);
    if (dash != std::string_view::npos && parse_int(token.substr(0, dash), first) &&
        parse_int(token.substr(dash + 1), last)) {
      if (last < first)
        throw MalformedInput("column range '" + std::string(token) + "' is reversed");
      for (long long k = first; k <= last; ++k)
        out.push_back(check_index(k, token));
      continue;
    }
    if (parse_int(token, first)) {
      out.push_back(check_index(first, token));
      continue;
    }
    throw MalformedInput("column '" + std::string(token) + "' not found in header");
  }
  return out;
}

Eigen::MatrixXd
table_columns(const NumericTable& table, const std::vector<std::size_t>& columns)
{
  Eigen::MatrixXd out(static_cast<Eigen::Index>(table.rows.size()),
                      static_cast<Eigen::Index>(columns.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < columns.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
        table.rows[r].at(columns[c]);
  return out;
}

std::string
format_double(double value)
{
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

} // namespace sensi
