#pragma once

#include "sensi/indices.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sensi {

/// Everything written to report.json.
struct ReportDocument
{
  static constexpr int kSchema = 1;

  SensitivityReport report;
  std::string source; ///< model name or input file
  std::vector<std::string> input_names;
  std::map<std::string, std::string> settings;
};

/// Pretty-printed JSON with a trailing newline. Missing intervals are null.
std::string
to_json(const ReportDocument& document);

/// Inverse of to_json; to_json(from_json(text)) == text for its own output.
/// Throws MalformedInput on a schema mismatch.
ReportDocument
from_json(std::string_view text);

/// Tidy table: input,estimator,value,ci_low,ci_high with estimators
/// S1, S2 (raw) and S1_clipped, S2_clipped.
std::string
indices_csv(const ReportDocument& document);

/// replicate,input,s1_raw,s2_raw
std::string
replicates_csv(const ReportDocument& document);

} // namespace sensi
