#include "sensi/report.hpp"

#include "sensi/io.hpp"

#include "json.hpp"

#include <cmath>
#include <sstream>

namespace sensi {

namespace {

using nlohmann::ordered_json;

ordered_json
number_or_null(double v)
{
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

double
read_number(const ordered_json& j)
{
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

ordered_json
interval_json(const Interval& ci)
{
  return ordered_json::array({ number_or_null(ci.low), number_or_null(ci.high) });
}

Interval
read_interval(const ordered_json& j)
{
  return { read_number(j.at(0)), read_number(j.at(1)) };
}

std::string
csv_field(const std::string& text)
{
  if (text.find_first_of(",\"\n") == std::string::npos)
    return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + '"';
}

std::string
input_name(const ReportDocument& document, std::size_t i)
{
  return i < document.input_names.size() ? document.input_names[i]
                                         : "X" + std::to_string(i + 1);
}

} // namespace

std::string
to_json(const ReportDocument& document)
{
  const auto& r = document.report;
  ordered_json j;
  j["schema"] = ReportDocument::kSchema;
  j["source"] = document.source;
  j["settings"] = ordered_json::object();
  for (const auto& [key, value] : document.settings)
    j["settings"][key] = value;
  j["n"] = r.n;
  j["n_prime"] = r.n_prime;
  j["bootstrap_reps"] = r.bootstrap_reps;
  j["replications"] = r.replications;
  j["seed"] = r.seed;
  j["ci_level"] = r.ci_level;
  j["interval_method"] = r.interval_method;
  j["var_y"] = r.var_y;
  j["inputs"] = ordered_json::array();
  for (std::size_t i = 0; i < r.inputs.size(); ++i) {
    const auto& in = r.inputs[i];
    ordered_json e;
    e["index"] = in.input;
    e["name"] = input_name(document, i);
    e["s1_raw"] = in.s1_raw;
    e["s2_raw"] = in.s2_raw;
    e["s1_clipped"] = in.s1_clipped;
    e["s2_clipped"] = in.s2_clipped;
    e["s1_ci"] = interval_json(in.s1_ci);
    e["s2_ci"] = interval_json(in.s2_ci);
    e["h1"] = in.h1;
    e["h2"] = in.h2;
    e["t1"] = in.t1;
    e["t2"] = in.t2;
    e["clamped_count"] = in.clamped_count;
    j["inputs"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

ReportDocument
from_json(std::string_view text)
{
  ReportDocument document;
  try {
    const auto j = ordered_json::parse(text);
    const int schema = j.at("schema").get<int>();
    if (schema != ReportDocument::kSchema)
      throw MalformedInput("report schema " + std::to_string(schema) + " is not supported");
    document.source = j.at("source").get<std::string>();
    for (const auto& [key, value] : j.at("settings").items())
      document.settings[key] = value.get<std::string>();
    auto& r = document.report;
    r.n = j.at("n").get<std::size_t>();
    r.n_prime = j.at("n_prime").get<std::size_t>();
    r.bootstrap_reps = j.at("bootstrap_reps").get<int>();
    r.replications = j.at("replications").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ci_level = j.at("ci_level").get<double>();
    r.interval_method = j.at("interval_method").get<std::string>();
    r.var_y = j.at("var_y").get<double>();
    for (const auto& e : j.at("inputs")) {
      InputIndices in;
      in.input = e.at("index").get<std::size_t>();
      document.input_names.push_back(e.at("name").get<std::string>());
      in.s1_raw = read_number(e.at("s1_raw"));
      in.s2_raw = read_number(e.at("s2_raw"));
      in.s1_clipped = read_number(e.at("s1_clipped"));
      in.s2_clipped = read_number(e.at("s2_clipped"));
      in.s1_ci = read_interval(e.at("s1_ci"));
      in.s2_ci = read_interval(e.at("s2_ci"));
      in.h1 = read_number(e.at("h1"));
      in.h2 = read_number(e.at("h2"));
      in.t1 = read_number(e.at("t1"));
      in.t2 = read_number(e.at("t2"));
      in.clamped_count = e.at("clamped_count").get<int>();
      r.inputs.push_back(in);
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("report.json: ") + e.what());
  }
  return document;
}

std::string
indices_csv(const ReportDocument& document)
{
  std::ostringstream os;
  os << "input,estimator,value,ci_low,ci_high\n";
  const auto& inputs = document.report.inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& in = inputs[i];
    const auto name = csv_field(input_name(document, i));
    const auto row = [&](const char* estimator, double value, const Interval& ci) {
      os << name << ',' << estimator << ',' << format_double(value) << ','
         << (ci.empty() ? "" : format_double(ci.low)) << ','
         << (ci.empty() ? "" : format_double(ci.high)) << '\n';
    };
    row("S1", in.s1_raw, in.s1_ci);
    row("S2", in.s2_raw, in.s2_ci);
    row("S1_clipped", in.s1_clipped, {});
    row("S2_clipped", in.s2_clipped, {});
  }
  return os.str();
}

std::string
replicates_csv(const ReportDocument& document)
{
  std::ostringstream os;
  os << "replicate,input,s1_raw,s2_raw\n";
  for (const auto& row : document.report.replicates) {
    os << row.replicate << ',' << csv_field(input_name(document, row.input)) << ','
       << format_double(row.s1_raw) << ',' << format_double(row.s2_raw) << '\n';
  }
  return os.str();
}

} // namespace sensi
