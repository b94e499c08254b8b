#include "sensi/cli.hpp"

#include "sensi/errors.hpp"
#include "sensi/indices.hpp"
#include "sensi/io.hpp"
#include "sensi/models.hpp"
#include "sensi/report.hpp"
#include "sensi/rng.hpp"
#include "sensi/sampling.hpp"
#include "sensi/theory.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sensi {

namespace {

namespace fs = std::filesystem;

struct EstimateArgs
{
  std::string input;
  std::string tilde;
  std::string x_cols;
  std::string y_col;
  std::string model;
  std::string gaussian;
  std::string design = "random";
  std::size_t n = 100;
  std::size_t n_prime = 2000;
  int order_p = 1;
  int order_q = 1;
  std::string kernel1 = "gaussian";
  std::string kernel2 = "gaussian";
  std::string bandwidth = "loocv";
  std::string h_grid;
  int reps = 0;
  double ci = 0.95;
  std::uint64_t seed = 0;
  bool freeze = false;
  std::string out_dir = ".";
};

struct TheoryArgs
{
  std::string model = "heterosine";
  std::vector<std::size_t> n{ 2000 };
  std::vector<double> h{ 0.08 };
  double h2 = 0.0;
  std::size_t n_prime = 2000;
  int reps = 200;
  std::uint64_t seed = 0;
  std::string kernel = "gaussian";
  int order_p = 1;
  int order_q = 1;
  bool no_control_variates = false;
  std::string out;
};

// Errors raised while reading and validating the configuration.
struct SetupError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

void
apply_thread_cap(std::ostream& err)
{
  const char* value = std::getenv("SENSI_THREADS");
  if (value == nullptr || *value == '\0')
    return;
  char* end = nullptr;
  const long threads = std::strtol(value, &end, 10);
  if (*end != '\0' || threads < 1) {
    err << "warning: ignoring SENSI_THREADS='" << value << "'\n";
    return;
  }
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(threads));
#endif
}

BandwidthPolicy
make_policy(const EstimateArgs& args)
{
  auto policy = parse_bandwidth_policy(args.bandwidth);
  if (!args.h_grid.empty()) {
    const auto range = parse_grid_range(args.h_grid);
    if (auto* cv = std::get_if<LoocvBandwidth>(&policy))
      cv->range = range;
    else if (auto* ebbs = std::get_if<EbbsBandwidth>(&policy))
      ebbs->range = range;
    else
      throw InvalidArgument("--h-grid has no effect with a fixed bandwidth");
  }
  return policy;
}

EstimatorOptions
make_options(const EstimateArgs& args)
{
  EstimatorOptions options;
  const auto policy = make_policy(args);
  options.mean_fit.order = args.order_p;
  options.mean_fit.kernel = parse_kernel(args.kernel1);
  options.mean_fit.bandwidth = policy;
  options.variance_fit.order = args.order_q;
  options.variance_fit.kernel = parse_kernel(args.kernel2);
  options.variance_fit.bandwidth = policy;
  options.bootstrap_reps = 0;
  options.ci_level = args.ci;
  options.seed = args.seed;
  options.freeze_bandwidths = args.freeze;
  options.validate();
  return options;
}

void
write_file(const fs::path& path, const std::string& text)
{
  std::ofstream file(path, std::ios::binary);
  file << text;
  if (!file)
    throw SetupError("cannot write " + path.string());
}

// Model wrapper that counts evaluations.
ModelFunction
counting(ModelFunction model, std::shared_ptr<std::atomic<std::size_t>> counter)
{
  auto inner = std::move(model.eval);
  model.eval = [inner, counter](std::span<const double> x) {
    counter->fetch_add(1, std::memory_order_relaxed);
    return inner(x);
  };
  return model;
}

Eigen::MatrixXd
grid_design(const ModelFunction& model, bool unit_square)
{
  const auto* law = std::get_if<IndependentLaw>(&model.law);
  std::vector<double> low(model.dim, 0.0);
  std::vector<double> high(model.dim, 1.0);
  if (!unit_square) {
    if (law == nullptr)
      throw InvalidArgument("grid design needs uniform inputs");
    for (std::size_t c = 0; c < model.dim; ++c) {
      if (law->marginals[c].kind != Marginal::Kind::Uniform)
        throw InvalidArgument("grid design needs uniform inputs");
      low[c] = law->marginals[c].a;
      high[c] = law->marginals[c].b;
    }
  }
  return regular_grid(low, high, 6);
}

ReportDocument
estimate_builtin(const EstimateArgs& args, const EstimatorOptions& base, std::size_t& evaluations)
{
  const auto analytic = parse_builtin_model(args.model);
  auto counter = std::make_shared<std::atomic<std::size_t>>(0);
  const auto model = counting(analytic.model, counter);

  ReportDocument document;
  document.source = "builtin:" + analytic.model.name;
  for (std::size_t i = 0; i < model.dim; ++i)
    document.input_names.push_back("X" + std::to_string(i + 1));
  document.settings["design"] = args.design;

  EstimatorOptions options = base;
  if (args.design == "random") {
    if (args.reps > 1) {
      document.report = replicate_indices(model, args.n, args.n_prime, args.reps, options);
    } else {
      JointSample joint;
      joint.x = sample_inputs(model.law, args.n, child_seed(args.seed, 0));
      joint.y = evaluate_model(model, joint.x);
      TildeSample tilde{ sample_inputs(model.law, args.n_prime, child_seed(args.seed, 1)) };
      document.report = estimate_indices(joint, tilde, options);
    }
  } else {
    JointSample joint;
    joint.x = grid_design(model, args.design == "grid01");
    joint.y = evaluate_model(model, joint.x);
    TildeSample tilde{ sample_inputs(model.law, args.n_prime, child_seed(args.seed, 1)) };
    options.bootstrap_reps = std::max(args.reps, 0);
    document.report = estimate_indices(joint, tilde, options);
  }
  evaluations = counter->load();
  return document;
}

struct LoadedData
{
  JointSample joint;
  TildeSample tilde;
  std::vector<std::string> names;
};

LoadedData
load_data(const EstimateArgs& args)
{
  if (args.y_col.empty())
    throw MalformedInput("--y-col is required with --input");
  const auto table = read_numeric_csv(args.input, true);
  const auto y_index = select_columns(args.y_col, table.header);
  if (y_index.size() != 1)
    throw MalformedInput("--y-col must name exactly one column of " + args.input);

  std::vector<std::size_t> x_index;
  if (args.x_cols.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (c != y_index[0])
        x_index.push_back(c);
  } else {
    x_index = select_columns(args.x_cols, table.header);
  }
  for (std::size_t c : x_index) {
    if (c == y_index[0])
      throw MalformedInput("column '" + table.header[c] + "' is both an input and the output");
  }

  LoadedData data;
  for (std::size_t c : x_index)
    data.names.push_back(table.header[c]);
  data.joint.x = table_columns(table, x_index);
  const Eigen::MatrixXd y = table_columns(table, y_index);
  data.joint.y.assign(y.data(), y.data() + y.rows());
  const std::size_t d = x_index.size();

  if (!args.tilde.empty()) {
    const auto tilde_table = read_numeric_csv(args.tilde, true);
    std::vector<std::size_t> tilde_index;
    for (const auto& name : data.names) {
      const auto it = std::find(tilde_table.header.begin(), tilde_table.header.end(), name);
      if (it == tilde_table.header.end())
        break;
      tilde_index.push_back(static_cast<std::size_t>(it - tilde_table.header.begin()));
    }
    if (tilde_index.size() != d) {
      if (tilde_table.header.size() != d)
        throw MalformedInput(args.tilde + ": expected the " + std::to_string(d) +
                             " input columns of " + args.input);
      tilde_index.clear();
      for (std::size_t c = 0; c < d; ++c)
        tilde_index.push_back(c);
    }
    data.tilde.x = table_columns(tilde_table, tilde_index);
  } else if (!args.gaussian.empty()) {
    auto spec = load_gaussian_spec(args.gaussian);
    validate_gaussian(spec);
    if (spec.dim() != d)
      throw MalformedInput(args.gaussian + ": dimension " + std::to_string(spec.dim()) +
                           " does not match " + std::to_string(d) + " input columns");
    data.tilde.x = mvn_sample(spec, args.n_prime, child_seed(args.seed, 1));
  } else {
    throw MalformedInput("--input needs --tilde or --gaussian to supply the tilde sample");
  }
  return data;
}

void
print_summary(const ReportDocument& document, std::ostream& out)
{
  out << std::left << std::setw(12) << "input" << std::right << std::setw(10) << "S1"
      << std::setw(10) << "S2" << std::setw(10) << "h1" << std::setw(10) << "h2" << '\n';
  out << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < document.report.inputs.size(); ++i) {
    const auto& in = document.report.inputs[i];
    out << std::left << std::setw(12) << document.input_names[i] << std::right
        << std::setw(10) << in.s1_raw << std::setw(10) << in.s2_raw << std::setw(10)
        << in.h1 << std::setw(10) << in.h2 << '\n';
  }
  out << std::defaultfloat;
}

int
run_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err)
{
  EstimatorOptions options;
  LoadedData data;
  try {
    if (args.model.empty() == args.input.empty())
      throw MalformedInput("give exactly one of --model and --input");
    if (!args.model.empty() && (!args.tilde.empty() || !args.x_cols.empty() || !args.y_col.empty()))
      throw MalformedInput("--tilde, --x-cols and --y-col only apply with --input");
    if (args.design != "random" && args.design != "grid" && args.design != "grid01")
      throw MalformedInput("--design must be random, grid or grid01");
    options = make_options(args);
    if (!args.model.empty())
      parse_builtin_model(args.model);
    if (!args.input.empty())
      data = load_data(args);
    fs::create_directories(args.out_dir);
  } catch (const SetupError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformedInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformedInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformedInput;
  }

  ReportDocument document;
  std::size_t evaluations = 0;
  try {
    if (!args.model.empty()) {
      document = estimate_builtin(args, options, evaluations);
    } else {
      options.bootstrap_reps = std::max(args.reps, 0);
      document.report = estimate_indices(data.joint, data.tilde, options);
      document.source = args.input;
      document.input_names = data.names;
    }
  } catch (const DegenerateOutput& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerateData;
  } catch (const NoLocalData& e) {
    err << "error: " << e.what() << '\n';
    return kExitEstimationFailure;
  } catch (const Error& e) {
    err << "error: estimation failed: " << e.what() << '\n';
    return kExitEstimationFailure;
  }

  document.settings["order_p"] = std::to_string(args.order_p);
  document.settings["order_q"] = std::to_string(args.order_q);
  document.settings["kernel1"] = args.kernel1;
  document.settings["kernel2"] = args.kernel2;
  document.settings["bandwidth"] = args.bandwidth;
  document.settings["h_grid"] = args.h_grid.empty() ? "default" : args.h_grid;
  document.settings["freeze_bandwidths"] = args.freeze ? "true" : "false";
  document.settings["model_evaluations"] = std::to_string(evaluations);

  try {
    const fs::path dir(args.out_dir);
    write_file(dir / "report.json", to_json(document));
    write_file(dir / "indices.csv", indices_csv(document));
    if (!document.report.replicates.empty())
      write_file(dir / "replicates.csv", replicates_csv(document));
  } catch (const SetupError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformedInput;
  }
  print_summary(document, out);
  return kExitOk;
}

int
run_theory(const TheoryArgs& args, std::ostream& out, std::ostream& err)
{
  ExpansionConfig config;
  HeteroFixture fixture;
  try {
    fixture = hetero_fixture(args.model);
    config.kernel = parse_kernel(args.kernel);
    config.order_p = args.order_p;
    config.order_q = args.order_q;
    config.n_list = args.n;
    config.h_list = args.h;
    config.h2 = args.h2;
    config.n_prime = args.n_prime;
    config.reps = args.reps;
    config.seed = args.seed;
    config.control_variates = !args.no_control_variates;
    config.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformedInput;
  }

  ExpansionReport report;
  try {
    report = empirical_expansion_check(fixture, config);
  } catch (const Error& e) {
    err << "error: theory check failed: " << e.what() << '\n';
    return kExitEstimationFailure;
  }
  const auto csv = expansion_csv(report);
  if (args.out.empty()) {
    out << csv;
  } else {
    try {
      write_file(args.out, csv);
    } catch (const SetupError& e) {
      err << "error: " << e.what() << '\n';
      return kExitMalformedInput;
    }
  }
  return kExitOk;
}

} // namespace

int
run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "First-order sensitivity indices by local polynomial smoothing", "sensi" };
  EstimateArgs est;
  app.add_option("--input", est.input, "Joint sample CSV (header row, inputs and output)");
  app.add_option("--tilde", est.tilde, "Input-only CSV averaged over by T1 and T2");
  app.add_option("--x-cols", est.x_cols, "Input columns: 1-based indices, ranges or names");
  app.add_option("--y-col", est.y_col, "Output column");
  app.add_option("--gaussian", est.gaussian,
                 "Gaussian input law (JSON or CSV) used to draw the tilde sample");
  app.add_option("--model", est.model,
                 "builtin:additive(rho,sigma) | builtin:peakvalley | builtin:heterosine");
  app.add_option("--design", est.design, "Builtin design: random, grid (6 per axis) or grid01")
    ->capture_default_str();
  app.add_option("--n", est.n, "Joint sample size for builtin models")->capture_default_str();
  app.add_option("--nprime", est.n_prime, "Tilde sample size when generated")
    ->capture_default_str();
  app.add_option("--order-p", est.order_p, "Polynomial order of the mean fit")
    ->capture_default_str();
  app.add_option("--order-q", est.order_q, "Polynomial order of the variance fit")
    ->capture_default_str();
  app.add_option("--kernel1", est.kernel1, "Kernel of the mean fit")->capture_default_str();
  app.add_option("--kernel2", est.kernel2, "Kernel of the variance fit")->capture_default_str();
  app.add_option("--bandwidth", est.bandwidth, "loocv | ebbs | fixed:<h>")
    ->capture_default_str();
  app.add_option("--h-grid", est.h_grid, "Bandwidth grid min,max,count");
  app.add_option("--reps", est.reps,
                 "Builtin random design: independent replications; otherwise bootstrap "
                 "replicates")
    ->capture_default_str();
  app.add_option("--ci", est.ci, "Interval coverage")->capture_default_str();
  app.add_option("--seed", est.seed, "Master seed")->capture_default_str();
  app.add_flag("--freeze-bandwidths", est.freeze, "Reuse full-sample bandwidths in bootstrap");
  app.add_option("--out-dir", est.out_dir, "Output directory")->capture_default_str();

  TheoryArgs th;
  auto* theory = app.add_subcommand("theory-check", "Compare T1/T2 bias with the expansions");
  theory->set_help_flag("--help", "Print this help message and exit");
  theory->add_option("--model", th.model, "heterosine | heterolinear | sine-noiseless")
    ->capture_default_str();
  theory->add_option("--n", th.n, "Sample sizes")->delimiter(',')->capture_default_str();
  theory->add_option("--h", th.h, "Mean-fit bandwidths")->delimiter(',')->capture_default_str();
  theory->add_option("--h2", th.h2, "Variance-fit bandwidth (0: same as h)")
    ->capture_default_str();
  theory->add_option("--nprime", th.n_prime, "Tilde sample size")->capture_default_str();
  theory->add_option("--reps", th.reps, "Monte-Carlo replicates")->capture_default_str();
  theory->add_option("--seed", th.seed, "Master seed")->capture_default_str();
  theory->add_option("--kernel", th.kernel, "Kernel of both fits")->capture_default_str();
  theory->add_option("--order-p", th.order_p, "Mean-fit order")->capture_default_str();
  theory->add_option("--order-q", th.order_q, "Variance-fit order")->capture_default_str();
  theory->add_flag("--no-control-variates", th.no_control_variates,
                   "Measure against the population moments directly");
  theory->add_option("--out", th.out, "CSV path (default: stdout)");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformedInput;
  }

  apply_thread_cap(err);
  if (theory->parsed())
    return run_theory(th, out, err);
  return run_estimate(est, out, err);
}

} // namespace sensi
