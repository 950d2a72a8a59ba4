// sicdf: single-index conditional distribution estimation from the command line.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or validation error.

#include "sicdf/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags
{
  sicdf::RunConfig config;
  std::optional<bool> standardize;
  std::string spheres = "grid";
  std::string h = "auto";
  std::string H = "auto";
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> h_replicates;
  std::optional<std::size_t> H_replicates;
  std::string estimator;
  std::string predictor = "index";
  std::vector<std::string> at;
  std::string model = "example1";
  std::string out;
};

std::optional<double> bandwidth_flag(const std::string& text, const char* name)
{
  if (text == "auto") {
    return std::nullopt;
  }
  double v = 0.0;
  if (!sicdf::csv_detail::parse_double(text, v) || !(v > 0.0)) {
    throw sicdf::ValidationError(std::string("--") + name + " must be a positive number or auto");
  }
  return v;
}

void add_data_options(CLI::App& cmd, Flags& f)
{
  auto& c = f.config;
  cmd.add_option("--data", c.data_path, "CSV file with covariate and response columns");
  cmd.add_option("--x-columns", c.x_columns, "Covariate column names, comma separated")->delimiter(',');
  cmd.add_option("--y-column", c.y_column, "Response column name")->capture_default_str();
  cmd.add_option("--series", c.series_path, "Single-column CSV holding a time series");
  cmd.add_option("--series-column", c.series_column, "Column of the series file")->capture_default_str();
  cmd.add_option("--lags", c.lags, "Lags embedded as covariates")->capture_default_str();
  cmd.add_option("--train-prefix", c.train_prefix,
                 "Fit on targets within the first N series points (0: all)")->capture_default_str();
  cmd.add_option("--validate-suffix", c.validate_suffix, "Hold out the last N rows")->capture_default_str();
  cmd.add_flag("--standardize,!--no-standardize", f.standardize,
               "Standardize covariates (default: on for --series, off otherwise)");
}

void add_fit_options(CLI::App& cmd, Flags& f)
{
  auto& c = f.config;
  cmd.add_option("--spheres", f.spheres, "Sphere centres: grid or data")
    ->check(CLI::IsMember({"grid", "data"}))->capture_default_str();
  cmd.add_option("--sphere-low", c.spheres.low, "Lowest grid coordinate")->capture_default_str();
  cmd.add_option("--sphere-high", c.spheres.high, "Highest grid coordinate")->capture_default_str();
  cmd.add_option("--sphere-points", c.spheres.points, "Grid points per axis")->capture_default_str();
  cmd.add_option("--radius", c.spheres.radius, "Sphere radius")->capture_default_str();
  cmd.add_option("--kernel", c.kernel, "Kernel name")->capture_default_str();
  cmd.add_option("--h", f.h, "Index-search bandwidth, or auto")->capture_default_str();
  cmd.add_option("--H", f.H, "Final-estimate bandwidth, or auto")->capture_default_str();
  cmd.add_option("--grid-start", c.grid_start, "First bandwidth candidate")->capture_default_str();
  cmd.add_option("--grid-ratio", c.grid_ratio, "Ratio between candidates")->capture_default_str();
  cmd.add_option("--grid-size", c.grid_size, "Number of candidates")->capture_default_str();
  cmd.add_option("--replicates", f.replicates, "Bootstrap replicates for both selectors");
  cmd.add_option("--h-replicates", f.h_replicates, "Bootstrap replicates for h (default 20)");
  cmd.add_option("--H-replicates", f.H_replicates, "Bootstrap replicates for H (default 20)");
  cmd.add_option("--restarts", c.options.restarts, "Extra simplex runs from random starts")->capture_default_str();
  cmd.add_option("--bootstrap-restarts", c.bootstrap_restarts,
                 "Extra simplex runs inside bootstrap refits")->capture_default_str();
  cmd.add_option("--max-iter", c.options.max_iterations, "Simplex iteration cap")->capture_default_str();
  cmd.add_option("--tol", c.options.rel_tolerance, "Simplex relative tolerance")->capture_default_str();
  cmd.add_option("--initial-step", c.options.initial_step, "Initial simplex edge")->capture_default_str();
  cmd.add_option("--init", c.init, "Initial direction: ols, random or v1,v2,...")->capture_default_str();
}

void add_common_options(CLI::App& cmd, Flags& f)
{
  cmd.add_option("--seed", f.config.seed, "Master random seed")->capture_default_str();
  cmd.add_option("--out", f.out, "Write the JSON document here instead of stdout");
}

sicdf::RunConfig resolve(Flags& f, const std::string& command)
{
  sicdf::RunConfig c = f.config;
  c.command = command;
  c.standardize = f.standardize.value_or(c.time_series());
  c.spheres.mode = f.spheres == "grid" ? sicdf::SphereConfig::Mode::grid : sicdf::SphereConfig::Mode::data;
  c.h = bandwidth_flag(f.h, "h");
  c.H = bandwidth_flag(f.H, "H");
  if (f.replicates) {
    c.h_replicates = c.H_replicates = *f.replicates;
  }
  if (f.h_replicates) {
    c.h_replicates = *f.h_replicates;
  }
  if (f.H_replicates) {
    c.H_replicates = *f.H_replicates;
  }
  if (!f.estimator.empty()) {
    c.estimator = sicdf::final_estimator_from_name(f.estimator);
  } else if (command == "simulate") {
    c.estimator = sicdf::FinalEstimator::local_linear;
  }
  c.predictor = sicdf::predictor_from_name(f.predictor);
  for (const auto& text : f.at) {
    c.at.push_back(sicdf::parse_vector(text));
  }
  c.model = sicdf::model_from_name(f.model);
  return c;
}

void write_document(const sicdf::json& doc, const std::string& out)
{
  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out);
  if (!file) {
    throw sicdf::ValidationError("cannot write '" + out + "'");
  }
  file << text;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Single-index conditional distribution estimation"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(0, 1);
  std::string replay;
  std::string replay_out;
  app.add_option("--replay", replay, "Re-run the config embedded in a JSON document");
  app.add_option("--out", replay_out, "Output path for --replay");

  Flags f;
  auto* fit = app.add_subcommand("fit", "Estimate the index direction and both bandwidths");
  auto* predict = app.add_subcommand("predict-interval", "Quantile prediction intervals");
  auto* select = app.add_subcommand("select-bandwidth", "Bootstrap selection of h and H");
  auto* simulate = app.add_subcommand("simulate", "Replicated simulation study");

  for (CLI::App* cmd : {fit, predict, select}) {
    add_data_options(*cmd, f);
    add_fit_options(*cmd, f);
    add_common_options(*cmd, f);
  }
  predict->add_option("--alpha", f.config.alpha, "Miscoverage level")->capture_default_str();
  predict->add_option("--estimator", f.estimator, "anw (default) or local-linear");
  predict->add_option("--predictor", f.predictor, "index, lag1 or lag12")->capture_default_str();
  predict->add_option("--at", f.at, "Evaluation point v1,v2,... (repeatable)");
  predict->add_flag("--last-window", f.config.last_window, "Predict the value after the series end");
  predict->add_option("--fit", f.config.fit_document, "Take theta and H from a fit document");

  add_fit_options(*simulate, f);
  add_common_options(*simulate, f);
  simulate->add_option("--model", f.model, "example1 or example2")->capture_default_str();
  simulate->add_option("--n", f.config.n, "Sample size")->capture_default_str();
  simulate->add_option("--replications", f.config.replications, "Replications")->capture_default_str();
  simulate->add_option("--multipliers", f.config.multipliers, "h multipliers from {0.7, 1, 1.5}")
    ->delimiter(',');
  simulate->add_option("--mc-size", f.config.mc_size, "Monte Carlo draws for example2 truth")
    ->capture_default_str();
  simulate->add_option("--estimator", f.estimator, "local-linear (default) or anw");
  simulate->add_option("--emit-data", f.config.emit_data, "Write one simulated sample as CSV and stop");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    sicdf::RunConfig config;
    std::string out;
    if (!replay.empty()) {
      if (!app.get_subcommands().empty()) {
        throw sicdf::ValidationError("--replay cannot be combined with a subcommand");
      }
      config = sicdf::config_from_document(sicdf::read_json_file(replay));
      out = replay_out;
    } else if (!app.get_subcommands().empty()) {
      CLI::App* cmd = app.get_subcommands().front();
      config = resolve(f, cmd->get_name());
      out = f.out;
    } else {
      std::cerr << app.help();
      return 2;
    }
    write_document(sicdf::run_command(config), out);
  } catch (const sicdf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sicdf::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
