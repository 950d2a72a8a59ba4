#pragma once

// Command implementations behind the sicdf executable. A RunConfig holds
// every parameter with its default filled in; each command turns a config
// into a JSON document that embeds the config, so running a document's
// config again reproduces the document exactly.

#include "sicdf/anw.hpp"
#include "sicdf/anw_multivariate.hpp"
#include "sicdf/bandwidth.hpp"
#include "sicdf/criterion.hpp"
#include "sicdf/csv.hpp"
#include "sicdf/dataset.hpp"
#include "sicdf/fit.hpp"
#include "sicdf/kernel.hpp"
#include "sicdf/rng.hpp"
#include "sicdf/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sicdf {

using json = nlohmann::ordered_json;

inline constexpr const char* kDocumentFormat = "sicdf-document/1";

enum class Predictor
{
  index,
  lag1,
  lag12,
};

inline const char* to_string(Predictor p)
{
  switch (p) {
  case Predictor::index: return "index";
  case Predictor::lag1: return "lag1";
  case Predictor::lag12: return "lag12";
  }
  return "index";
}

inline Predictor predictor_from_name(const std::string& name)
{
  if (name == "index") {
    return Predictor::index;
  }
  if (name == "lag1") {
    return Predictor::lag1;
  }
  if (name == "lag12") {
    return Predictor::lag12;
  }
  throw ValidationError("unknown predictor '" + name + "' (expected index, lag1 or lag12)");
}

struct RunConfig
{
  std::string command;

  // tabular input
  std::string data_path;
  std::vector<std::string> x_columns;
  std::string y_column = "y";
  // time-series input
  std::string series_path;
  std::string series_column = "y";
  std::size_t lags = 2;
  std::size_t train_prefix = 0;     // series points used for fitting; 0 = all
  std::size_t validate_suffix = 0;  // last rows held out for intervals
  bool standardize = false;

  SphereConfig spheres;
  std::string kernel = "epanechnikov";

  std::optional<double> h;  // empty: bootstrap selection
  std::optional<double> H;
  double grid_start = 0.1;
  double grid_ratio = 1.2;
  std::size_t grid_size = 15;
  std::size_t h_replicates = 20;
  std::size_t H_replicates = 20;

  SimplexOptions options;
  std::size_t bootstrap_restarts = 0;
  std::string init = "ols";  // ols | random | comma-separated vector

  double alpha = 0.1;
  FinalEstimator estimator = FinalEstimator::anw;
  Predictor predictor = Predictor::index;
  std::vector<std::vector<double>> at;
  bool last_window = false;
  std::string fit_document;

  Model model = Model::example1;
  std::size_t n = 200;
  std::size_t replications = 10;
  std::vector<double> multipliers{1.0};
  std::size_t mc_size = kMinMonteCarloSize;
  std::string emit_data;

  std::uint64_t seed = 1;

  bool time_series() const { return !series_path.empty(); }

  SimplexOptions bootstrap_options() const
  {
    SimplexOptions o = options;
    o.restarts = bootstrap_restarts;
    return o;
  }

  BandwidthGrid grid() const { return BandwidthGrid::geometric(grid_start, grid_ratio, grid_size); }
};

namespace detail {

inline json optional_bandwidth(const std::optional<double>& v)
{
  return v ? json(*v) : json("auto");
}

inline std::optional<double> parse_bandwidth(const json& v)
{
  if (v.is_string()) {
    if (v.get<std::string>() != "auto") {
      throw ValidationError("bandwidth must be a number or \"auto\"");
    }
    return std::nullopt;
  }
  return v.get<double>();
}

} // namespace detail

inline json to_json(const RunConfig& c)
{
  json j;
  j["command"] = c.command;
  j["data"] = {{"path", c.data_path}, {"x_columns", c.x_columns}, {"y_column", c.y_column}};
  j["series"] = {{"path", c.series_path},         {"column", c.series_column},
                 {"lags", c.lags},                {"train_prefix", c.train_prefix},
                 {"validate_suffix", c.validate_suffix}};
  j["standardize"] = c.standardize;
  j["spheres"] = {{"mode", c.spheres.mode == SphereConfig::Mode::grid ? "grid" : "data"},
                  {"low", c.spheres.low},
                  {"high", c.spheres.high},
                  {"points", c.spheres.points},
                  {"radius", c.spheres.radius}};
  j["kernel"] = c.kernel;
  j["bandwidth"] = {{"h", detail::optional_bandwidth(c.h)},
                    {"H", detail::optional_bandwidth(c.H)},
                    {"grid_start", c.grid_start},
                    {"grid_ratio", c.grid_ratio},
                    {"grid_size", c.grid_size},
                    {"h_replicates", c.h_replicates},
                    {"H_replicates", c.H_replicates}};
  j["simplex"] = {{"initial_step", c.options.initial_step},
                  {"max_iterations", c.options.max_iterations},
                  {"rel_tolerance", c.options.rel_tolerance},
                  {"restarts", c.options.restarts},
                  {"bootstrap_restarts", c.bootstrap_restarts},
                  {"init", c.init}};
  j["interval"] = {{"alpha", c.alpha},
                   {"estimator", to_string(c.estimator)},
                   {"predictor", to_string(c.predictor)},
                   {"at", c.at},
                   {"last_window", c.last_window},
                   {"fit_document", c.fit_document}};
  j["simulation"] = {{"model", to_string(c.model)},      {"n", c.n},
                     {"replications", c.replications},   {"multipliers", c.multipliers},
                     {"mc_size", c.mc_size},             {"emit_data", c.emit_data}};
  j["seed"] = c.seed;
  return j;
}

inline RunConfig config_from_json(const json& j)
{
  try {
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    const json& data = j.at("data");
    c.data_path = data.at("path").get<std::string>();
    c.x_columns = data.at("x_columns").get<std::vector<std::string>>();
    c.y_column = data.at("y_column").get<std::string>();
    const json& series = j.at("series");
    c.series_path = series.at("path").get<std::string>();
    c.series_column = series.at("column").get<std::string>();
    c.lags = series.at("lags").get<std::size_t>();
    c.train_prefix = series.at("train_prefix").get<std::size_t>();
    c.validate_suffix = series.at("validate_suffix").get<std::size_t>();
    c.standardize = j.at("standardize").get<bool>();
    const json& sp = j.at("spheres");
    const std::string mode = sp.at("mode").get<std::string>();
    if (mode != "grid" && mode != "data") {
      throw ValidationError("sphere mode must be grid or data");
    }
    c.spheres.mode = mode == "grid" ? SphereConfig::Mode::grid : SphereConfig::Mode::data;
    c.spheres.low = sp.at("low").get<double>();
    c.spheres.high = sp.at("high").get<double>();
    c.spheres.points = sp.at("points").get<std::size_t>();
    c.spheres.radius = sp.at("radius").get<double>();
    c.kernel = j.at("kernel").get<std::string>();
    const json& bw = j.at("bandwidth");
    c.h = detail::parse_bandwidth(bw.at("h"));
    c.H = detail::parse_bandwidth(bw.at("H"));
    c.grid_start = bw.at("grid_start").get<double>();
    c.grid_ratio = bw.at("grid_ratio").get<double>();
    c.grid_size = bw.at("grid_size").get<std::size_t>();
    c.h_replicates = bw.at("h_replicates").get<std::size_t>();
    c.H_replicates = bw.at("H_replicates").get<std::size_t>();
    const json& sx = j.at("simplex");
    c.options.initial_step = sx.at("initial_step").get<double>();
    c.options.max_iterations = sx.at("max_iterations").get<std::size_t>();
    c.options.rel_tolerance = sx.at("rel_tolerance").get<double>();
    c.options.restarts = sx.at("restarts").get<std::size_t>();
    c.bootstrap_restarts = sx.at("bootstrap_restarts").get<std::size_t>();
    c.init = sx.at("init").get<std::string>();
    const json& iv = j.at("interval");
    c.alpha = iv.at("alpha").get<double>();
    c.estimator = final_estimator_from_name(iv.at("estimator").get<std::string>());
    c.predictor = predictor_from_name(iv.at("predictor").get<std::string>());
    c.at = iv.at("at").get<std::vector<std::vector<double>>>();
    c.last_window = iv.at("last_window").get<bool>();
    c.fit_document = iv.at("fit_document").get<std::string>();
    const json& sim = j.at("simulation");
    c.model = model_from_name(sim.at("model").get<std::string>());
    c.n = sim.at("n").get<std::size_t>();
    c.replications = sim.at("replications").get<std::size_t>();
    c.multipliers = sim.at("multipliers").get<std::vector<double>>();
    c.mc_size = sim.at("mc_size").get<std::size_t>();
    c.emit_data = sim.at("emit_data").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid config document: ") + e.what());
  }
}

inline json read_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open '" + path + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

//! The config embedded in a document written by one of the commands.
inline RunConfig config_from_document(const json& doc)
{
  if (!doc.contains("config")) {
    throw ValidationError("document has no embedded config");
  }
  return config_from_json(doc.at("config"));
}

inline json direction_json(const Direction& d)
{
  return json(d.vector());
}

inline json selection_json(const BandwidthSelection& s)
{
  json scores = json::array();
  for (double v : s.scores) {
    scores.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  }
  return {{"value", s.value}, {"index", s.index}, {"grid", s.grid}, {"scores", scores},
          {"failures", s.failures}};
}

//! The sample a command works on, after the time-series split and scaling.
struct PreparedData
{
  Dataset train;
  std::optional<ScalingParams> scaling;
  std::vector<std::size_t> train_targets;  // 1-based row (or series position) of each training row
  std::optional<Dataset> validation;       // held-out rows, already scaled
  std::vector<std::size_t> validation_targets;
  std::vector<double> last_window;         // scaled covariates of the next, unobserved target
  std::vector<std::string> x_names;
};

inline std::vector<double> parse_vector(const std::string& text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!csv_detail::parse_double(csv_detail::trim(item), v)) {
      throw ValidationError("'" + text + "' is not a comma-separated list of finite numbers");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw ValidationError("empty vector '" + text + "'");
  }
  return out;
}

struct RawSample
{
  Dataset rows;
  std::size_t train_rows = 0;
  std::size_t first_target = 1;
  std::vector<double> last_window;
  std::vector<std::string> x_names;
};

inline RawSample load_sample(const RunConfig& c)
{
  if (c.time_series() == !c.data_path.empty()) {
    throw ValidationError("exactly one of --data and --series is required");
  }
  if (!c.time_series()) {
    if (c.x_columns.empty()) {
      throw ValidationError("--x-columns is required with --data");
    }
    Dataset rows = load_csv(c.data_path, c.x_columns, c.y_column);
    if (c.validate_suffix >= rows.size()) {
      throw ValidationError("validate-suffix leaves no rows for fitting");
    }
    const std::size_t train_rows = rows.size() - c.validate_suffix;
    return {std::move(rows), train_rows, 1, {}, c.x_columns};
  }
  const std::vector<double> series = load_series_csv(c.series_path, c.series_column);
  Dataset rows = embed_time_series(series, c.lags);
  if (c.validate_suffix >= rows.size()) {
    throw ValidationError("validate-suffix leaves no rows for fitting");
  }
  // row r holds target t = lags + 1 + r; fitting uses targets t <= train_prefix
  std::size_t train_rows = rows.size() - c.validate_suffix;
  if (c.train_prefix > 0) {
    if (c.train_prefix <= c.lags || c.train_prefix > series.size()) {
      throw ValidationError("train-prefix must exceed the lag count and not exceed the series length");
    }
    train_rows = std::min(train_rows, c.train_prefix - c.lags);
  }
  std::vector<double> window;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < c.lags; ++j) {
    window.push_back(series[series.size() - 1 - j]);
    names.push_back("lag" + std::to_string(j + 1));
  }
  return {std::move(rows), train_rows, c.lags + 1, std::move(window), std::move(names)};
}

inline PreparedData prepare_data(const RunConfig& c)
{
  RawSample raw = load_sample(c);
  if (raw.train_rows < 3) {
    throw ValidationError("at least 3 rows are needed for fitting");
  }
  const std::size_t n = raw.rows.size();
  PreparedData out{raw.rows.slice(0, raw.train_rows), std::nullopt, {}, std::nullopt, {},
                   std::move(raw.last_window), std::move(raw.x_names)};
  if (c.validate_suffix > 0) {
    out.validation = raw.rows.slice(n - c.validate_suffix, c.validate_suffix);
  }
  for (std::size_t r = 0; r < raw.train_rows; ++r) {
    out.train_targets.push_back(raw.first_target + r);
  }
  for (std::size_t r = n - c.validate_suffix; r < n; ++r) {
    out.validation_targets.push_back(raw.first_target + r);
  }
  if (c.standardize) {
    auto [scaled, params] = standardize(out.train);
    out.train = std::move(scaled);
    if (out.validation) {
      out.validation = params.apply(*out.validation);
    }
    if (!out.last_window.empty()) {
      out.last_window = params.apply(out.last_window);
    }
    out.scaling = std::move(params);
  }
  return out;
}

inline std::optional<Direction> initial_direction(const RunConfig& c, std::size_t d)
{
  if (c.init == "ols") {
    return std::nullopt;
  }
  if (c.init == "random") {
    Rng rng(derive_seed(c.seed, Stream::restarts, {0xffffffffULL}));
    std::vector<double> v(d);
    for (double& x : v) {
      x = rng.normal();
    }
    return Direction::canonicalize(v);
  }
  const std::vector<double> v = parse_vector(c.init);
  if (v.size() != d) {
    throw ValidationError("--init vector has " + std::to_string(v.size()) + " components, data has " +
                          std::to_string(d) + " covariates");
  }
  return Direction::canonicalize(v);
}

inline void check_kernel(const RunConfig& c)
{
  (void)kernel_from_name(c.kernel);
}

inline json document_header(const RunConfig& c)
{
  json doc;
  doc["format"] = kDocumentFormat;
  doc["command"] = c.command;
  doc["seed"] = c.seed;
  doc["rng"] = kRngName;
  doc["config"] = to_json(c);
  return doc;
}

inline json scaling_json(const std::optional<ScalingParams>& s)
{
  if (!s) {
    return nullptr;
  }
  return {{"mean", s->mean}, {"sd", s->sd}};
}

struct ModelFit
{
  Direction theta;
  double h = 0.0;
  double H = 0.0;
  std::optional<BandwidthSelection> h_selection;
  std::optional<BandwidthSelection> H_selection;
  ThetaFit fit;
};

//! h (selected or fixed), theta at h, then H along theta.
inline ModelFit fit_model(const RunConfig& c, const Dataset& data)
{
  check_kernel(c);
  c.options.validate();
  const SphereSet spheres = c.spheres.build(data);
  ModelFit m;
  if (c.h) {
    if (!(*c.h > 0.0)) {
      throw ValidationError("h must be positive");
    }
    m.h = *c.h;
  } else {
    m.h_selection = select_h(data, spheres, c.grid(), c.h_replicates, c.bootstrap_options(), c.seed);
    m.h = m.h_selection->value;
  }
  m.fit = fit_theta(data, spheres, m.h, initial_direction(c, data.dim()), c.options, c.seed);
  m.theta = m.fit.theta;
  if (c.H) {
    if (!(*c.H > 0.0)) {
      throw ValidationError("H must be positive");
    }
    m.H = *c.H;
  } else {
    m.H_selection = select_H(data, m.theta, c.grid(), c.H_replicates, c.seed);
    m.H = m.H_selection->value;
  }
  return m;
}

inline json model_json(const ModelFit& m)
{
  json j;
  j["theta"] = direction_json(m.theta);
  j["h"] = m.h;
  j["H"] = m.H;
  j["criterion"] = m.fit.criterion;
  j["degenerate_terms"] = m.fit.degenerate_terms;
  j["iterations"] = m.fit.iterations;
  j["evaluations"] = m.fit.evaluations;
  j["converged"] = m.fit.converged;
  j["simplex_runs"] = m.fit.runs;
  j["winning_run"] = m.fit.winning_run;
  json trace = json::array();
  for (const auto& t : m.fit.trace) {
    trace.push_back({t.iteration, t.best});
  }
  j["trace"] = trace;
  j["h_selection"] = m.h_selection ? selection_json(*m.h_selection) : json(nullptr);
  j["H_selection"] = m.H_selection ? selection_json(*m.H_selection) : json(nullptr);
  return j;
}

inline json cmd_fit(const RunConfig& c)
{
  const PreparedData prep = prepare_data(c);
  const ModelFit m = fit_model(c, prep.train);
  json doc = document_header(c);
  doc["n"] = prep.train.size();
  doc["d"] = prep.train.dim();
  doc["x_names"] = prep.x_names;
  doc["scaling"] = scaling_json(prep.scaling);
  doc["fit"] = model_json(m);
  return doc;
}

inline json cmd_select_bandwidth(const RunConfig& c)
{
  RunConfig auto_cfg = c;
  auto_cfg.h.reset();
  auto_cfg.H.reset();
  const PreparedData prep = prepare_data(auto_cfg);
  const ModelFit m = fit_model(auto_cfg, prep.train);
  json doc = document_header(c);
  doc["n"] = prep.train.size();
  doc["h"] = m.h;
  doc["H"] = m.H;
  doc["h_below_H"] = m.h < m.H;
  doc["theta"] = direction_json(m.theta);
  doc["h_selection"] = selection_json(*m.h_selection);
  doc["H_selection"] = selection_json(*m.H_selection);
  return doc;
}

struct IntervalPoint
{
  std::optional<std::size_t> target;
  std::vector<double> x;  // covariates on the fitting scale
  std::optional<double> truth;
};

inline json cmd_predict_interval(const RunConfig& c)
{
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0, 1)");
  }
  const PreparedData prep = prepare_data(c);
  const Dataset& train = prep.train;
  const std::size_t d = train.dim();

  std::vector<IntervalPoint> points;
  if (prep.validation) {
    for (std::size_t r = 0; r < prep.validation->size(); ++r) {
      const auto row = prep.validation->row(r);
      points.push_back({prep.validation_targets[r], std::vector<double>(row.begin(), row.end()),
                        prep.validation->y(r)});
    }
  }
  for (const auto& x : c.at) {
    if (x.size() != d) {
      throw ValidationError("--at point has " + std::to_string(x.size()) + " components, data has " +
                            std::to_string(d) + " covariates");
    }
    points.push_back({std::nullopt, prep.scaling ? prep.scaling->apply(x) : x, std::nullopt});
  }
  if (c.last_window) {
    if (!c.time_series()) {
      throw ValidationError("--last-window requires --series");
    }
    points.push_back({std::nullopt, prep.last_window, std::nullopt});
  }

  // direction and final bandwidth
  std::optional<ModelFit> m;
  Direction theta;
  double H = 0.0;
  if (!c.fit_document.empty()) {
    const json fit_doc = read_json_file(c.fit_document);
    try {
      theta = Direction::canonicalize(fit_doc.at("fit").at("theta").get<std::vector<double>>());
      H = c.H ? *c.H : fit_doc.at("fit").at("H").get<double>();
    } catch (const json::exception& e) {
      throw ValidationError("'" + c.fit_document + "' is not a fit document: " + e.what());
    }
    if (theta.dim() != d) {
      throw ValidationError("fit document direction does not match the data dimension");
    }
  } else if (c.predictor == Predictor::lag1) {
    std::vector<double> e1(d, 0.0);
    e1[0] = 1.0;
    theta = Direction::canonicalize(e1);
    H = c.H ? *c.H : select_H(train, theta, c.grid(), c.H_replicates, c.seed).value;
  } else {
    m = fit_model(c, train);
    theta = m->theta;
    H = m->H;
  }
  if (c.predictor == Predictor::lag1 && !c.fit_document.empty()) {
    std::vector<double> e1(d, 0.0);
    e1[0] = 1.0;
    theta = Direction::canonicalize(e1);
  }

  const std::vector<double> index = train.project(theta.components());
  json intervals = json::array();
  double total_length = 0.0;
  std::size_t covered = 0, with_truth = 0;
  for (const auto& pt : points) {
    PredictionInterval pi;
    if (c.predictor == Predictor::lag12) {
      if (c.estimator != FinalEstimator::anw) {
        throw ValidationError("the lag12 predictor supports only the anw estimator");
      }
      pi = interval_from_cdf(anw_distribution_multivariate(train, pt.x, H), c.alpha,
                             dot(theta.components(), pt.x));
    } else {
      const double z = dot(theta.components(), pt.x);
      pi = interval_from_cdf(conditional_distribution(c.estimator, index, train.responses(), H, z),
                             c.alpha, z);
    }
    json item;
    item["target_index"] = pt.target ? json(*pt.target) : json(nullptr);
    item["x"] = pt.x;
    item["index_value"] = pi.index_value;
    item["lower"] = pi.lower;
    item["upper"] = pi.upper;
    item["length"] = pi.length();
    if (pt.truth) {
      item["truth"] = *pt.truth;
      item["covered"] = pi.covers(*pt.truth);
      ++with_truth;
      covered += pi.covers(*pt.truth) ? 1 : 0;
    } else {
      item["truth"] = nullptr;
      item["covered"] = nullptr;
    }
    total_length += pi.length();
    intervals.push_back(std::move(item));
  }

  json doc = document_header(c);
  doc["n_train"] = train.size();
  doc["train_targets"] = prep.train_targets.empty()
                           ? json::array()
                           : json::array({prep.train_targets.front(), prep.train_targets.back()});
  doc["scaling"] = scaling_json(prep.scaling);
  doc["predictor"] = to_string(c.predictor);
  doc["estimator"] = to_string(c.estimator);
  doc["alpha"] = c.alpha;
  doc["theta"] = direction_json(theta);
  doc["H"] = H;
  doc["fit"] = m ? model_json(*m) : json(nullptr);
  doc["intervals"] = intervals;
  doc["average_length"] = points.empty() ? json(nullptr) : json(total_length / static_cast<double>(points.size()));
  doc["covered"] = covered;
  doc["validated"] = with_truth;
  doc["all_covered"] = covered == with_truth;
  return doc;
}

inline StudyConfig study_config(const RunConfig& c)
{
  StudyConfig s;
  s.model = c.model;
  s.n = c.n;
  s.replications = c.replications;
  s.spheres = c.spheres;
  if (c.h) {
    s.bandwidth.mode = BandwidthPolicy::Mode::fixed;
    s.bandwidth.fixed_h = *c.h;
  }
  if (c.H) {
    s.bandwidth.fixed_H = *c.H;
  }
  s.bandwidth.multipliers = c.multipliers;
  s.grid_start = c.grid_start;
  s.grid_ratio = c.grid_ratio;
  s.grid_size = c.grid_size;
  s.h_replicates = c.h_replicates;
  s.H_replicates = c.H_replicates;
  s.options = c.options;
  s.bootstrap_options = c.bootstrap_options();
  s.mc_size = c.mc_size;
  s.estimator = c.estimator;
  s.seed = c.seed;
  return s;
}

inline json box_json(const BoxStats& b)
{
  return {{"count", b.count}, {"min", b.min}, {"q1", b.q1}, {"median", b.median},
          {"q3", b.q3}, {"max", b.max}};
}

inline json study_json(const StudyReport& report)
{
  json records = json::array();
  for (const auto& r : report.records) {
    json rec;
    rec["replication"] = r.replication;
    rec["ok"] = r.ok;
    if (!r.ok) {
      rec["error"] = r.error;
      records.push_back(std::move(rec));
      continue;
    }
    rec["h"] = r.h_selected;
    rec["H"] = r.H;
    json fits = json::array();
    for (const auto& f : r.fits) {
      fits.push_back({{"multiplier", f.multiplier},
                      {"h", f.h},
                      {"theta_hat", direction_json(f.theta_hat)},
                      {"inner_product", f.inner_product},
                      {"criterion", f.criterion},
                      {"converged", f.converged}});
    }
    rec["fits"] = fits;
    rec["error_estimated_theta"] = r.error_estimated;
    rec["error_true_theta"] = r.error_true;
    records.push_back(std::move(rec));
  }
  json summary;
  json inner = json::object();
  for (double m : report.config.bandwidth.multipliers) {
    std::ostringstream key;
    key << m;
    inner[key.str()] = box_json(box_stats(report.inner_products(m)));
  }
  summary["inner_product"] = inner;
  summary["h"] = box_json(box_stats(report.collect([](const StudyRecord& r) { return r.h_selected; })));
  summary["H"] = box_json(box_stats(report.collect([](const StudyRecord& r) { return r.H; })));
  summary["error_estimated_theta"] =
    box_json(box_stats(report.collect([](const StudyRecord& r) { return r.error_estimated; })));
  summary["error_true_theta"] =
    box_json(box_stats(report.collect([](const StudyRecord& r) { return r.error_true; })));
  return {{"model", to_string(report.config.model)},
          {"theta_true", direction_json(report.theta_true)},
          {"n", report.config.n},
          {"replications", report.config.replications},
          {"failures", report.failures},
          {"records", records},
          {"summary", summary}};
}

//! With emit_data set, writes replication 0's sample as CSV instead of
//! running the study.
inline json cmd_simulate(const RunConfig& c)
{
  check_kernel(c);
  const StudyConfig sc = study_config(c);
  json doc = document_header(c);
  if (!c.emit_data.empty()) {
    if (c.n < 1) {
      throw ValidationError("n must be at least 1");
    }
    const std::uint64_t rep_seed = derive_seed(c.seed, {0});
    Rng rng(derive_seed(rep_seed, Stream::data));
    const GeneratedData gen = generate(c.model, c.n, rng);
    std::ofstream out(c.emit_data);
    if (!out) {
      throw ValidationError("cannot write '" + c.emit_data + "'");
    }
    out << to_csv(gen.data, {"x1", "x2", "x3", "x4"}, "y");
    doc["emitted"] = {{"path", c.emit_data}, {"n", c.n}, {"theta_true", direction_json(gen.theta)}};
    return doc;
  }
  doc["study"] = study_json(run_study(sc));
  return doc;
}

inline json run_command(const RunConfig& c)
{
  if (c.command == "fit") {
    return cmd_fit(c);
  }
  if (c.command == "predict-interval") {
    return cmd_predict_interval(c);
  }
  if (c.command == "select-bandwidth") {
    return cmd_select_bandwidth(c);
  }
  if (c.command == "simulate") {
    return cmd_simulate(c);
  }
  throw ValidationError("unknown command '" + c.command + "'");
}

} // namespace sicdf
