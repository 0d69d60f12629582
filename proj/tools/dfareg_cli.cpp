// dfareg: scale-dependent regression via detrended fluctuation analysis.
//
//   dfareg regress  --input data.csv --x temp --y humidity [--scales linear:10:auto]
//   dfareg simulate --d 0.4 --length 1000 --seed 7 [--pair --beta 1 --error arfima --du 0.3]
//   dfareg mc       --config mc.json [--workers 4] [--csv report.csv] [--json report.json]

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dfareg/dfareg.hpp"

namespace {

using dfareg::Error;
using dfareg::ErrorCode;
using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, "config '" + path + "': " + e.what());
  }
}

// All outputs are collected first and written once computation succeeded.
struct PendingWrites {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string path, std::string content) {
    files.emplace_back(std::move(path), std::move(content));
  }

  void flush() const {
    for (const auto& [path, content] : files) {
      if (path.empty() || path == "-") {
        std::cout << content;
        continue;
      }
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
      out << content;
      if (!out) throw Error(ErrorCode::io, "failed writing '" + path + "'");
    }
  }
};

std::string series_csv(const std::vector<const dfareg::TimeSeries*>& cols,
                       const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t c = 0; c < names.size(); ++c) out += (c ? "," : "") + names[c];
  out += '\n';
  for (std::size_t t = 0; t < cols.front()->size(); ++t) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ',';
      out += dfareg::format_real((*cols[c])[t]);
    }
    out += '\n';
  }
  return out;
}

struct RegressOptions {
  std::string config;
  std::string input;
  std::string x_column = "0";
  std::string y_column = "1";
  std::string header = "auto";
  bool log_x = false;
  bool log_y = false;
  std::string scales = "auto";
  int order = 1;
  std::string mode = "sliding";
  double level = 0.95;
  std::string format = "csv";
  std::string output = "-";
  std::string plot_data;
};

void apply_regress_config(RegressOptions& o, const CLI::App& cmd) {
  if (o.config.empty()) return;
  const json j = read_json_file(o.config);
  auto take = [&](const char* key, const char* flag, auto& field) {
    if (j.contains(key) && cmd.count(flag) == 0) {
      try {
        field = j.at(key).get<std::decay_t<decltype(field)>>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, std::string("field '") + key + "': " + e.what());
      }
    }
  };
  take("input", "--input", o.input);
  take("header", "--header", o.header);
  take("log_x", "--log-x", o.log_x);
  take("log_y", "--log-y", o.log_y);
  take("poly_order", "--order", o.order);
  take("mode", "--mode", o.mode);
  take("confidence_level", "--level", o.level);
  take("format", "--format", o.format);
  take("output", "--output", o.output);
  take("plot_data", "--plot-data", o.plot_data);
  take("scales", "--scales", o.scales);
  for (auto [key, flag, field] : {std::tuple{"x_column", "--x", &o.x_column},
                                  std::tuple{"y_column", "--y", &o.y_column}}) {
    if (j.contains(key) && cmd.count(flag) == 0) {
      const json& v = j.at(key);
      *field = v.is_number_unsigned() ? std::to_string(v.get<std::size_t>()) : v.get<std::string>();
    }
  }
}

void run_regress(RegressOptions o, const CLI::App& cmd) {
  apply_regress_config(o, cmd);
  if (o.input.empty()) throw Error(ErrorCode::invalid_config, "no input file given");
  if (o.format != "csv" && o.format != "json") {
    throw Error(ErrorCode::invalid_config, "format must be csv or json");
  }

  dfareg::LoadOptions load;
  load.x_column = dfareg::parse_column_ref(o.x_column);
  load.y_column = dfareg::parse_column_ref(o.y_column);
  load.log_x = o.log_x;
  load.log_y = o.log_y;
  if (o.header == "yes") {
    load.header = dfareg::HeaderMode::present;
  } else if (o.header == "no") {
    load.header = dfareg::HeaderMode::absent;
  } else if (o.header != "auto") {
    throw Error(ErrorCode::invalid_config, "header must be auto, yes or no");
  }

  dfareg::DetrendConfig cfg;
  cfg.poly_order = o.order;
  cfg.window_mode = dfareg::parse_window_mode(o.mode);
  cfg.validate();

  const dfareg::LoadedPair data = dfareg::load_csv(o.input, load);
  const dfareg::ScaleGrid grid = dfareg::ScaleSpec::parse(o.scales).resolve(data.x.size(), cfg);
  const dfareg::ScaleRegressionCurve curve =
      dfareg::regression_curve(data.x, data.y, grid, cfg, o.level);

  PendingWrites writes;
  if (o.format == "csv") {
    writes.add(o.output, dfareg::curve_csv(curve));
  } else {
    json meta = {{"command", "regress"},
                 {"input", o.input},
                 {"x_column", o.x_column},
                 {"y_column", o.y_column},
                 {"log_x", o.log_x},
                 {"log_y", o.log_y},
                 {"scales", o.scales}};
    writes.add(o.output, dfareg::curve_json(curve, std::move(meta)).dump(2) + "\n");
  }
  std::string plot_path = o.plot_data;
  if (plot_path.empty() && !o.output.empty() && o.output != "-") plot_path = o.output + ".plot.csv";
  if (!plot_path.empty()) writes.add(plot_path, dfareg::plot_csv(curve));
  writes.flush();
}

struct SimulateOptions {
  std::string config;
  double d = 0.0;
  std::size_t length = 1000;
  std::uint64_t seed = 0;
  double sd = 1.0;
  std::size_t burn_in = 0;
  bool literal_sign = false;
  bool pair = false;
  double alpha = 1.0;
  double beta = 1.0;
  std::string error = "gaussian";
  double du = 0.0;
  std::string output = "-";
};

void run_simulate(const SimulateOptions& o) {
  dfareg::RegressionSimSpec spec;
  bool pair = o.pair;
  if (!o.config.empty()) {
    const json j = read_json_file(o.config);
    if (j.contains("x")) {
      spec = dfareg::regression_sim_spec_from_json(j);
      pair = true;
    } else {
      spec.x_spec = dfareg::arfima_spec_from_json(j);
    }
  } else {
    spec.x_spec.d = o.d;
    spec.x_spec.length = o.length;
    spec.x_spec.innovation_sd = o.sd;
    spec.x_spec.burn_in = o.burn_in;
    spec.x_spec.sign = o.literal_sign ? dfareg::WeightSign::literal : dfareg::WeightSign::persistent;
    spec.x_spec.seed = dfareg::derive_seed(o.seed, {0});
    spec.seed = o.seed;
    spec.alpha = o.alpha;
    spec.beta = o.beta;
    if (o.error == "arfima") {
      spec.error_kind = dfareg::ErrorKind::arfima;
    } else if (o.error != "gaussian") {
      throw Error(ErrorCode::invalid_config, "error must be gaussian or arfima");
    }
    spec.error_d = o.du;
  }

  PendingWrites writes;
  if (pair) {
    const dfareg::RegressionPair p = dfareg::simulate_regression_pair(spec);
    writes.add(o.output, series_csv({&p.x, &p.y}, {"x", "y"}));
  } else {
    const dfareg::TimeSeries x = dfareg::generate_arfima(spec.x_spec);
    writes.add(o.output, series_csv({&x}, {"x"}));
  }
  writes.flush();
}

struct McOptions {
  std::string config;
  std::string design;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> length;
  std::optional<std::uint64_t> seed;
  bool paper = false;
  unsigned workers = 1;
  std::string csv;
  std::string json_path;
};

void run_mc(const McOptions& o) {
  json j = o.config.empty() ? json::object() : read_json_file(o.config);
  if (!o.design.empty()) j["design"] = o.design;
  if (o.paper && !j.contains("replications")) j["replications"] = 1000;
  if (o.replications) j["replications"] = *o.replications;
  if (o.length) j["length"] = *o.length;
  if (o.seed) j["seed"] = *o.seed;
  const dfareg::MonteCarloConfig cfg = dfareg::montecarlo_config_from_json(j);
  const dfareg::MonteCarloReport report = dfareg::run_design(cfg, o.workers);

  PendingWrites writes;
  if (!o.csv.empty() || o.json_path.empty()) writes.add(o.csv, dfareg::report_csv(report));
  if (!o.json_path.empty()) {
    json out = dfareg::report_json(report);
    out["meta"]["command"] = "mc";
    writes.add(o.json_path, out.dump(2) + "\n");
  }
  writes.flush();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-dependent regression with detrended fluctuation analysis"};
  app.set_version_flag("--version", std::string(dfareg::kVersion));
  app.require_subcommand(1);

  RegressOptions reg;
  auto* regress = app.add_subcommand("regress", "Estimate beta(s), se, confidence band and R^2(s)");
  regress->add_option("--config", reg.config, "JSON run configuration; flags override it");
  regress->add_option("-i,--input", reg.input, "CSV file");
  regress->add_option("--x", reg.x_column, "Regressor column (name or 0-based index)");
  regress->add_option("--y", reg.y_column, "Response column (name or 0-based index)");
  regress->add_option("--header", reg.header, "auto | yes | no");
  regress->add_flag("--log-x", reg.log_x, "Take natural log of x");
  regress->add_flag("--log-y", reg.log_y, "Take natural log of y");
  regress->add_option("--scales", reg.scales,
                      "auto | linear:MIN:MAX[:STEP] | log:MIN:MAX:COUNT | S1,S2,...");
  regress->add_option("--order", reg.order, "Detrending polynomial order (0-3)");
  regress->add_option("--mode", reg.mode, "sliding | disjoint");
  regress->add_option("--level", reg.level, "Confidence level of the band");
  regress->add_option("--format", reg.format, "csv | json");
  regress->add_option("-o,--output", reg.output, "Output path, - for stdout");
  regress->add_option("--plot-data", reg.plot_data,
                      "Plot companion path (default OUTPUT.plot.csv when writing to a file)");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate ARFIMA series or regression pairs");
  simulate->add_option("--config", sim.config, "JSON ArfimaSpec or RegressionSimSpec");
  simulate->add_option("--d", sim.d, "Fractional integration parameter in [0, 1]");
  simulate->add_option("-n,--length", sim.length, "Series length");
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--sd", sim.sd, "Innovation standard deviation");
  simulate->add_option("--burn-in", sim.burn_in, "Discarded leading observations");
  simulate->add_flag("--literal-sign", sim.literal_sign, "Use sign-flipped AR weights");
  simulate->add_flag("--pair", sim.pair, "Emit x and y = alpha + beta x + u");
  simulate->add_option("--alpha", sim.alpha, "Intercept");
  simulate->add_option("--beta", sim.beta, "Slope");
  simulate->add_option("--error", sim.error, "gaussian | arfima");
  simulate->add_option("--du", sim.du, "Error-term d when --error arfima");
  simulate->add_option("-o,--output", sim.output, "Output path, - for stdout");

  McOptions mc;
  auto* mcc = app.add_subcommand("mc", "Run a Monte Carlo design");
  mcc->add_option("--config", mc.config, "JSON MonteCarloConfig");
  mcc->add_option("--design", mc.design, "sim_I | sim_II");
  mcc->add_option("-R,--replications", mc.replications, "Replications per sweep point");
  mcc->add_option("-n,--length", mc.length, "Series length");
  mcc->add_option("--seed", mc.seed, "Master seed");
  mcc->add_flag("--paper", mc.paper, "Use 1000 replications unless the config sets them");
  mcc->add_option("-j,--workers", mc.workers, "Worker threads")
      ->default_val(std::max(1u, std::thread::hardware_concurrency()));
  mcc->add_option("--csv", mc.csv, "CSV report path (stdout if no output is given)");
  mcc->add_option("--json", mc.json_path, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*regress) run_regress(reg, *regress);
    if (*simulate) run_simulate(sim);
    if (*mcc) run_mc(mc);
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"code", std::string(dfareg::to_string(e.code()))}, {"message", e.what()}}}}.dump()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }
  return 0;
}
