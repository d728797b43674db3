#include "mfcal/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfcal/config.hpp"
#include "mfcal/errors.hpp"
#include "mfcal/io.hpp"
#include "mfcal/pipeline.hpp"
#include "mfcal/synthetic.hpp"

namespace mfcal {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_vec(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json config_json(const RunConfig& cfg) {
  json j;
  j["low"] = cfg.low_path;
  j["high"] = cfg.high_path;
  j["inputs"] = cfg.inputs;
  j["outputs"] = cfg.outputs;
  json box = json::object();
  for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    box[cfg.inputs[i]] = {{"lo", cfg.box.lower[k]}, {"hi", cfg.box.upper[k]}};
  }
  j["box"] = box;
  switch (cfg.objective.kind()) {
    case ObjectiveSpec::Kind::Identity:
      j["objective"] = {{"kind", "identity"}};
      break;
    case ObjectiveSpec::Kind::SumOfSquares:
      j["objective"] = {{"kind", "sum_of_squares"}};
      break;
    case ObjectiveSpec::Kind::WeightedSumOfSquares:
      j["objective"] = {{"kind", "weighted"}, {"weights", vec_json(cfg.objective.weights())}};
      break;
  }
  switch (cfg.prior.kind()) {
    case CalibrationPrior::Kind::Flat:
      j["prior"] = {{"kind", "flat"}};
      break;
    case CalibrationPrior::Kind::Gaussian:
      j["prior"] = {{"kind", "gaussian"}, {"mean", cfg.prior.a()}, {"sd", cfg.prior.b()}};
      break;
    case CalibrationPrior::Kind::Uniform:
      j["prior"] = {{"kind", "uniform"}, {"lo", cfg.prior.a()}, {"hi", cfg.prior.b()}};
      break;
  }
  j["u_search"] = {{"lo", cfg.search.lo},
                   {"hi", cfg.search.hi},
                   {"grid_points", cfg.search.grid_points},
                   {"tolerance", cfg.search.tolerance}};
  if (cfg.low_noise.estimate)
    j["low_noise"] = "estimate";
  else
    j["low_noise"] = cfg.low_noise.variance;
  j["N_u"] = cfg.N_u;
  j["n_rep"] = cfg.n_rep;
  j["N"] = cfg.N;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["collapse_variance"] = cfg.collapse_variance;
  j["histogram_bins"] = cfg.histogram_bins;
  return j;
}

json decision_json(const DecisionConfig& cfg) {
  return {{"N_u", cfg.N_u},
          {"n_rep", cfg.n_rep},
          {"N", cfg.N},
          {"seed", cfg.seed.root()},
          {"collapse_variance", cfg.collapse_variance},
          {"box", {{"lower", vec_json(cfg.box.lower)}, {"upper", vec_json(cfg.box.upper)}}}};
}

json kernel_json(const KernelParams& p) {
  return {{"variance", p.variance}, {"length_scales", vec_json(p.length_scales)}};
}

json calibration_json(const std::string& name, const OutputCalibration& c) {
  const CalibrationResult& r = c.result;
  json j;
  j["output"] = name;
  j["u_hat"] = r.u_hat;
  j["interval"] = {r.interval.first, r.interval.second};
  j["loo_samples"] = r.loo_samples;
  j["failed_folds"] = json::array();
  for (auto f : r.failed_folds) j["failed_folds"].push_back(f);
  j["on_boundary"] = r.full.on_boundary;
  j["log_posterior"] = r.full.log_posterior;
  if (r.discrepancy) {
    j["discrepancy"] = kernel_json(r.discrepancy->params());
    j["noise_variance"] = r.discrepancy->noise_variance();
    j["noise_sd"] = std::sqrt(r.discrepancy->noise_variance());
  }
  const GpFit& low = c.low_emulator;
  j["low_emulator"] = kernel_json(low.params());
  j["low_emulator"]["mean"] = low.mean().value;
  j["low_emulator"]["noise_variance"] = low.noise_variance();
  return j;
}

json summary_json(const OptimaSummary& s, const std::vector<std::string>& names) {
  json j = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    json q = json::object();
    const char* labels[4] = {"q025", "q25", "q75", "q975"};
    for (int c = 0; c < 4; ++c) q[labels[c]] = s.quantiles(k, c);
    j[names[i]] = {{"median", s.median[k]},
                   {"mean", s.mean[k]},
                   {"sd", s.sd[k]},
                   {"quantiles", q},
                   {"iqr", s.quantiles(k, 2) - s.quantiles(k, 1)},
                   {"histogram",
                    {{"edges", s.histograms[i].edges}, {"counts", s.histograms[i].counts}}}};
  }
  return j;
}

json strategy_json(const StrategyResult& r, const std::vector<std::string>& names) {
  return {{"n_optima", r.optima.size()},
          {"skipped", r.optima.skipped.size()},
          {"summary", summary_json(r.summary, names)}};
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path.string(), j.dump(2) + "\n"); }

std::string optima_csv(const OptimaCollection& c, const std::vector<std::string>& names) {
  std::ostringstream out;
  for (const auto& n : names) out << n << ',';
  out << "s,r,objective\n";
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    for (Eigen::Index k = 0; k < c.points.cols(); ++k) out << format_double(c.points(i, k)) << ',';
    const auto& [s, r] = c.provenance[static_cast<std::size_t>(i)];
    out << s << ',' << r << ',' << format_double(c.objective[i]) << '\n';
  }
  return out.str();
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_left,bin_right,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << h.counts[b]
        << '\n';
  return out.str();
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
  PipelineOptions opt;
  opt.calibration.prior = cfg.prior;
  opt.calibration.search = cfg.search;
  opt.low_noise = cfg.low_noise;
  opt.seed = Seed(cfg.seed);
  return opt;
}

struct LoadedData {
  Dataset low;
  Dataset high;
};

LoadedData load_data(const RunConfig& cfg) {
  if (cfg.low_path.empty()) throw SchemaError("config: no low-fidelity dataset ('low' or --low)");
  if (cfg.high_path.empty()) throw SchemaError("config: no high-fidelity dataset ('high' or --high)");
  return {load_dataset({cfg.low_path, cfg.inputs, cfg.outputs}),
          load_dataset({cfg.high_path, cfg.inputs, cfg.outputs})};
}

std::vector<OutputCalibration> calibrate_config(const RunConfig& cfg, const LoadedData& data,
                                                std::ostream& out) {
  std::vector<OutputCalibration> cal =
      calibrate_outputs(data.low.X, data.low.Y, data.high.X, data.high.Y, pipeline_options(cfg));
  json report;
  report["config"] = config_json(cfg);
  report["outputs"] = json::array();
  for (std::size_t k = 0; k < cal.size(); ++k) {
    report["outputs"].push_back(calibration_json(cfg.outputs[k], cal[k]));
    const CalibrationResult& r = cal[k].result;
    out << cfg.outputs[k] << ": u_hat = " << r.u_hat << ", 95% interval (" << r.interval.first
        << ", " << r.interval.second << "), " << r.successful_folds() << " folds\n";
  }
  const fs::path path = fs::path(cfg.out_dir) / "calibration.json";
  write_json(path, report);
  out << "wrote " << path.string() << '\n';
  return cal;
}

// Rebuilds the calibrations from a report: emulator hyperparameters are
// reused as stored, on the configured low-fidelity data.
std::vector<OutputCalibration> read_calibration(const std::string& path, const RunConfig& cfg,
                                                const LoadedData& data) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open calibration report '" + path + "'");
  json report;
  try {
    report = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("calibration report '" + path + "': " + e.what());
  }
  std::vector<OutputCalibration> cal;
  try {
    const json& outs = report.at("outputs");
    if (outs.size() != cfg.outputs.size())
      throw SchemaError("calibration report '" + path + "' has " + std::to_string(outs.size()) +
                        " outputs, config has " + std::to_string(cfg.outputs.size()));
    for (std::size_t k = 0; k < outs.size(); ++k) {
      const json& o = outs[k];
      if (o.at("output").get<std::string>() != cfg.outputs[k])
        throw SchemaError("calibration report '" + path + "': output " + std::to_string(k) +
                          " is '" + o.at("output").get<std::string>() + "', config says '" +
                          cfg.outputs[k] + "'");
      const json& e = o.at("low_emulator");
      const auto col = static_cast<Eigen::Index>(k);
      GpFit low(data.low.X, data.low.Y.col(col), MeanFunction::constant(e.at("mean").get<double>()),
                KernelParams(e.at("variance").get<double>(), json_vec(e.at("length_scales"))),
                e.at("noise_variance").get<double>());
      CalibrationResult r;
      r.u_hat = o.at("u_hat").get<double>();
      r.loo_samples = o.at("loo_samples").get<std::vector<double>>();
      r.interval = {o.at("interval").at(0).get<double>(), o.at("interval").at(1).get<double>()};
      cal.push_back(OutputCalibration{std::move(low), std::move(r)});
    }
  } catch (const json::exception& e) {
    throw SchemaError("calibration report '" + path + "': " + e.what());
  }
  return cal;
}

void optimize_config(const RunConfig& cfg, const std::string& calibration_path, std::ostream& out) {
  const LoadedData data = load_data(cfg);
  const std::vector<OutputCalibration> cal = calibration_path.empty()
                                                 ? calibrate_config(cfg, data, out)
                                                 : read_calibration(calibration_path, cfg, data);
  const DecisionConfig decision = cfg.decision();
  const OptimaCollection optima = optimize_inputs(cal, data.high.X, data.high.Y, cfg.objective,
                                                  decision, pipeline_options(cfg));
  const OptimaSummary summary = summarize_optima(optima, cfg.histogram_bins);

  const fs::path dir(cfg.out_dir);
  write_file_atomic((dir / "optima.csv").string(), optima_csv(optima, cfg.inputs));
  for (std::size_t i = 0; i < cfg.inputs.size(); ++i)
    write_file_atomic((dir / ("histogram_" + cfg.inputs[i] + ".csv")).string(),
                      histogram_csv(summary.histograms[i]));
  json report;
  report["config"] = config_json(cfg);
  report["calibration"] = calibration_path.empty() ? "inline" : calibration_path;
  report["n_optima"] = optima.size();
  report["skipped"] = optima.skipped.size();
  report["summary"] = summary_json(summary, cfg.inputs);
  write_json(dir / "summary.json", report);

  out << optima.size() << " optima (" << optima.skipped.size() << " skipped); median";
  for (Eigen::Index k = 0; k < summary.median.size(); ++k) out << ' ' << summary.median[k];
  out << "\nwrote " << (dir / "optima.csv").string() << ", " << (dir / "summary.json").string()
      << '\n';
}

struct BenchmarkArgs {
  std::string scenario;
  int n_datasets = 50;
  std::uint64_t seed = 2025;
  std::optional<int> N_u;
  std::optional<int> n_rep;
  int N = 200;
  std::string out_dir = ".";
};

const std::vector<std::string> kIllustrativeInputs{"x1", "x2"};
const std::vector<std::string> kCureInputs{"T1", "T2", "t1", "t2"};

void benchmark(const BenchmarkArgs& args, std::ostream& out, std::ostream& err) {
  const bool mse = args.scenario == "mse-study";
  DecisionConfig cfg;
  cfg.N_u = args.N_u.value_or(mse ? 20 : 100);
  cfg.n_rep = args.n_rep.value_or(mse ? 20 : 100);
  cfg.N = args.N;
  cfg.seed = Seed(args.seed);
  PipelineOptions opt;
  opt.seed = Seed(args.seed);

  json report;
  report["scenario"] = args.scenario;
  report["seed"] = args.seed;
  fs::path path = fs::path(args.out_dir) / ("benchmark_" + args.scenario + ".json");

  if (args.scenario == "illustrative") {
    const QuadraticScenario sc = QuadraticScenario::illustrative(Seed(args.seed));
    cfg.box = sc.box;
    report["decision"] = decision_json(cfg);
    const ScenarioComparison cmp = compare_scenarios(generate_scenario(sc), cfg, opt);
    report["calibration"] = calibration_json("y", cmp.calibration);
    report["low_only"] = strategy_json(cmp.low_only, kIllustrativeInputs);
    report["high_only"] = strategy_json(cmp.high_only, kIllustrativeInputs);
    report["multi_fidelity"] = strategy_json(cmp.multi_fidelity, kIllustrativeInputs);
    for (const auto& [name, r] : {std::pair{"low-only", &cmp.low_only},
                                  std::pair{"high-only", &cmp.high_only},
                                  std::pair{"multi-fidelity", &cmp.multi_fidelity}})
      out << name << ": median (" << r->summary.median[0] << ", " << r->summary.median[1]
          << "), sd (" << r->summary.sd[0] << ", " << r->summary.sd[1] << ")\n";
  } else if (mse) {
    const ScenarioGenerator gen = illustrative_generator(args.seed);
    cfg.box = gen.box;
    report["decision"] = decision_json(cfg);
    report["n_datasets"] = args.n_datasets;
    const MseStudyResult res = mse_study(gen, args.n_datasets, cfg, opt, [&](int j, const MseStudyResult& r) {
      err << "dataset " << j + 1 << "/" << args.n_datasets << " done (" << r.failures.size()
          << " failed)\n";
    });
    report["optimum"] = vec_json(res.optimum);
    report["datasets"] = res.datasets;
    json failures = json::array();
    for (const auto& [j, what] : res.failures) failures.push_back({{"dataset", j}, {"error", what}});
    report["failures"] = failures;
    const std::pair<const char*, const Eigen::MatrixXd*> medians[3] = {
        {"low_only", &res.low_medians}, {"high_only", &res.high_medians}, {"multi_fidelity", &res.multi_medians}};
    const Eigen::VectorXd* mses[3] = {&res.mse_low, &res.mse_high, &res.mse_multi};
    for (int s = 0; s < 3; ++s) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < medians[s].second->rows(); ++i)
        rows.push_back(vec_json(medians[s].second->row(i).transpose()));
      report[medians[s].first] = {{"mse", vec_json(*mses[s])}, {"medians", rows}};
      out << medians[s].first << ": MSE (" << (*mses[s])[0] << ", " << (*mses[s])[1] << ")\n";
    }
  } else if (args.scenario == "cure-surrogate") {
    const PolynomialScenario sc = PolynomialScenario::cure_surrogate(Seed(args.seed));
    cfg.box = sc.box;
    report["decision"] = decision_json(cfg);
    const ScenarioData data = polynomial_surrogate_scenario(sc);
    const std::vector<OutputCalibration> cal = calibrate_outputs(data.X_L, data.Y_L, data.X_H, data.Y_H, opt);
    const OptimaCollection optima =
        optimize_inputs(cal, data.X_H, data.Y_H, ObjectiveSpec::identity(), cfg, opt);
    const OptimaSummary summary = summarize_optima(optima);
    report["calibration"] = calibration_json("y", cal.front());
    report["multi_fidelity"] = strategy_json(StrategyResult{optima, summary}, kCureInputs);
    out << "u_hat = " << cal.front().result.u_hat << ", interval (" << cal.front().result.interval.first
        << ", " << cal.front().result.interval.second << "); median";
    for (Eigen::Index k = 0; k < summary.median.size(); ++k) out << ' ' << summary.median[k];
    out << '\n';
  } else {
    throw SchemaError("unknown scenario '" + args.scenario +
                      "' (expected illustrative, mse-study or cure-surrogate)");
  }
  write_json(path, report);
  out << "wrote " << path.string() << '\n';
}

void generate(const std::string& scenario, std::uint64_t seed, const std::string& out_dir,
              std::ostream& out) {
  ScenarioData data;
  std::vector<std::string> inputs;
  Box box;
  if (scenario == "illustrative") {
    const QuadraticScenario sc = QuadraticScenario::illustrative(Seed(seed));
    data = generate_scenario(sc);
    inputs = kIllustrativeInputs;
    box = sc.box;
  } else if (scenario == "cure-surrogate") {
    const PolynomialScenario sc = PolynomialScenario::cure_surrogate(Seed(seed));
    data = polynomial_surrogate_scenario(sc);
    inputs = kCureInputs;
    box = sc.box;
  } else {
    throw SchemaError("unknown scenario '" + scenario + "' (expected illustrative or cure-surrogate)");
  }
  const fs::path dir(out_dir);
  write_file_atomic((dir / "low.csv").string(), dataset_csv(data.X_L, data.Y_L, inputs, {"y"}));
  write_file_atomic((dir / "high.csv").string(), dataset_csv(data.X_H, data.Y_H, inputs, {"y"}));

  std::ostringstream ini;
  ini << "low = low.csv\nhigh = high.csv\ninputs = ";
  for (std::size_t i = 0; i < inputs.size(); ++i) ini << (i ? ", " : "") << inputs[i];
  ini << "\noutputs = y\nseed = " << seed << "\nout_dir = .\nN_u = 100\nn_rep = 100\nN = 200\n\n";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    ini << "[box." << inputs[i] << "]\nlo = " << format_double(box.lower[k])
        << "\nhi = " << format_double(box.upper[k]) << "\n\n";
  }
  ini << "[objective]\nkind = identity\n";
  write_file_atomic((dir / "config.ini").string(), ini.str());
  out << "wrote " << (dir / "low.csv").string() << ", " << (dir / "high.csv").string() << ", "
      << (dir / "config.ini").string() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-fidelity calibration and decision analysis"};
  app.require_subcommand(1);

  std::string config_path, low_path, high_path, calibration_path;
  std::optional<std::uint64_t> seed;
  bool collapse = false;

  auto* cal_cmd = app.add_subcommand("calibrate", "Estimate u per output and write calibration.json");
  cal_cmd->add_option("--config", config_path, "Run configuration")->required();
  cal_cmd->add_option("--low", low_path, "Low-fidelity CSV (overrides config)");
  cal_cmd->add_option("--high", high_path, "High-fidelity CSV (overrides config)");
  cal_cmd->add_option("--seed", seed, "Root seed (overrides config)");

  auto* opt_cmd = app.add_subcommand("optimize", "Sample optimal inputs; write optima and summary");
  opt_cmd->add_option("--config", config_path, "Run configuration")->required();
  opt_cmd->add_option("--low", low_path, "Low-fidelity CSV (overrides config)");
  opt_cmd->add_option("--high", high_path, "High-fidelity CSV (overrides config)");
  opt_cmd->add_option("--seed", seed, "Root seed (overrides config)");
  opt_cmd->add_option("--calibration", calibration_path, "Reuse a calibration.json instead of recalibrating");
  opt_cmd->add_flag("--collapse-variance", collapse, "Use predictive means instead of random draws");

  BenchmarkArgs bench;
  int n_u = 0, n_rep = 0;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run a synthetic study end to end");
  bench_cmd->add_option("--scenario", bench.scenario, "illustrative, mse-study or cure-surrogate")->required();
  bench_cmd->add_option("--n-datasets", bench.n_datasets, "Datasets in the MSE study")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "Root seed");
  bench_cmd->add_option("--n-u", n_u, "Posterior draws of u")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--n-rep", n_rep, "Replications per draw")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--n-cand", bench.N, "Candidates per replication")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out-dir", bench.out_dir, "Report directory");

  std::string gen_scenario, gen_dir = ".";
  std::uint64_t gen_seed = 2025;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset pair and config");
  gen_cmd->add_option("--scenario", gen_scenario, "illustrative or cure-surrogate")->required();
  gen_cmd->add_option("--seed", gen_seed, "Root seed");
  gen_cmd->add_option("--out-dir", gen_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*cal_cmd || *opt_cmd) {
      RunConfig cfg = load_config(config_path);
      if (!low_path.empty()) cfg.low_path = low_path;
      if (!high_path.empty()) cfg.high_path = high_path;
      if (seed) cfg.seed = *seed;
      if (collapse) cfg.collapse_variance = true;
      if (*cal_cmd)
        calibrate_config(cfg, load_data(cfg), out);
      else
        optimize_config(cfg, calibration_path, out);
    } else if (*bench_cmd) {
      if (n_u > 0) bench.N_u = n_u;
      if (n_rep > 0) bench.n_rep = n_rep;
      benchmark(bench, out, err);
    } else if (*gen_cmd) {
      generate(gen_scenario, gen_seed, gen_dir, out);
    }
  } catch (const AnalysisError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSkipped;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const FitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace mfcal
