#include "mfcal/pipeline.hpp"

#include <cmath>
#include <map>
#include <memory>

#include "mfcal/errors.hpp"

namespace mfcal {

namespace {

constexpr std::uint64_t kLowStream = 1;
constexpr std::uint64_t kDrawStream = 2;

template <class E>
[[noreturn]] void rethrow_for_output(const E& e, Eigen::Index k) {
  throw E("output " + std::to_string(k) + ": " + e.what());
}

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows, Eigen::Index d) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

Eigen::VectorXd mean_squared_error(const Eigen::MatrixXd& medians, const Eigen::VectorXd& truth) {
  if (medians.rows() == 0) return Eigen::VectorXd::Constant(truth.size(), std::nan(""));
  return (medians.rowwise() - truth.transpose()).array().square().colwise().mean().transpose();
}

}  // namespace

GpFit fit_low_emulator(const Eigen::MatrixXd& x_low, const Eigen::VectorXd& y_low,
                       const NoiseModel& noise, const Seed& seed) {
  return fit_gp_mle(x_low, y_low, MeanFunction::sample_mean(y_low), noise, seed);
}

GpFit fit_high_only(const Eigen::MatrixXd& x_high, const Eigen::VectorXd& y_high,
                    const CalibrationOptions& options) {
  const Eigen::VectorXd no_low = Eigen::VectorXd::Zero(y_high.size());
  return fit_discrepancy_given_u(0.0, no_low, x_high, y_high, options).gp;
}

std::vector<OutputCalibration> calibrate_outputs(const Eigen::MatrixXd& x_low,
                                                 const Eigen::MatrixXd& y_low,
                                                 const Eigen::MatrixXd& x_high,
                                                 const Eigen::MatrixXd& y_high,
                                                 const PipelineOptions& options) {
  if (y_low.cols() != y_high.cols())
    throw DomainError("calibrate_outputs: low and high data have different output counts");
  if (x_low.cols() != x_high.cols())
    throw DomainError("calibrate_outputs: low and high inputs have different dimensions");
  std::vector<OutputCalibration> out;
  for (Eigen::Index k = 0; k < y_low.cols(); ++k) {
    const auto label = static_cast<std::uint64_t>(k);
    try {
      GpFit low = fit_low_emulator(x_low, y_low.col(k), options.low_noise,
                                   options.seed.child({kLowStream, label}));
      CalibrationResult res = loo_posterior(low, x_high, y_high.col(k), options.calibration);
      out.push_back(OutputCalibration{std::move(low), std::move(res)});
    } catch (const EstimationError& e) {
      rethrow_for_output(e, k);
    } catch (const FitError& e) {
      rethrow_for_output(e, k);
    } catch (const DomainError& e) {
      rethrow_for_output(e, k);
    }
  }
  return out;
}

Eigen::MatrixXd draw_u_samples(const std::vector<OutputCalibration>& calibrations, int n_samples,
                               const Seed& seed) {
  if (calibrations.empty()) throw DomainError("draw_u_samples: no calibrated outputs");
  Eigen::MatrixXd u(n_samples, static_cast<Eigen::Index>(calibrations.size()));
  for (std::size_t k = 0; k < calibrations.size(); ++k) {
    const std::vector<double> draws =
        sample_u_posterior(calibrations[k].result, n_samples, seed.child(k));
    u.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(draws.data(), n_samples);
  }
  return u;
}

ModelFactory make_model_factory(const std::vector<OutputCalibration>& calibrations,
                                const Eigen::MatrixXd& x_high, const Eigen::MatrixXd& y_high,
                                const CalibrationOptions& options) {
  if (static_cast<Eigen::Index>(calibrations.size()) != y_high.cols())
    throw DomainError("make_model_factory: calibration count does not match output count");

  struct State {
    std::vector<GpFit> low;
    std::vector<Eigen::VectorXd> low_at_high;
    Eigen::MatrixXd x_high;
    Eigen::MatrixXd y_high;
    CalibrationOptions options;
    std::map<std::pair<std::size_t, long long>, DiscrepancyFit> cache;
  };
  auto state = std::make_shared<State>();
  for (const auto& c : calibrations) {
    state->low.push_back(c.low_emulator);
    state->low_at_high.push_back(gp_predict_mean(c.low_emulator, x_high));
  }
  state->x_high = x_high;
  state->y_high = y_high;
  state->options = options;

  return [state](const Eigen::VectorXd& u) {
    if (u.size() != static_cast<Eigen::Index>(state->low.size()))
      throw DomainError("model factory: u has the wrong length");
    std::vector<MultiFidelityModel> models;
    for (std::size_t k = 0; k < state->low.size(); ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      const long long key = std::llround(u[ki] * 1000.0);
      auto it = state->cache.find({k, key});
      if (it == state->cache.end()) {
        DiscrepancyFit fit =
            fit_discrepancy_given_u(static_cast<double>(key) / 1000.0, state->low_at_high[k],
                                    state->x_high, state->y_high.col(ki), state->options);
        it = state->cache.emplace(std::make_pair(k, key), std::move(fit)).first;
      }
      const DiscrepancyFit& disc = it->second;
      models.emplace_back(state->low[k], u[ki], disc.params(), disc.noise_variance(),
                          state->x_high, state->y_high.col(ki));
    }
    return models;
  };
}

OptimaCollection optimize_inputs(const std::vector<OutputCalibration>& calibrations,
                                 const Eigen::MatrixXd& x_high, const Eigen::MatrixXd& y_high,
                                 const ObjectiveSpec& spec, const DecisionConfig& cfg,
                                 const PipelineOptions& options) {
  const Eigen::MatrixXd u = draw_u_samples(calibrations, cfg.N_u, options.seed.child(kDrawStream));
  const ModelFactory factory = make_model_factory(calibrations, x_high, y_high, options.calibration);
  return run_decision_analysis(factory, u, spec, cfg);
}

ScenarioComparison compare_scenarios(const ScenarioData& data, const DecisionConfig& cfg,
                                     const PipelineOptions& options, int histogram_bins) {
  cfg.validate();
  std::vector<OutputCalibration> cal = calibrate_outputs(data.X_L, data.Y_L, data.X_H, data.Y_H, options);
  const ObjectiveSpec spec = ObjectiveSpec::identity();

  auto finish = [&](OptimaCollection optima) {
    OptimaSummary summary = summarize_optima(optima, histogram_bins);
    return StrategyResult{std::move(optima), std::move(summary)};
  };

  StrategyResult low = finish(run_single_fidelity_analysis({cal.front().low_emulator}, spec, cfg));
  const GpFit high_fit = fit_high_only(data.X_H, data.Y_H, options.calibration);
  StrategyResult high = finish(run_single_fidelity_analysis({high_fit}, spec, cfg));

  StrategyResult multi = finish(optimize_inputs(cal, data.X_H, data.Y_H, spec, cfg, options));

  return ScenarioComparison{std::move(cal.front()), std::move(low), std::move(high), std::move(multi)};
}

ScenarioGenerator illustrative_generator(std::uint64_t root) {
  const QuadraticScenario base = QuadraticScenario::illustrative();
  ScenarioGenerator gen;
  gen.optimum = base.a_H;
  gen.box = base.box;
  gen.generate = [root](int j) {
    return generate_scenario(QuadraticScenario::illustrative(Seed(root, {static_cast<std::uint64_t>(j)})));
  };
  return gen;
}

MseStudyResult mse_study(const ScenarioGenerator& generator, int n_datasets,
                         const DecisionConfig& cfg, const PipelineOptions& options,
                         const std::function<void(int, const MseStudyResult&)>& progress) {
  if (n_datasets < 1) throw DomainError("mse_study: need at least one dataset");
  if (generator.optimum.size() != cfg.box.dim())
    throw DomainError("mse_study: optimum dimension does not match the box");
  const Eigen::Index d = cfg.box.dim();

  MseStudyResult out;
  out.optimum = generator.optimum;
  std::vector<Eigen::VectorXd> low, high, multi;
  for (int j = 0; j < n_datasets; ++j) {
    DecisionConfig cfg_j = cfg;
    cfg_j.seed = cfg.seed.child(static_cast<std::uint64_t>(j));
    PipelineOptions opt_j = options;
    opt_j.seed = options.seed.child(static_cast<std::uint64_t>(j));
    try {
      const ScenarioComparison cmp = compare_scenarios(generator.generate(j), cfg_j, opt_j);
      low.push_back(cmp.low_only.summary.median);
      high.push_back(cmp.high_only.summary.median);
      multi.push_back(cmp.multi_fidelity.summary.median);
      out.datasets.push_back(j);
    } catch (const DomainError&) {
      throw;
    } catch (const Error& e) {
      out.failures.emplace_back(j, e.what());
    }
    out.low_medians = stack_rows(low, d);
    out.high_medians = stack_rows(high, d);
    out.multi_medians = stack_rows(multi, d);
    if (progress) progress(j, out);
  }
  out.mse_low = mean_squared_error(out.low_medians, out.optimum);
  out.mse_high = mean_squared_error(out.high_medians, out.optimum);
  out.mse_multi = mean_squared_error(out.multi_medians, out.optimum);
  return out;
}

}  // namespace mfcal
