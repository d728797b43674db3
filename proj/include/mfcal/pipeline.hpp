#pragma once

// End-to-end workflow: fit a low-fidelity emulator per output, calibrate u,
// draw posterior samples of u, and run the decision analysis. Also the
// low-only / high-only / multi-fidelity comparison and its repetition over
// regenerated datasets.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mfcal/calibration.hpp"
#include "mfcal/decision.hpp"
#include "mfcal/gp.hpp"
#include "mfcal/synthetic.hpp"

namespace mfcal {

struct PipelineOptions {
  CalibrationOptions calibration;
  /// Low-fidelity data are treated as near-deterministic by default.
  NoiseModel low_noise = NoiseModel::fixed(1e-10);
  /// Streams for the emulator multistarts and the u draws.
  Seed seed{2025};
};

struct OutputCalibration {
  GpFit low_emulator;
  CalibrationResult result;
};

/// Constant-mean emulator at the sample mean of y.
GpFit fit_low_emulator(const Eigen::MatrixXd& x_low, const Eigen::VectorXd& y_low,
                       const NoiseModel& noise, const Seed& seed);

/// The multi-fidelity model with u fixed at 0 and the low-fidelity data
/// dropped: a zero-mean GP on the high-fidelity data, noise estimated.
GpFit fit_high_only(const Eigen::MatrixXd& x_high, const Eigen::VectorXd& y_high,
                    const CalibrationOptions& options);

/// Independent calibration of every output column. Errors are rethrown with
/// the output index prefixed.
std::vector<OutputCalibration> calibrate_outputs(const Eigen::MatrixXd& x_low,
                                                 const Eigen::MatrixXd& y_low,
                                                 const Eigen::MatrixXd& x_high,
                                                 const Eigen::MatrixXd& y_high,
                                                 const PipelineOptions& options);

/// N_u x p matrix; column k is drawn from output k's leave-one-out estimates.
Eigen::MatrixXd draw_u_samples(const std::vector<OutputCalibration>& calibrations, int n_samples,
                               const Seed& seed);

/// Builds the p models for a row of u values. Discrepancy hyperparameters are
/// refitted at u rounded to three decimals and cached per (output, rounded u);
/// the model itself uses the exact u.
ModelFactory make_model_factory(const std::vector<OutputCalibration>& calibrations,
                                const Eigen::MatrixXd& x_high, const Eigen::MatrixXd& y_high,
                                const CalibrationOptions& options);

/// Posterior draws of u, model factory and decision analysis in one call.
/// The u draws use options.seed; the candidate streams use cfg.seed.
OptimaCollection optimize_inputs(const std::vector<OutputCalibration>& calibrations,
                                 const Eigen::MatrixXd& x_high, const Eigen::MatrixXd& y_high,
                                 const ObjectiveSpec& spec, const DecisionConfig& cfg,
                                 const PipelineOptions& options);

struct StrategyResult {
  OptimaCollection optima;
  OptimaSummary summary;
};

struct ScenarioComparison {
  OutputCalibration calibration;
  StrategyResult low_only;
  StrategyResult high_only;
  StrategyResult multi_fidelity;
};

/// Runs the three strategies on one single-output data set with a shared
/// decision configuration (and therefore shared candidate streams).
ScenarioComparison compare_scenarios(const ScenarioData& data, const DecisionConfig& cfg,
                                     const PipelineOptions& options, int histogram_bins = 30);

struct ScenarioGenerator {
  std::function<ScenarioData(int)> generate;
  /// True minimizer of the high-fidelity response.
  Eigen::VectorXd optimum;
  Box box;
};

/// Dataset j uses the default illustrative constants with seed (root, j).
ScenarioGenerator illustrative_generator(std::uint64_t root);

struct MseStudyResult {
  Eigen::VectorXd optimum;
  /// Indices of datasets whose three analyses all completed.
  std::vector<int> datasets;
  std::vector<std::pair<int, std::string>> failures;
  /// One row per completed dataset: per-dimension median optimum.
  Eigen::MatrixXd low_medians;
  Eigen::MatrixXd high_medians;
  Eigen::MatrixXd multi_medians;
  Eigen::VectorXd mse_low;
  Eigen::VectorXd mse_high;
  Eigen::VectorXd mse_multi;
};

/// Mean over datasets of the squared distance between each strategy's median
/// optimum and the true optimum, per dimension. Dataset j runs its decision
/// analyses with cfg.seed.child(j).
MseStudyResult mse_study(const ScenarioGenerator& generator, int n_datasets,
                         const DecisionConfig& cfg, const PipelineOptions& options,
                         const std::function<void(int, const MseStudyResult&)>& progress = {});

}  // namespace mfcal
