#pragma once

// Sampling-based search for optimal inputs under predictive uncertainty.
//
// For every posterior draw s of the calibration parameters and every
// replication r, a fresh Latin hypercube of candidates is drawn, one joint
// realization of each output is sampled on it, and the candidate minimizing
// the objective is recorded. The spread of the recorded optima measures how
// uncertain the decision is.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mfcal/design.hpp"
#include "mfcal/gp.hpp"
#include "mfcal/posterior.hpp"

namespace mfcal {

class ObjectiveSpec {
 public:
  enum class Kind { Identity, SumOfSquares, WeightedSumOfSquares };

  static ObjectiveSpec identity() { return ObjectiveSpec(Kind::Identity, {}); }
  static ObjectiveSpec sum_of_squares() { return ObjectiveSpec(Kind::SumOfSquares, {}); }
  static ObjectiveSpec weighted_sum_of_squares(Eigen::VectorXd weights);

  Kind kind() const { return kind_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  /// Throws DomainError if the objective cannot take p outputs.
  void check_outputs(Eigen::Index p) const;

 private:
  ObjectiveSpec(Kind kind, Eigen::VectorXd weights) : kind_(kind), weights_(std::move(weights)) {}

  Kind kind_;
  Eigen::VectorXd weights_;
};

double evaluate_objective(const ObjectiveSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& y);

struct DecisionConfig {
  int N_u = 100;
  int n_rep = 100;
  /// Candidates per replication.
  int N = 200;
  Box box;
  Seed seed;
  /// Use the predictive mean instead of a random realization.
  bool collapse_variance = false;
  /// Skipped iterations above this fraction of N_u * n_rep abort the analysis.
  double max_skip_fraction = 0.1;

  void validate() const;
};

struct OptimaCollection {
  /// One row per completed (s, r) iteration, in (s, r) order.
  Eigen::MatrixXd points;
  /// Realized objective at each recorded optimum.
  Eigen::VectorXd objective;
  std::vector<std::pair<int, int>> provenance;
  std::vector<std::pair<int, int>> skipped;
  Box box;

  Eigen::Index size() const { return points.rows(); }
};

/// Maps candidate inputs to the predictive distribution of one output.
using Predictor = std::function<PosteriorPredictive(const Eigen::MatrixXd&)>;

/// Generic sampling loop. `stage(s)` supplies one predictor per output for
/// posterior draw s = 0 .. cfg.N_u - 1; a stage that throws skips all of its
/// replications.
OptimaCollection sample_optima(const std::function<std::vector<Predictor>(int)>& stage,
                               const ObjectiveSpec& spec, const DecisionConfig& cfg);

using ModelFactory = std::function<std::vector<MultiFidelityModel>(const Eigen::VectorXd& u)>;

/// u_samples holds one row per posterior draw and one column per output.
/// The number of rows overrides cfg.N_u.
OptimaCollection run_decision_analysis(const ModelFactory& factory,
                                       const Eigen::MatrixXd& u_samples,
                                       const ObjectiveSpec& spec, const DecisionConfig& cfg);

/// Same sampler driven by fixed single-fidelity GPs, one per output.
OptimaCollection run_single_fidelity_analysis(const std::vector<GpFit>& fits,
                                              const ObjectiveSpec& spec,
                                              const DecisionConfig& cfg);

struct Histogram {
  /// bins + 1 edges spanning the box extent.
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

struct OptimaSummary {
  Eigen::VectorXd median;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  /// Rows are dimensions; columns are the 2.5%, 25%, 75% and 97.5% quantiles.
  Eigen::MatrixXd quantiles;
  std::vector<Histogram> histograms;
};

inline constexpr double kSummaryQuantiles[4] = {0.025, 0.25, 0.75, 0.975};

OptimaSummary summarize_optima(const OptimaCollection& coll, int bins = 30);

}  // namespace mfcal
