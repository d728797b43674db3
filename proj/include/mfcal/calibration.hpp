#pragma once

// Modular estimation of the scaling parameter u linking a fitted low-fidelity
// emulator to high-fidelity observations:
//   Y_H - u * yhat_L(X_H) ~ N(0, K_b + noise * I)
// The discrepancy hyperparameters are refitted for every candidate u, u is
// chosen by maximizing the profiled likelihood plus log prior, and
// leave-one-out re-estimation approximates the posterior of u.

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mfcal/design.hpp"
#include "mfcal/gp.hpp"

namespace mfcal {

class CalibrationPrior {
 public:
  enum class Kind { Flat, Gaussian, Uniform };

  static CalibrationPrior flat() { return CalibrationPrior(Kind::Flat, 0.0, 0.0); }
  static CalibrationPrior gaussian(double mean, double sd);
  static CalibrationPrior uniform(double lo, double hi);

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }

  /// Log density up to a constant; -inf outside a uniform prior's support.
  double log_density(double u) const;

 private:
  CalibrationPrior(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_;  // gaussian mean, or uniform lower
  double b_;  // gaussian sd, or uniform upper
};

/// Coarse grid over [lo, hi] followed by golden-section refinement around the
/// grid argmax.
struct USearch {
  double lo = -2.0;
  double hi = 12.0;
  int grid_points = 81;
  double tolerance = 1e-4;

  void validate() const;
};

struct CalibrationOptions {
  CalibrationPrior prior = CalibrationPrior::flat();
  USearch search;
  /// Multistart seed for the discrepancy fits; the same seed is used for every u
  /// so that the profile is a deterministic function of u.
  Seed seed{0x6d66636cULL};
  MleOptions mle;
  /// Leave-one-out folds search u_hat +- fold_window on fold_grid_points
  /// points; a fold whose grid argmax sits on the window edge is redone over
  /// the full search. fold_window <= 0 always uses the full search.
  double fold_window = 0.25;
  int fold_grid_points = 11;
};

/// Discrepancy GP fitted to the residuals at a given u.
struct DiscrepancyFit {
  double u = 0.0;
  /// Zero-mean GP on (X_H, residuals); houses the discrepancy kernel and noise variance.
  GpFit gp;

  const KernelParams& params() const { return gp.params(); }
  double noise_variance() const { return gp.noise_variance(); }
  const Eigen::VectorXd& residuals() const { return gp.outputs(); }
  const Eigen::MatrixXd& high_inputs() const { return gp.inputs(); }
  double log_likelihood() const { return log_marginal_likelihood(gp); }
};

DiscrepancyFit fit_discrepancy_given_u(double u, const GpFit& low_emulator,
                                       const Eigen::MatrixXd& x_high,
                                       const Eigen::VectorXd& y_high,
                                       const CalibrationOptions& options = {});

/// Same, with the emulator mean at X_H already computed.
DiscrepancyFit fit_discrepancy_given_u(double u, const Eigen::VectorXd& low_at_high,
                                       const Eigen::MatrixXd& x_high,
                                       const Eigen::VectorXd& y_high,
                                       const CalibrationOptions& options = {});

struct UEstimate {
  double u_hat = 0.0;
  double log_posterior = 0.0;
  /// Every evaluated (u, log-likelihood + log-prior), grid first, then refinement.
  std::vector<std::pair<double, double>> profile;
  /// u_hat sits within the refinement tolerance of a search bound.
  bool on_boundary = false;
};

UEstimate estimate_u(const GpFit& low_emulator, const Eigen::MatrixXd& x_high,
                     const Eigen::VectorXd& y_high, const CalibrationOptions& options = {});

UEstimate estimate_u(const Eigen::VectorXd& low_at_high, const Eigen::MatrixXd& x_high,
                     const Eigen::VectorXd& y_high, const CalibrationOptions& options = {});

struct CalibrationResult {
  double u_hat = 0.0;
  UEstimate full;
  /// One estimate per successful fold, in fold order.
  std::vector<double> loo_samples;
  /// Indices of held-out rows whose fold failed.
  std::vector<Eigen::Index> failed_folds;
  std::pair<double, double> interval{0.0, 0.0};
  std::optional<DiscrepancyFit> discrepancy;

  std::size_t successful_folds() const { return loo_samples.size(); }
};

/// Full-data estimate plus one re-estimate per held-out high-fidelity row.
/// The interval is the empirical (2.5%, 97.5%) quantile pair of the fold estimates.
CalibrationResult loo_posterior(const GpFit& low_emulator, const Eigen::MatrixXd& x_high,
                                const Eigen::VectorXd& y_high,
                                const CalibrationOptions& options = {});

/// Smoothed bootstrap from the leave-one-out estimates: resample with
/// replacement and add Gaussian noise with Silverman's bandwidth.
std::vector<double> sample_u_posterior(const CalibrationResult& result, int n_samples,
                                       const Seed& seed);

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling back to sd when the IQR is zero.
double silverman_bandwidth(const std::vector<double>& samples);

}  // namespace mfcal
