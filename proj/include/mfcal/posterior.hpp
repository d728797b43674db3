#pragma once

// Joint Gaussian model of low- and high-fidelity observations,
//   y_H(x) = u * y_L(x) + b(x),  Y_H = y_H(X_H) + noise,
// and the posterior of the high-fidelity process given both data sets.

#include <vector>

#include <Eigen/Dense>

#include "mfcal/calibration.hpp"
#include "mfcal/design.hpp"
#include "mfcal/gp.hpp"
#include "mfcal/kernel.hpp"

namespace mfcal {

struct JointPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Immutable once built: the joint covariance is factorized on construction
/// and reused for every prediction.
class MultiFidelityModel {
 public:
  /// Low-fidelity data and kernel come from `low_emulator`. `x_high` may have
  /// zero rows, in which case only the low-fidelity data are conditioned on.
  MultiFidelityModel(GpFit low_emulator, double u, KernelParams discrepancy,
                     double noise_variance, Eigen::MatrixXd x_high, Eigen::VectorXd y_high);

  MultiFidelityModel(GpFit low_emulator, const DiscrepancyFit& discrepancy,
                     Eigen::MatrixXd x_high, Eigen::VectorXd y_high);

  const GpFit& low_emulator() const { return low_; }
  double u() const { return u_; }
  const KernelParams& discrepancy() const { return discrepancy_; }
  double noise_variance() const { return noise_variance_; }
  const Eigen::MatrixXd& low_inputs() const { return low_.inputs(); }
  const Eigen::VectorXd& low_outputs() const { return low_.outputs(); }
  const Eigen::MatrixXd& high_inputs() const { return x_high_; }
  const Eigen::VectorXd& high_outputs() const { return y_high_; }
  Eigen::Index dim() const { return low_.dim(); }

  /// Stacked observations (Y_L, Y_H).
  Eigen::VectorXd stacked_outputs() const;
  const JointPrior& joint() const { return joint_; }
  const JitteredCholesky& factor() const { return factor_; }
  /// Sigma^{-1} (Y - mu)
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  JointPrior validated_joint() const;

  GpFit low_;
  double u_;
  KernelParams discrepancy_;
  double noise_variance_;
  Eigen::MatrixXd x_high_;
  Eigen::VectorXd y_high_;
  JointPrior joint_;
  JitteredCholesky factor_;
  Eigen::VectorXd weights_;
};

/// Prior mean (mu_L(X_L), u mu_L(X_H)) and block covariance
///   [ K_L(X_L,X_L) + n_L I      u K_L(X_L,X_H)                          ]
///   [ u K_L(X_H,X_L)            u^2 K_L(X_H,X_H) + K_b(X_H,X_H) + s2 I  ]
/// where n_L is the low emulator's own noise variance.
JointPrior assemble_joint(const MultiFidelityModel& model);

/// Posterior mean and covariance of y_H at the candidate rows.
PosteriorPredictive predict_high(const MultiFidelityModel& model, const Eigen::MatrixXd& x_cand);

/// One independent predictive per output model.
std::vector<PosteriorPredictive> predict_high_multi(const std::vector<MultiFidelityModel>& models,
                                                    const Eigen::MatrixXd& x_cand);

}  // namespace mfcal
