#pragma once

// Single-fidelity Gaussian process regression with the separable
// squared-exponential kernel: likelihood, maximum-likelihood fitting and
// conditional prediction.

#include <vector>

#include <Eigen/Dense>

#include "mfcal/design.hpp"
#include "mfcal/kernel.hpp"

namespace mfcal {

struct MeanFunction {
  enum class Kind { Zero, Constant };

  Kind kind = Kind::Zero;
  double value = 0.0;

  static MeanFunction zero() { return {}; }
  static MeanFunction constant(double c);
  /// Constant mean at the sample average of y.
  static MeanFunction sample_mean(const Eigen::VectorXd& y);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& /*x*/) const {
    return kind == Kind::Constant ? value : 0.0;
  }
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& x) const {
    return Eigen::VectorXd::Constant(x.rows(), kind == Kind::Constant ? value : 0.0);
  }
};

/// Observation noise: either a fixed variance or a free hyperparameter.
struct NoiseModel {
  bool estimate = false;
  double variance = 1e-10;

  static NoiseModel fixed(double v);
  static NoiseModel estimated() { return {true, 0.0}; }
};

/// Mean vector and covariance of a Gaussian process on a finite point set.
struct PosteriorPredictive {
  Eigen::MatrixXd X_cand;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  /// Average prior variance at X_cand, the scale of rounding error in cov.
  double prior_scale = 0.0;
};

/// A GP conditioned on training data. Immutable; the Cholesky factor of
/// K + noise*I and the weights (K + noise*I)^{-1} r are computed on construction.
class GpFit {
 public:
  GpFit(Eigen::MatrixXd inputs, Eigen::VectorXd outputs, MeanFunction mean, KernelParams params,
        double noise_variance);

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& outputs() const { return outputs_; }
  const MeanFunction& mean() const { return mean_; }
  const KernelParams& params() const { return params_; }
  double noise_variance() const { return noise_variance_; }
  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dim() const { return inputs_.cols(); }

  const JitteredCholesky& factor() const { return factor_; }
  /// (K + noise*I)^{-1} (y - mean(X))
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd residuals() const { return outputs_ - mean_.evaluate(inputs_); }

  /// K + noise*I as used for the factorization (without any jitter).
  Eigen::MatrixXd covariance() const;

 private:
  Eigen::MatrixXd validated_covariance() const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd outputs_;
  MeanFunction mean_;
  KernelParams params_;
  double noise_variance_;
  JitteredCholesky factor_;
  Eigen::VectorXd weights_;
};

double log_marginal_likelihood(const GpFit& fit);

struct MleOptions {
  int n_starts = 8;
  /// Nelder-Mead budget for screening each multistart.
  int screen_evaluations = 40;
  /// Budget for polishing the best screened start.
  int polish_evaluations = 300;
  /// Scale for the start box of the signal variance; <= 0 means var(y - mean).
  double start_variance = 0.0;
  /// Scale for the hard variance bounds; <= 0 means the start scale.
  double bound_variance = 0.0;
};

/// One multistart, in natural-log parameter space
/// (log variance, log length-scales..., log noise variance).
struct MleStart {
  Eigen::VectorXd log_params;
  double initial_log_likelihood = 0.0;
  double final_log_likelihood = 0.0;
};

struct MleTrace {
  std::vector<MleStart> starts;
  double best_log_likelihood = 0.0;
  int evaluations = 0;
};

/// Maximum-likelihood kernel (and optionally noise) hyperparameters.
///
/// Multistart points are a Latin hypercube over
///   log l_i   in [log(0.05 range_i), log(5 range_i)]
///   log s2    in [log(1e-3 v), log(1e2 v)]
///   log noise in [log(1e-6 v), log(0.5 v)]   (when estimated)
/// with v the output variance about the mean. Each start is screened with a
/// short simplex run and the best one is polished. When the noise is estimated
/// the signal variance is profiled out in closed form.
GpFit fit_gp_mle(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                 const MeanFunction& mean, const NoiseModel& noise, const Seed& seed,
                 const MleOptions& options = {}, MleTrace* trace = nullptr);

PosteriorPredictive gp_predict(const GpFit& fit, const Eigen::MatrixXd& x_new);

/// Predictive mean only; cheaper than gp_predict when the covariance is unused.
Eigen::VectorXd gp_predict_mean(const GpFit& fit, const Eigen::MatrixXd& x_new);

/// Zero-mean Gaussian log density of y under covariance `cov`, by explicit
/// factorization without jitter. Returns -inf if `cov` is not positive definite.
double gaussian_log_density(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov);

}  // namespace mfcal
