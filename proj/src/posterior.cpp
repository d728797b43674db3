#include "mfcal/posterior.hpp"

#include <cmath>

#include "mfcal/errors.hpp"

namespace mfcal {

MultiFidelityModel::MultiFidelityModel(GpFit low_emulator, double u, KernelParams discrepancy,
                                       double noise_variance, Eigen::MatrixXd x_high,
                                       Eigen::VectorXd y_high)
    : low_(std::move(low_emulator)),
      u_(u),
      discrepancy_(std::move(discrepancy)),
      noise_variance_(noise_variance),
      x_high_(std::move(x_high)),
      y_high_(std::move(y_high)),
      joint_(validated_joint()),
      factor_(joint_.cov),
      weights_(factor_.solve(stacked_outputs() - joint_.mean)) {}

MultiFidelityModel::MultiFidelityModel(GpFit low_emulator, const DiscrepancyFit& discrepancy,
                                       Eigen::MatrixXd x_high, Eigen::VectorXd y_high)
    : MultiFidelityModel(std::move(low_emulator), discrepancy.u, discrepancy.params(),
                         discrepancy.noise_variance(), std::move(x_high), std::move(y_high)) {}

Eigen::VectorXd MultiFidelityModel::stacked_outputs() const {
  Eigen::VectorXd y(low_.size() + y_high_.size());
  y << low_.outputs(), y_high_;
  return y;
}

JointPrior MultiFidelityModel::validated_joint() const {
  if (!std::isfinite(u_)) throw DomainError("multi-fidelity model: u must be finite");
  discrepancy_.validate();
  if (discrepancy_.dim() != low_.dim())
    throw DomainError("multi-fidelity model: discrepancy kernel dimension differs from low emulator");
  if (!(noise_variance_ >= 0.0) || !std::isfinite(noise_variance_))
    throw DomainError("multi-fidelity model: noise variance must be >= 0");
  if (x_high_.rows() != y_high_.size())
    throw DomainError("multi-fidelity model: high-fidelity inputs and outputs differ in length");
  if (x_high_.rows() > 0 && x_high_.cols() != low_.dim())
    throw DomainError("multi-fidelity model: high-fidelity inputs have the wrong dimension");
  if (!x_high_.allFinite() || !y_high_.allFinite())
    throw DomainError("multi-fidelity model: high-fidelity data must be finite");

  const Eigen::Index n_l = low_.size();
  const Eigen::Index n_h = x_high_.rows();
  const KernelParams& kl = low_.params();
  const Eigen::MatrixXd& x_low = low_.inputs();

  JointPrior joint;
  joint.mean.resize(n_l + n_h);
  joint.mean.head(n_l) = low_.mean().evaluate(x_low);
  joint.cov.resize(n_l + n_h, n_l + n_h);
  joint.cov.topLeftCorner(n_l, n_l) = low_.covariance();
  if (n_h > 0) {
    joint.mean.tail(n_h) = u_ * low_.mean().evaluate(x_high_);
    const Eigen::MatrixXd cross = u_ * kernel_matrix(kl, x_low, x_high_);
    joint.cov.topRightCorner(n_l, n_h) = cross;
    joint.cov.bottomLeftCorner(n_h, n_l) = cross.transpose();
    Eigen::MatrixXd high = u_ * u_ * kernel_matrix(kl, x_high_, x_high_) +
                           kernel_matrix(discrepancy_, x_high_, x_high_);
    high.diagonal().array() += noise_variance_;
    joint.cov.bottomRightCorner(n_h, n_h) = high;
  }
  return joint;
}

JointPrior assemble_joint(const MultiFidelityModel& model) { return model.joint(); }

PosteriorPredictive predict_high(const MultiFidelityModel& model, const Eigen::MatrixXd& x_cand) {
  if (x_cand.rows() < 1) throw DomainError("predict_high: need at least one candidate");
  if (x_cand.cols() != model.dim()) throw DomainError("predict_high: dimension mismatch");
  const double u = model.u();
  const KernelParams& kl = model.low_emulator().params();
  const KernelParams& kb = model.discrepancy();
  const Eigen::Index n_l = model.low_inputs().rows();
  const Eigen::Index n_h = model.high_inputs().rows();

  // Cross-covariance between the stacked data and y_H at the candidates.
  Eigen::MatrixXd k(n_l + n_h, x_cand.rows());
  k.topRows(n_l) = u * kernel_matrix(kl, model.low_inputs(), x_cand);
  if (n_h > 0)
    k.bottomRows(n_h) = u * u * kernel_matrix(kl, model.high_inputs(), x_cand) +
                        kernel_matrix(kb, model.high_inputs(), x_cand);

  PosteriorPredictive out;
  out.X_cand = x_cand;
  out.mean = u * model.low_emulator().mean().evaluate(x_cand) + k.transpose() * model.weights();

  const Eigen::MatrixXd w = model.factor().llt().matrixL().solve(k);
  Eigen::MatrixXd cov = u * u * kernel_matrix(kl, x_cand, x_cand) + kernel_matrix(kb, x_cand, x_cand);
  out.prior_scale = cov.trace() / static_cast<double>(cov.rows());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), -1.0);
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose().eval();
  cov.diagonal() = cov.diagonal().cwiseMax(0.0);
  out.cov = std::move(cov);
  return out;
}

std::vector<PosteriorPredictive> predict_high_multi(const std::vector<MultiFidelityModel>& models,
                                                    const Eigen::MatrixXd& x_cand) {
  for (const auto& m : models)
    if (m.dim() != models.front().dim())
      throw DomainError("predict_high_multi: models disagree on input dimension");
  std::vector<PosteriorPredictive> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(predict_high(m, x_cand));
  return out;
}

}  // namespace mfcal
