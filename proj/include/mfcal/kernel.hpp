#pragma once

#include <Eigen/Dense>

namespace mfcal {

/// Separable squared-exponential covariance
///   k(x, x') = variance * exp(-1/2 * sum_i (x_i - x'_i)^2 / length_scales_i^2).
struct KernelParams {
  double variance = 1.0;
  Eigen::VectorXd length_scales;

  KernelParams() = default;
  KernelParams(double var, Eigen::VectorXd ls);

  Eigen::Index dim() const { return length_scales.size(); }

  /// Throws DomainError unless variance > 0 and every length-scale > 0.
  void validate() const;
};

double kernel_eval(const KernelParams& params, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& xp);

/// Rows of a and b are points; entry (i, j) is kernel_eval(a_i, b_j).
Eigen::MatrixXd kernel_matrix(const KernelParams& params, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

}  // namespace mfcal
