#include "mfcal/kernel.hpp"

#include <cmath>

#include "mfcal/errors.hpp"

namespace mfcal {

KernelParams::KernelParams(double var, Eigen::VectorXd ls)
    : variance(var), length_scales(std::move(ls)) {
  validate();
}

void KernelParams::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw DomainError("kernel: variance must be positive and finite");
  if (length_scales.size() == 0) throw DomainError("kernel: no length-scales");
  for (Eigen::Index i = 0; i < length_scales.size(); ++i)
    if (!(length_scales[i] > 0.0) || !std::isfinite(length_scales[i]))
      throw DomainError("kernel: length-scales must be positive and finite");
}

double kernel_eval(const KernelParams& params, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& xp) {
  if (x.size() != params.dim() || xp.size() != params.dim())
    throw DomainError("kernel_eval: point dimension does not match length-scales");
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = (x[i] - xp[i]) / params.length_scales[i];
    s += t * t;
  }
  return params.variance * std::exp(-0.5 * s);
}

Eigen::MatrixXd kernel_matrix(const KernelParams& params, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  const Eigen::Index d = params.dim();
  if (a.cols() != d || b.cols() != d)
    throw DomainError("kernel_matrix: column count does not match length-scales");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(a.rows(), b.rows());
  for (Eigen::Index k = 0; k < d; ++k) {
    const double inv = 1.0 / params.length_scales[k];
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double t = (a(i, k) - b(j, k)) * inv;
        s(i, j) += t * t;
      }
    }
  }
  // Scalar exp keeps k(a, b) and k(b, a) bitwise equal.
  const double var = params.variance;
  return s.unaryExpr([var](double v) { return var * std::exp(-0.5 * v); });
}

}  // namespace mfcal
