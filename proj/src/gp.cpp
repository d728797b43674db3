#include "mfcal/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "mfcal/errors.hpp"
#include "mfcal/optimize.hpp"

namespace mfcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Hard bounds, relative to the data scales.
constexpr double kVarianceLo = 1e-12;
constexpr double kVarianceHi = 1e6;
constexpr double kLengthLo = 1e-3;
constexpr double kLengthHi = 1e2;
constexpr double kRatioLo = 1e-12;  // noise / signal variance
constexpr double kRatioHi = 1e4;

double spread(const Eigen::VectorXd& r) {
  if (r.size() == 0) return 0.0;
  const double mu = r.mean();
  return (r.array() - mu).square().mean();
}

// Per-dimension squared differences of the training inputs, so that each
// likelihood evaluation only rescales and exponentiates.
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const Eigen::MatrixXd& x, Eigen::VectorXd r)
      : n_(x.rows()), r_(std::move(r)) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const Eigen::VectorXd c = x.col(k);
      Eigen::MatrixXd d2(n_, n_);
      for (Eigen::Index j = 0; j < n_; ++j) d2.col(j) = (c.array() - c[j]).square().matrix();
      sqdiff_.push_back(std::move(d2));
    }
  }

  // Correlation matrix exp(-1/2 sum_k D_k / l_k^2).
  Eigen::MatrixXd correlation(const Eigen::VectorXd& log_ls) const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_, n_);
    for (std::size_t k = 0; k < sqdiff_.size(); ++k)
      s += sqdiff_[k] * std::exp(-2.0 * log_ls[static_cast<Eigen::Index>(k)]);
    return (-0.5 * s.array()).exp().matrix();
  }

  double full(double log_var, const Eigen::VectorXd& log_ls, double noise_var) const {
    Eigen::MatrixXd a = std::exp(log_var) * correlation(log_ls);
    a.diagonal().array() += noise_var;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return kNegInf;
    const Eigen::VectorXd z = llt.matrixL().solve(r_);
    const double half_logdet = llt.matrixLLT().diagonal().array().log().sum();
    const double v = -0.5 * z.squaredNorm() - half_logdet - 0.5 * static_cast<double>(n_) * kLog2Pi;
    return std::isfinite(v) ? v : kNegInf;
  }

  // Signal variance maximized in closed form for fixed length-scales and
  // noise ratio, then clamped into [var_lo, var_hi].
  double profiled(const Eigen::VectorXd& log_ls, double log_ratio, double var_lo, double var_hi,
                  double* var_out = nullptr) const {
    Eigen::MatrixXd a = correlation(log_ls);
    a.diagonal().array() += std::exp(log_ratio);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return kNegInf;
    const Eigen::VectorXd z = llt.matrixL().solve(r_);
    const double q = z.squaredNorm();
    const double dn = static_cast<double>(n_);
    const double var = std::clamp(q / dn, var_lo, var_hi);
    if (var_out != nullptr) *var_out = var;
    const double half_logdet = llt.matrixLLT().diagonal().array().log().sum();
    const double v =
        -0.5 * q / var - 0.5 * dn * std::log(var) - half_logdet - 0.5 * dn * kLog2Pi;
    return std::isfinite(v) ? v : kNegInf;
  }

 private:
  Eigen::Index n_;
  Eigen::VectorXd r_;
  std::vector<Eigen::MatrixXd> sqdiff_;
};

void check_training_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw DomainError("gp: input rows do not match output length");
  if (x.cols() < 1) throw DomainError("gp: inputs need at least one column");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("gp: training data must be finite");
}

}  // namespace

MeanFunction MeanFunction::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("mean function: constant must be finite");
  return {Kind::Constant, c};
}

MeanFunction MeanFunction::sample_mean(const Eigen::VectorXd& y) {
  if (y.size() == 0) throw DomainError("mean function: empty sample");
  return constant(y.mean());
}

NoiseModel NoiseModel::fixed(double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("noise: variance must be >= 0");
  return {false, v};
}

GpFit::GpFit(Eigen::MatrixXd inputs, Eigen::VectorXd outputs, MeanFunction mean,
             KernelParams params, double noise_variance)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      mean_(mean),
      params_(std::move(params)),
      noise_variance_(noise_variance),
      factor_(validated_covariance()),
      weights_(factor_.solve(residuals())) {}

Eigen::MatrixXd GpFit::validated_covariance() const {
  check_training_data(inputs_, outputs_);
  if (inputs_.rows() < 1) throw DomainError("gp: need at least one training point");
  params_.validate();
  if (params_.dim() != inputs_.cols())
    throw DomainError("gp: kernel dimension does not match inputs");
  if (!(noise_variance_ >= 0.0) || !std::isfinite(noise_variance_))
    throw DomainError("gp: noise variance must be >= 0");
  return covariance();
}

Eigen::MatrixXd GpFit::covariance() const {
  Eigen::MatrixXd k = kernel_matrix(params_, inputs_, inputs_);
  k.diagonal().array() += noise_variance_;
  return k;
}

double log_marginal_likelihood(const GpFit& fit) {
  const Eigen::VectorXd r = fit.residuals();
  const double n = static_cast<double>(fit.size());
  return -0.5 * r.dot(fit.weights()) - fit.factor().half_log_det() - 0.5 * n * kLog2Pi;
}

double gaussian_log_density(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return kNegInf;
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  return -0.5 * z.squaredNorm() - llt.matrixLLT().diagonal().array().log().sum() -
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

GpFit fit_gp_mle(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                 const MeanFunction& mean, const NoiseModel& noise, const Seed& seed,
                 const MleOptions& options, MleTrace* trace) {
  check_training_data(inputs, outputs);
  if (inputs.rows() < 2) throw DomainError("fit_gp_mle: need at least two training points");
  if (options.n_starts < 1) throw DomainError("fit_gp_mle: need at least one start");
  const Eigen::Index d = inputs.cols();

  const Eigen::VectorXd r = outputs - mean.evaluate(inputs);
  double v_start = options.start_variance > 0.0 ? options.start_variance : spread(r);
  if (!(v_start > 0.0)) v_start = r.squaredNorm() / static_cast<double>(r.size());
  if (!(v_start > 0.0)) v_start = 1.0;
  const double v_bound = options.bound_variance > 0.0 ? options.bound_variance : v_start;

  Eigen::VectorXd range = inputs.colwise().maxCoeff() - inputs.colwise().minCoeff();
  for (Eigen::Index k = 0; k < d; ++k)
    if (!(range[k] > 0.0)) range[k] = 1.0;

  // Full log-parameter layout: [log s2, log l_1..d, (log noise)].
  const Eigen::Index full_dim = 1 + d + (noise.estimate ? 1 : 0);
  Eigen::VectorXd start_lo(full_dim), start_hi(full_dim);
  start_lo[0] = std::log(1e-3 * v_start);
  start_hi[0] = std::log(1e2 * v_start);
  for (Eigen::Index k = 0; k < d; ++k) {
    start_lo[1 + k] = std::log(0.05 * range[k]);
    start_hi[1 + k] = std::log(5.0 * range[k]);
  }
  if (noise.estimate) {
    start_lo[1 + d] = std::log(1e-6 * v_start);
    start_hi[1 + d] = std::log(0.5 * v_start);
  }
  const Eigen::MatrixXd starts = lhd_sample(options.n_starts, Box(start_lo, start_hi), seed);

  const LikelihoodEvaluator eval(inputs, r);
  const double var_lo = kVarianceLo * v_bound;
  const double var_hi = kVarianceHi * v_bound;

  // Optimization space: fixed noise -> [log s2, log l]; estimated -> [log l, log ratio].
  const Eigen::Index opt_dim = d + 1;
  Eigen::VectorXd lo(opt_dim), hi(opt_dim), step(opt_dim);
  auto ls_slice = [&](const Eigen::VectorXd& p, Eigen::Index offset) {
    return p.segment(offset, d).eval();
  };
  if (noise.estimate) {
    for (Eigen::Index k = 0; k < d; ++k) {
      lo[k] = std::log(kLengthLo * range[k]);
      hi[k] = std::log(kLengthHi * range[k]);
      step[k] = 0.15 * (start_hi[1 + k] - start_lo[1 + k]);
    }
    lo[d] = std::log(kRatioLo);
    hi[d] = std::log(kRatioHi);
    step[d] = 1.0;
  } else {
    lo[0] = std::log(var_lo);
    hi[0] = std::log(var_hi);
    step[0] = 0.15 * (start_hi[0] - start_lo[0]);
    for (Eigen::Index k = 0; k < d; ++k) {
      lo[1 + k] = std::log(kLengthLo * range[k]);
      hi[1 + k] = std::log(kLengthHi * range[k]);
      step[1 + k] = 0.15 * (start_hi[1 + k] - start_lo[1 + k]);
    }
  }

  auto objective = [&](const Eigen::VectorXd& p) {
    if (noise.estimate) return -eval.profiled(ls_slice(p, 0), p[d], var_lo, var_hi);
    return -eval.full(p[0], ls_slice(p, 1), noise.variance);
  };
  auto to_opt_space = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd p(opt_dim);
    if (noise.estimate) {
      p.head(d) = full.segment(1, d);
      p[d] = full[1 + d] - full[0];
    } else {
      p = full.head(1 + d);
    }
    return p.cwiseMax(lo).cwiseMin(hi).eval();
  };

  MleTrace local;
  NelderMeadOptions screen;
  screen.max_evaluations = options.screen_evaluations;
  screen.f_tolerance = 1e-4;
  screen.x_tolerance = 1e-2;
  screen.initial_step = step;

  std::optional<NelderMeadResult> best;
  for (Eigen::Index s = 0; s < starts.rows(); ++s) {
    const Eigen::VectorXd full = starts.row(s).transpose();
    MleStart record;
    record.log_params = full;
    record.initial_log_likelihood =
        eval.full(full[0], full.segment(1, d),
                  noise.estimate ? std::exp(full[1 + d]) : noise.variance);
    NelderMeadResult res = nelder_mead(objective, to_opt_space(full), lo, hi, screen);
    local.evaluations += res.evaluations;
    record.final_log_likelihood = -res.value;
    local.starts.push_back(record);
    if (std::isfinite(res.value) && (!best || res.value < best->value)) best = std::move(res);
  }
  if (!best) throw FitError("fit_gp_mle: no multistart reached a finite likelihood");

  NelderMeadOptions polish;
  polish.max_evaluations = options.polish_evaluations;
  polish.f_tolerance = 1e-7;
  polish.x_tolerance = 1e-4;
  polish.initial_step = 0.25 * step;
  for (int round = 0; round < 2; ++round) {
    NelderMeadResult res = nelder_mead(objective, best->x, lo, hi, polish);
    local.evaluations += res.evaluations;
    if (res.value <= best->value) best = std::move(res);
    polish.initial_step *= 0.2;
  }

  const Eigen::VectorXd& p = best->x;
  double variance = 0.0;
  double noise_var = noise.variance;
  Eigen::VectorXd ls;
  if (noise.estimate) {
    ls = ls_slice(p, 0).array().exp();
    eval.profiled(ls_slice(p, 0), p[d], var_lo, var_hi, &variance);
    noise_var = variance * std::exp(p[d]);
  } else {
    variance = std::exp(p[0]);
    ls = ls_slice(p, 1).array().exp();
  }
  local.best_log_likelihood = -best->value;
  if (trace != nullptr) *trace = std::move(local);
  return GpFit(inputs, outputs, mean, KernelParams(variance, ls), noise_var);
}

PosteriorPredictive gp_predict(const GpFit& fit, const Eigen::MatrixXd& x_new) {
  if (x_new.cols() != fit.dim()) throw DomainError("gp_predict: dimension mismatch");
  const Eigen::MatrixXd k_star = kernel_matrix(fit.params(), fit.inputs(), x_new);
  PosteriorPredictive out;
  out.X_cand = x_new;
  out.mean = fit.mean().evaluate(x_new) + k_star.transpose() * fit.weights();
  const Eigen::MatrixXd w = fit.factor().llt().matrixL().solve(k_star);
  Eigen::MatrixXd cov = kernel_matrix(fit.params(), x_new, x_new);
  out.prior_scale = cov.trace() / static_cast<double>(cov.rows());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), -1.0);
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose().eval();
  cov.diagonal() = cov.diagonal().cwiseMax(0.0);
  out.cov = std::move(cov);
  return out;
}

Eigen::VectorXd gp_predict_mean(const GpFit& fit, const Eigen::MatrixXd& x_new) {
  if (x_new.cols() != fit.dim()) throw DomainError("gp_predict: dimension mismatch");
  return fit.mean().evaluate(x_new) +
         kernel_matrix(fit.params(), fit.inputs(), x_new).transpose() * fit.weights();
}

}  // namespace mfcal
