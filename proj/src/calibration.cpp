#include "mfcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mfcal/errors.hpp"
#include "mfcal/optimize.hpp"
#include "mfcal/stats.hpp"

namespace mfcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double population_variance(const Eigen::VectorXd& v) {
  if (v.size() == 0) return 0.0;
  return (v.array() - v.mean()).square().mean();
}

Eigen::MatrixXd drop_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  Eigen::MatrixXd out(m.rows() - 1, m.cols());
  out.topRows(row) = m.topRows(row);
  out.bottomRows(m.rows() - row - 1) = m.bottomRows(m.rows() - row - 1);
  return out;
}

Eigen::VectorXd drop_entry(const Eigen::VectorXd& v, Eigen::Index i) {
  Eigen::VectorXd out(v.size() - 1);
  out.head(i) = v.head(i);
  out.tail(v.size() - i - 1) = v.tail(v.size() - i - 1);
  return out;
}

void check_high_data(const Eigen::VectorXd& low_at_high, const Eigen::MatrixXd& x_high,
                     const Eigen::VectorXd& y_high) {
  if (x_high.rows() != y_high.size() || low_at_high.size() != y_high.size())
    throw DomainError("calibration: high-fidelity inputs, outputs and emulator means differ in length");
  if (y_high.size() < 2) throw DomainError("calibration: need at least two high-fidelity points");
}

}  // namespace

CalibrationPrior CalibrationPrior::gaussian(double mean, double sd) {
  if (!std::isfinite(mean) || !(sd > 0.0) || !std::isfinite(sd))
    throw DomainError("prior: gaussian needs finite mean and sd > 0");
  return CalibrationPrior(Kind::Gaussian, mean, sd);
}

CalibrationPrior CalibrationPrior::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw DomainError("prior: uniform needs lo < hi");
  return CalibrationPrior(Kind::Uniform, lo, hi);
}

double CalibrationPrior::log_density(double u) const {
  switch (kind_) {
    case Kind::Flat:
      return 0.0;
    case Kind::Gaussian: {
      const double z = (u - a_) / b_;
      return -0.5 * z * z - std::log(b_) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    case Kind::Uniform:
      return (u >= a_ && u <= b_) ? -std::log(b_ - a_) : kNegInf;
  }
  return 0.0;
}

void USearch::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw DomainError("u search: bounds must be finite with lo < hi");
  if (grid_points < 2) throw DomainError("u search: need at least two grid points");
  if (!(tolerance > 0.0)) throw DomainError("u search: tolerance must be positive");
}

DiscrepancyFit fit_discrepancy_given_u(double u, const Eigen::VectorXd& low_at_high,
                                       const Eigen::MatrixXd& x_high,
                                       const Eigen::VectorXd& y_high,
                                       const CalibrationOptions& options) {
  check_high_data(low_at_high, x_high, y_high);
  Eigen::VectorXd residuals = y_high - u * low_at_high;

  // Hard variance bounds follow the observations, so the likelihood is
  // comparable across u; the multistart box follows the residuals.
  MleOptions mle = options.mle;
  double scale = population_variance(y_high);
  if (!(scale > 0.0)) scale = std::max(y_high.squaredNorm() / static_cast<double>(y_high.size()), 1.0);
  const double r_var = population_variance(residuals);
  mle.bound_variance = scale;
  mle.start_variance = r_var > 1e-12 * scale ? r_var : 1e-12 * scale;

  GpFit gp = fit_gp_mle(x_high, residuals, MeanFunction::zero(), NoiseModel::estimated(),
                        options.seed, mle);
  return DiscrepancyFit{u, std::move(gp)};
}

DiscrepancyFit fit_discrepancy_given_u(double u, const GpFit& low_emulator,
                                       const Eigen::MatrixXd& x_high,
                                       const Eigen::VectorXd& y_high,
                                       const CalibrationOptions& options) {
  return fit_discrepancy_given_u(u, gp_predict_mean(low_emulator, x_high), x_high, y_high,
                                 options);
}

UEstimate estimate_u(const Eigen::VectorXd& low_at_high, const Eigen::MatrixXd& x_high,
                     const Eigen::VectorXd& y_high, const CalibrationOptions& options) {
  check_high_data(low_at_high, x_high, y_high);
  const USearch& search = options.search;
  search.validate();

  auto objective = [&](double u) {
    const double lp = options.prior.log_density(u);
    if (!std::isfinite(lp)) return kNegInf;
    try {
      const double ll = fit_discrepancy_given_u(u, low_at_high, x_high, y_high, options)
                            .log_likelihood();
      return std::isfinite(ll) ? ll + lp : kNegInf;
    } catch (const FitError&) {
      return kNegInf;
    } catch (const NumericalError&) {
      return kNegInf;
    }
  };

  UEstimate est;
  const int g = search.grid_points;
  const double step = (search.hi - search.lo) / static_cast<double>(g - 1);
  int best = -1;
  for (int i = 0; i < g; ++i) {
    const double u = i == g - 1 ? search.hi : search.lo + step * i;
    const double v = objective(u);
    est.profile.emplace_back(u, v);
    if (std::isfinite(v) && (best < 0 || v > est.profile[static_cast<std::size_t>(best)].second))
      best = i;
  }
  if (best < 0) throw EstimationError("estimate_u: every grid evaluation was non-finite");

  const double left = est.profile[static_cast<std::size_t>(std::max(best - 1, 0))].first;
  const double right = est.profile[static_cast<std::size_t>(std::min(best + 1, g - 1))].first;
  golden_section_max(objective, left, right, search.tolerance,
                     [&](double u, double v) { est.profile.emplace_back(u, v); });

  const auto top = std::max_element(
      est.profile.begin(), est.profile.end(), [](const auto& a, const auto& b) {
        const double av = std::isfinite(a.second) ? a.second : kNegInf;
        const double bv = std::isfinite(b.second) ? b.second : kNegInf;
        return av < bv;
      });
  est.u_hat = top->first;
  est.log_posterior = top->second;
  est.on_boundary = est.u_hat - search.lo <= search.tolerance ||
                    search.hi - est.u_hat <= search.tolerance;
  return est;
}

UEstimate estimate_u(const GpFit& low_emulator, const Eigen::MatrixXd& x_high,
                     const Eigen::VectorXd& y_high, const CalibrationOptions& options) {
  return estimate_u(gp_predict_mean(low_emulator, x_high), x_high, y_high, options);
}

CalibrationResult loo_posterior(const GpFit& low_emulator, const Eigen::MatrixXd& x_high,
                                const Eigen::VectorXd& y_high,
                                const CalibrationOptions& options) {
  const Eigen::Index n = y_high.size();
  if (n < 3) throw DomainError("loo_posterior: need at least three high-fidelity points");
  if (x_high.rows() != n) throw DomainError("loo_posterior: inputs and outputs differ in length");
  const Eigen::VectorXd low_at_high = gp_predict_mean(low_emulator, x_high);

  CalibrationResult result;
  result.full = estimate_u(low_at_high, x_high, y_high, options);
  result.u_hat = result.full.u_hat;

  // Dropping one row moves the estimate little, so folds start in a window
  // around the full-data estimate.
  CalibrationOptions local = options;
  const USearch& full = options.search;
  const double lo = std::max(full.lo, result.u_hat - options.fold_window);
  const double hi = std::min(full.hi, result.u_hat + options.fold_window);
  const bool windowed = options.fold_window > 0.0 && options.fold_grid_points >= 3 && lo < hi;
  if (windowed) {
    local.search.lo = lo;
    local.search.hi = hi;
    local.search.grid_points = options.fold_grid_points;
  }
  const double edge = (hi - lo) / static_cast<double>(options.fold_grid_points - 1);

  for (Eigen::Index j = 0; j < n; ++j) {
    try {
      const Eigen::VectorXd low_j = drop_entry(low_at_high, j);
      const Eigen::MatrixXd x_j = drop_row(x_high, j);
      const Eigen::VectorXd y_j = drop_entry(y_high, j);
      UEstimate fold = estimate_u(low_j, x_j, y_j, windowed ? local : options);
      const bool at_edge = (fold.u_hat <= lo + edge && lo > full.lo) ||
                           (fold.u_hat >= hi - edge && hi < full.hi);
      if (windowed && at_edge) fold = estimate_u(low_j, x_j, y_j, options);
      result.loo_samples.push_back(fold.u_hat);
    } catch (const Error&) {
      result.failed_folds.push_back(j);
    }
  }

  const double needed = std::max(3.0, static_cast<double>(n) / 2.0);
  if (static_cast<double>(result.successful_folds()) < needed) {
    std::ostringstream msg;
    msg << "loo_posterior: only " << result.successful_folds() << " of " << n
        << " folds succeeded; first failed fold " << result.failed_folds.front();
    throw EstimationError(msg.str());
  }
  result.interval = {quantile(result.loo_samples, 0.025), quantile(result.loo_samples, 0.975)};
  result.discrepancy = fit_discrepancy_given_u(result.u_hat, low_at_high, x_high, y_high, options);
  return result;
}

double silverman_bandwidth(const std::vector<double>& samples) {
  if (samples.size() < 2) return 0.0;
  const double sd = stddev(samples);
  const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<double> sample_u_posterior(const CalibrationResult& result, int n_samples,
                                       const Seed& seed) {
  const auto& pool = result.loo_samples;
  if (pool.size() < 3) throw DomainError("sample_u_posterior: need at least three LOO samples");
  if (n_samples < 1) throw DomainError("sample_u_posterior: sample count must be positive");
  const double bw = silverman_bandwidth(pool);
  auto rng = seed.engine();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double base = pool[pick(rng)];
    out.push_back(base + bw * normal(rng));
  }
  return out;
}

}  // namespace mfcal
