#pragma once

#include <functional>

#include <Eigen/Dense>

namespace mfcal {

struct NelderMeadOptions {
  int max_evaluations = 1000;
  /// Stop when the spread of simplex values falls below this (absolute).
  double f_tolerance = 1e-9;
  /// ...and every vertex is within this distance of the best one (inf-norm).
  double x_tolerance = 1e-7;
  /// Initial simplex edge along each coordinate.
  Eigen::VectorXd initial_step;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Bound-constrained Nelder-Mead minimization. Trial points are projected onto
/// [lower, upper]; non-finite objective values count as +inf. The returned value
/// is never worse than the value at `start`.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const NelderMeadOptions& options);

/// Golden-section maximization of a unimodal function on [lo, hi].
/// `observe` sees every (x, f(x)) pair evaluated.
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tolerance,
                          const std::function<void(double, double)>& observe = {});

}  // namespace mfcal
