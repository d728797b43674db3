#pragma once

// Synthetic two-fidelity datasets with known truth: shifted quadratics in two
// inputs, and full second-order polynomials standing in for fitted response
// surfaces.

#include <functional>

#include <Eigen/Dense>

#include "mfcal/design.hpp"

namespace mfcal {

using TruthFunction = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Paired low/high-fidelity samples for one output.
struct ScenarioData {
  Eigen::MatrixXd X_L;
  Eigen::VectorXd Y_L;
  Eigen::MatrixXd X_H;
  Eigen::VectorXd Y_H;
  TruthFunction truth_low;
  TruthFunction truth_high;
};

/// y_L(x) = |x - a_L|^2, y_H(x) = |x - a_H|^2, Y_H = y_H + N(0, sigma_eps^2).
struct QuadraticScenario {
  Eigen::VectorXd a_L;
  Eigen::VectorXd a_H;
  Eigen::Index n_L = 200;
  Eigen::Index n_H = 50;
  double sigma_eps = 0.02;
  Box box;
  Seed seed;

  /// a_L = (-0.6, 0.2), a_H = (-0.8, 0.4), n_L = 200, n_H = 50,
  /// sigma_eps = 0.02 on [-1, 1]^2.
  static QuadraticScenario illustrative(const Seed& seed = Seed(2025));

  void validate() const;
};

/// X_L and X_H are independent Latin hypercubes; Y_L is noise-free.
ScenarioData generate_scenario(const QuadraticScenario& sc);

/// c + b'x + sum_{i <= j} A_ij x_i x_j (only the upper triangle of A is read).
struct QuadraticPolynomial {
  double intercept = 0.0;
  Eigen::VectorXd linear;
  Eigen::MatrixXd quadratic;

  explicit QuadraticPolynomial(Eigen::Index d = 4);

  Eigen::Index dim() const { return linear.size(); }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  QuadraticPolynomial scaled(double factor) const;
  QuadraticPolynomial plus(const QuadraticPolynomial& other) const;

  /// Expansion of  c + sum_i h_i ((x_i - m_i) / w_i)^2
  ///             + sum_{i<j} h_ij ((x_i - m_i) / w_i)((x_j - m_j) / w_j)  into raw coefficients.
  static QuadraticPolynomial centered(double c, const Eigen::VectorXd& center,
                                      const Eigen::VectorXd& half_width,
                                      const Eigen::VectorXd& curvature,
                                      const Eigen::MatrixXd& interaction);
};

struct PolynomialScenario {
  QuadraticPolynomial low;
  QuadraticPolynomial high;
  Eigen::Index n_L = 200;
  Eigen::Index n_H = 50;
  double noise_sd = 0.1;
  Box box;
  Seed seed;

  /// Cure-cycle style surrogate over (T1, T2, t1, t2): the low fidelity is a
  /// degree-of-cure-like bowl, the high fidelity is ten times it plus a small
  /// linear discrepancy.
  static PolynomialScenario cure_surrogate(const Seed& seed = Seed(2025));

  void validate() const;
};

ScenarioData polynomial_surrogate_scenario(const PolynomialScenario& sc);

}  // namespace mfcal
