#include "mfcal/synthetic.hpp"

#include <cmath>

#include "mfcal/errors.hpp"

namespace mfcal {

namespace {

Eigen::VectorXd evaluate_rows(const TruthFunction& f, const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = f(x.row(i).transpose());
  return y;
}

// Stream labels for the three independent draws of a scenario.
constexpr std::uint64_t kLowDesign = 1;
constexpr std::uint64_t kHighDesign = 2;
constexpr std::uint64_t kHighNoise = 3;

Eigen::VectorXd noise(Eigen::Index n, double sd, const Seed& seed) {
  if (sd == 0.0) return Eigen::VectorXd::Zero(n);
  return sd * standard_normal(n, seed);
}

}  // namespace

QuadraticScenario QuadraticScenario::illustrative(const Seed& seed) {
  QuadraticScenario sc;
  sc.a_L = Eigen::Vector2d(-0.6, 0.2);
  sc.a_H = Eigen::Vector2d(-0.8, 0.4);
  sc.n_L = 200;
  sc.n_H = 50;
  sc.sigma_eps = 0.02;
  sc.box = Box::cube(2, -1.0, 1.0);
  sc.seed = seed;
  return sc;
}

void QuadraticScenario::validate() const {
  box.validate();
  if (a_L.size() != box.dim() || a_H.size() != box.dim())
    throw DomainError("scenario: minima dimension does not match box");
  if (!box.contains(a_L) || !box.contains(a_H))
    throw DomainError("scenario: minima must lie inside the box");
  if (n_L < 1 || n_H < 1) throw DomainError("scenario: sample sizes must be positive");
  if (!(sigma_eps >= 0.0)) throw DomainError("scenario: noise sd must be >= 0");
}

ScenarioData generate_scenario(const QuadraticScenario& sc) {
  sc.validate();
  ScenarioData data;
  const Eigen::VectorXd a_L = sc.a_L;
  const Eigen::VectorXd a_H = sc.a_H;
  data.truth_low = [a_L](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return (x - a_L).squaredNorm();
  };
  data.truth_high = [a_H](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return (x - a_H).squaredNorm();
  };
  data.X_L = lhd_sample(sc.n_L, sc.box, sc.seed.child(kLowDesign));
  data.Y_L = evaluate_rows(data.truth_low, data.X_L);
  data.X_H = lhd_sample(sc.n_H, sc.box, sc.seed.child(kHighDesign));
  data.Y_H = evaluate_rows(data.truth_high, data.X_H) +
             noise(sc.n_H, sc.sigma_eps, sc.seed.child(kHighNoise));
  return data;
}

QuadraticPolynomial::QuadraticPolynomial(Eigen::Index d)
    : linear(Eigen::VectorXd::Zero(d)), quadratic(Eigen::MatrixXd::Zero(d, d)) {}

double QuadraticPolynomial::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) throw DomainError("polynomial: point dimension mismatch");
  double v = intercept + linear.dot(x);
  for (Eigen::Index i = 0; i < dim(); ++i)
    for (Eigen::Index j = i; j < dim(); ++j) v += quadratic(i, j) * x[i] * x[j];
  return v;
}

QuadraticPolynomial QuadraticPolynomial::scaled(double factor) const {
  QuadraticPolynomial out(*this);
  out.intercept *= factor;
  out.linear *= factor;
  out.quadratic *= factor;
  return out;
}

QuadraticPolynomial QuadraticPolynomial::plus(const QuadraticPolynomial& other) const {
  if (other.dim() != dim()) throw DomainError("polynomial: dimension mismatch");
  QuadraticPolynomial out(*this);
  out.intercept += other.intercept;
  out.linear += other.linear;
  out.quadratic += other.quadratic;
  return out;
}

QuadraticPolynomial QuadraticPolynomial::centered(double c, const Eigen::VectorXd& center,
                                                  const Eigen::VectorXd& half_width,
                                                  const Eigen::VectorXd& curvature,
                                                  const Eigen::MatrixXd& interaction) {
  const Eigen::Index d = center.size();
  if (half_width.size() != d || curvature.size() != d || interaction.rows() != d ||
      interaction.cols() != d)
    throw DomainError("polynomial: inconsistent coefficient dimensions");
  // z_i = (x_i - m_i) / w_i = s_i x_i - s_i m_i with s_i = 1 / w_i.
  QuadraticPolynomial p(d);
  p.intercept = c;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double s = 1.0 / half_width[i];
    const double h = curvature[i];
    p.quadratic(i, i) += h * s * s;
    p.linear[i] += -2.0 * h * s * s * center[i];
    p.intercept += h * s * s * center[i] * center[i];
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double h = interaction(i, j);
      if (h == 0.0) continue;
      const double si = 1.0 / half_width[i];
      const double sj = 1.0 / half_width[j];
      p.quadratic(i, j) += h * si * sj;
      p.linear[i] += -h * si * sj * center[j];
      p.linear[j] += -h * si * sj * center[i];
      p.intercept += h * si * sj * center[i] * center[j];
    }
  }
  return p;
}

PolynomialScenario PolynomialScenario::cure_surrogate(const Seed& seed) {
  // (T1 [C], T2 [C], t1 [min], t2 [min])
  const Eigen::Vector4d lower(90.0, 150.0, 30.0, 60.0);
  const Eigen::Vector4d upper(130.0, 190.0, 90.0, 240.0);
  const Eigen::Vector4d center(112.0, 165.0, 55.0, 160.0);
  const Eigen::Vector4d half_width = 0.5 * (upper - lower);

  Eigen::MatrixXd interaction = Eigen::MatrixXd::Zero(4, 4);
  interaction(0, 2) = 0.05;
  const QuadraticPolynomial low = QuadraticPolynomial::centered(
      0.4, center, half_width, Eigen::Vector4d(0.25, 0.2, 0.15, 0.15), interaction);

  QuadraticPolynomial discrepancy(4);
  discrepancy.linear[1] = 0.15 / half_width[1];
  discrepancy.linear[3] = -0.1 / half_width[3];
  discrepancy.intercept = -discrepancy.linear.dot(center);

  PolynomialScenario sc;
  sc.low = low;
  sc.high = low.scaled(10.0).plus(discrepancy);
  sc.n_L = 200;
  sc.n_H = 50;
  sc.noise_sd = 0.1;
  sc.box = Box(lower, upper);
  sc.seed = seed;
  return sc;
}

void PolynomialScenario::validate() const {
  box.validate();
  if (low.dim() != box.dim() || high.dim() != box.dim())
    throw DomainError("polynomial scenario: coefficient dimension does not match box");
  if (n_L < 1 || n_H < 1) throw DomainError("polynomial scenario: sample sizes must be positive");
  if (!(noise_sd >= 0.0)) throw DomainError("polynomial scenario: noise sd must be >= 0");
}

ScenarioData polynomial_surrogate_scenario(const PolynomialScenario& sc) {
  sc.validate();
  ScenarioData data;
  data.truth_low = [p = sc.low](const Eigen::Ref<const Eigen::VectorXd>& x) { return p(x); };
  data.truth_high = [p = sc.high](const Eigen::Ref<const Eigen::VectorXd>& x) { return p(x); };
  data.X_L = lhd_sample(sc.n_L, sc.box, sc.seed.child(kLowDesign));
  data.Y_L = evaluate_rows(data.truth_low, data.X_L);
  data.X_H = lhd_sample(sc.n_H, sc.box, sc.seed.child(kHighDesign));
  data.Y_H = evaluate_rows(data.truth_high, data.X_H) +
             noise(sc.n_H, sc.noise_sd, sc.seed.child(kHighNoise));
  return data;
}

}  // namespace mfcal
