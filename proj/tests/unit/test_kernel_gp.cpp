#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "mfcal/errors.hpp"
#include "mfcal/gp.hpp"
#include "mfcal/kernel.hpp"
#include "mfcal/synthetic.hpp"
#include "oracles.hpp"

using namespace mfcal;

namespace {

Eigen::MatrixXd uniform_points(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng, double lo = -1,
                               double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
  return x;
}

KernelParams random_params(Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.0);
  Eigen::VectorXd ls(d);
  for (Eigen::Index j = 0; j < d; ++j) ls[j] = std::exp(u(rng));
  return KernelParams(std::exp(u(rng)), ls);
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("kernel examples") {
  const Eigen::Vector2d p(0.3, -0.7);
  CHECK(kernel_eval(KernelParams(1.0, Eigen::Vector2d(1, 1)), p, p) == 1.0);
  CHECK(kernel_eval(KernelParams(2.0, Eigen::Vector2d(1, 1)), Eigen::Vector2d(0, 0),
                    Eigen::Vector2d(1, 0)) == doctest::Approx(1.21306).epsilon(1e-5));
  CHECK(kernel_eval(KernelParams(1.0, Eigen::Vector2d(2, 1)), Eigen::Vector2d(2, 0),
                    Eigen::Vector2d(0, 0)) == doctest::Approx(0.60653).epsilon(1e-5));
}

TEST_CASE("kernel matrix shapes and elementwise agreement") {
  std::mt19937_64 rng(3);
  const KernelParams params = random_params(3, rng);
  const Eigen::MatrixXd a = uniform_points(3, 3, rng);
  const Eigen::MatrixXd b = uniform_points(2, 3, rng);
  const Eigen::MatrixXd k = kernel_matrix(params, a, b);
  REQUIRE(k.rows() == 3);
  REQUIRE(k.cols() == 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(k(i, j) == doctest::Approx(oracle::se_kernel(params, a.row(i).transpose(),
                                                          b.row(j).transpose()))
                           .epsilon(1e-14));
  const Eigen::MatrixXd one = kernel_matrix(params, a.topRows(1), a.topRows(1));
  CHECK(one(0, 0) == params.variance);
}

TEST_CASE("kernel dimension and parameter errors") {
  const KernelParams params(1.0, Eigen::Vector2d(1, 1));
  CHECK_THROWS_AS(kernel_eval(params, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()), DomainError);
  CHECK_THROWS_AS(kernel_matrix(params, Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 3)),
                  DomainError);
  CHECK_THROWS_AS(KernelParams(0.0, Eigen::Vector2d(1, 1)).validate(), DomainError);
  CHECK_THROWS_AS(KernelParams(1.0, Eigen::Vector2d(1, -1)).validate(), DomainError);
}

TEST_CASE("kernel symmetry, diagonal and PSD on random point sets") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(1, 4), nn(1, 12);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = nd(rng);
    const KernelParams params = random_params(d, rng);
    const Eigen::MatrixXd a = uniform_points(nn(rng), d, rng);
    const Eigen::MatrixXd k = kernel_matrix(params, a, a);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((k.diagonal().array() == params.variance).all());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

}

TEST_SUITE("gp") {

TEST_CASE("log marginal likelihood closed forms") {
  const GpFit one(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), MeanFunction::zero(),
                  KernelParams(1.0, Eigen::VectorXd::Ones(1)), 0.0);
  CHECK(log_marginal_likelihood(one) == doctest::Approx(-0.91894).epsilon(1e-5));

  // Two points far apart: K + noise*I is the identity to double precision.
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 100.0;
  const GpFit two(x, Eigen::Vector2d(1.0, 1.0), MeanFunction::zero(),
                  KernelParams(1.0, Eigen::VectorXd::Ones(1)), 0.0);
  CHECK(log_marginal_likelihood(two) == doctest::Approx(-1.0 - std::log(2 * std::numbers::pi)));
  CHECK(log_marginal_likelihood(two) == doctest::Approx(-2.83788).epsilon(1e-5));
}

TEST_CASE("log marginal likelihood matches a dense-inverse evaluation") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 1 + trial % 3;
    const int n = 2 + trial % 9;
    const Eigen::MatrixXd x = uniform_points(n, d, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = normal(rng);
    const KernelParams params = random_params(d, rng);
    const double noise = 0.05 + 0.1 * (trial % 4);
    const MeanFunction mean = trial % 2 ? MeanFunction::constant(0.3) : MeanFunction::zero();
    const GpFit fit(x, y, mean, params, noise);
    const Eigen::MatrixXd c =
        oracle::gram(params, x, x) + noise * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd r = y - mean.evaluate(x);
    CHECK(std::abs(log_marginal_likelihood(fit) - oracle::dense_log_density(r, c)) < 1e-8);
  }
}

TEST_CASE("log marginal likelihood is permutation invariant") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = uniform_points(9, 2, rng);
  Eigen::VectorXd y(9);
  for (int i = 0; i < 9; ++i) y[i] = std::sin(3 * x(i, 0)) + x(i, 1);
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd xp(9, 2);
  Eigen::VectorXd yp(9);
  for (int i = 0; i < 9; ++i) {
    xp.row(i) = x.row(perm[i]);
    yp[i] = y[perm[i]];
  }
  const KernelParams params(1.3, Eigen::Vector2d(0.4, 0.8));
  const GpFit a(x, y, MeanFunction::sample_mean(y), params, 1e-4);
  const GpFit b(xp, yp, MeanFunction::sample_mean(yp), params, 1e-4);
  CHECK(log_marginal_likelihood(a) == doctest::Approx(log_marginal_likelihood(b)).epsilon(1e-12));
}

TEST_CASE("cached factor and weights reproduce the covariance solve") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = uniform_points(12, 2, rng);
  const Eigen::VectorXd y = x.col(0).array().square() + x.col(1).array();
  const GpFit fit(x, y, MeanFunction::constant(0.1), KernelParams(2.0, Eigen::Vector2d(0.5, 0.7)),
                  1e-3);
  const Eigen::MatrixXd c = oracle::gram(fit.params(), x, x) + 1e-3 * Eigen::MatrixXd::Identity(12, 12);
  CHECK((fit.covariance() - c).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd w = c.inverse() * (y.array() - 0.1).matrix();
  CHECK((fit.weights() - w).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("prediction interpolates noise-free training points") {
  std::mt19937_64 rng(21);
  const Eigen::MatrixXd x = uniform_points(8, 2, rng);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) y[i] = std::cos(2 * x(i, 0)) * x(i, 1);
  const GpFit fit(x, y, MeanFunction::zero(), KernelParams(1.0, Eigen::Vector2d(0.6, 0.6)), 0.0);
  const PosteriorPredictive pred = gp_predict(fit, x);
  CHECK((pred.mean - y).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(pred.cov.diagonal().maxCoeff() <= 1e-8);
  CHECK(pred.cov.diagonal().minCoeff() >= -1e-10);
}

TEST_CASE("prediction reverts to the prior far from data") {
  std::mt19937_64 rng(22);
  const Eigen::MatrixXd x = uniform_points(6, 2, rng);
  const Eigen::VectorXd y = x.rowwise().sum();
  const GpFit fit(x, y, MeanFunction::constant(0.7), KernelParams(1.9, Eigen::Vector2d(0.3, 0.5)),
                  1e-6);
  Eigen::MatrixXd far(2, 2);
  far << 50.0, 50.0, -40.0, 60.0;
  const PosteriorPredictive pred = gp_predict(fit, far);
  CHECK((pred.mean.array() - 0.7).abs().maxCoeff() < 1e-6);
  CHECK((pred.cov.diagonal().array() - 1.9).abs().maxCoeff() < 1e-6);
  CHECK(std::abs(pred.cov(0, 1)) < 1e-6);
}

TEST_CASE("prediction matches brute-force joint conditioning") {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = uniform_points(3, 2, rng);
    const Eigen::MatrixXd xs = uniform_points(2, 2, rng);
    const Eigen::VectorXd y = Eigen::Vector3d(0.2, -1.0, 0.5) * (1 + trial);
    const KernelParams params = random_params(2, rng);
    const double noise = trial % 2 ? 0.01 : 0.2;
    const double c = -0.4;
    const GpFit fit(x, y, MeanFunction::constant(c), params, noise);

    Eigen::MatrixXd all(5, 2);
    all << x, xs;
    Eigen::MatrixXd s = oracle::gram(params, all, all);
    for (int i = 0; i < 3; ++i) s(i, i) += noise;
    const auto cond = oracle::condition(Eigen::VectorXd::Constant(5, c), s, 3, y);

    const PosteriorPredictive pred = gp_predict(fit, xs);
    CHECK((pred.mean - cond.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pred.cov - cond.cov).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pred.cov - pred.cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gp_predict_mean(fit, xs) - pred.mean).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("predictive variance never exceeds the prior variance") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd x = uniform_points(10, 3, rng);
    const Eigen::VectorXd y = x.col(0) - x.col(2);
    const KernelParams params = random_params(3, rng);
    const GpFit fit(x, y, MeanFunction::zero(), params, 1e-6);
    const PosteriorPredictive pred = gp_predict(fit, uniform_points(15, 3, rng, -2, 2));
    CHECK(pred.cov.diagonal().maxCoeff() <= params.variance + 1e-8);
    CHECK(pred.cov.diagonal().minCoeff() >= -1e-10);
  }
}

TEST_CASE("prediction rejects a dimension mismatch") {
  const GpFit fit(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1), MeanFunction::zero(),
                  KernelParams(1.0, Eigen::Vector2d(1, 1)), 0.0);
  CHECK_THROWS_AS(gp_predict(fit, Eigen::MatrixXd::Zero(1, 3)), DomainError);
  CHECK_THROWS_AS(GpFit(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(3), MeanFunction::zero(),
                        KernelParams(1.0, Eigen::Vector2d(1, 1)), 0.0),
                  DomainError);
}

TEST_CASE("mle improves on every multistart") {
  std::mt19937_64 rng(41);
  const Eigen::MatrixXd x = uniform_points(25, 2, rng);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) y[i] = std::sin(2 * x(i, 0)) + 0.5 * x(i, 1) * x(i, 1);
  for (const NoiseModel& noise : {NoiseModel::fixed(1e-8), NoiseModel::estimated()}) {
    MleTrace trace;
    const GpFit fit = fit_gp_mle(x, y, MeanFunction::sample_mean(y), noise, Seed(9), {}, &trace);
    REQUIRE(trace.starts.size() == 8);
    for (const MleStart& s : trace.starts) {
      CHECK(s.final_log_likelihood >= s.initial_log_likelihood - 1e-9);
      CHECK(trace.best_log_likelihood >= s.initial_log_likelihood - 1e-9);
    }
    const double fitted = log_marginal_likelihood(fit);
    CHECK(fitted == doctest::Approx(trace.best_log_likelihood).epsilon(1e-4));
    for (const MleStart& s : trace.starts) CHECK(fitted >= s.initial_log_likelihood);
  }
}

TEST_CASE("mle on constant outputs beats hand-set parameters") {
  std::mt19937_64 rng(42);
  const Eigen::MatrixXd x = uniform_points(12, 2, rng);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 2.5);
  const GpFit fit =
      fit_gp_mle(x, y, MeanFunction::constant(2.5), NoiseModel::fixed(1e-6), Seed(1));
  const double best = log_marginal_likelihood(fit);
  for (double v : {1e-3, 1.0, 10.0})
    for (double l : {0.1, 1.0, 5.0}) {
      const GpFit hand(x, y, MeanFunction::constant(2.5), KernelParams(v, Eigen::Vector2d(l, l)), 1e-6);
      CHECK(best >= log_marginal_likelihood(hand) - 1e-9);
    }
}

TEST_CASE("mle recovers length-scales of a known process") {
  const Box box = Box::cube(2, 0.0, 2.0);
  const Eigen::MatrixXd x = lhd_sample(200, box, Seed(314));
  const KernelParams truth(1.0, Eigen::Vector2d(0.5, 0.5));
  const Eigen::MatrixXd k = oracle::gram(truth, x, x) + 1e-8 * Eigen::MatrixXd::Identity(200, 200);
  const Eigen::VectorXd y = mvn_sample(Eigen::VectorXd::Zero(200), k, Seed(315));
  const GpFit fit = fit_gp_mle(x, y, MeanFunction::zero(), NoiseModel::fixed(1e-8), Seed(316));
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(std::log(fit.params().length_scales[i]) - std::log(0.5)) < 0.3);
}

TEST_CASE("low-fidelity emulator predicts the illustrative quadratic") {
  const ScenarioData data = generate_scenario(QuadraticScenario::illustrative());
  const GpFit fit = fit_gp_mle(data.X_L, data.Y_L, MeanFunction::sample_mean(data.Y_L),
                               NoiseModel::fixed(1e-10), Seed(2));
  const Eigen::MatrixXd test = lhd_sample(50, Box::cube(2, -1.0, 1.0), Seed(3));
  const Eigen::VectorXd pred = gp_predict_mean(fit, test);
  double sse = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double e = pred[i] - data.truth_low(test.row(i).transpose());
    sse += e * e;
  }
  CHECK(std::sqrt(sse / 50.0) <= 0.05);
}

TEST_CASE("mle input validation") {
  CHECK_THROWS_AS(fit_gp_mle(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1),
                             MeanFunction::zero(), NoiseModel::estimated(), Seed(1)),
                  DomainError);
  CHECK_THROWS_AS(NoiseModel::fixed(-1.0), DomainError);
}

TEST_CASE("gaussian log density") {
  CHECK(gaussian_log_density(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)) ==
        doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  CHECK(std::isinf(gaussian_log_density(Eigen::Vector2d(1, 1), bad)));
}

}
