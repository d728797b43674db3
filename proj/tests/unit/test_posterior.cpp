#include <doctest.h>

#include <numeric>
#include <random>

#include "mf_oracle.hpp"
#include "mfcal/errors.hpp"
#include "mfcal/posterior.hpp"

using namespace mfcal;

TEST_SUITE("posterior") {

TEST_CASE("joint blocks match the elementwise construction") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::ToyInstance t = oracle::random_toy(rng, 3, 2, 0, 2);
    const JointPrior joint = assemble_joint(t.model());
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    oracle::toy_joint(t, mean, cov, false);
    CHECK((joint.mean - mean).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((joint.cov - cov).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("u = 0 decouples the fidelities") {
  std::mt19937_64 rng(2);
  oracle::ToyInstance t = oracle::random_toy(rng, 4, 3, 0, 2);
  t.u = 0.0;
  const JointPrior joint = assemble_joint(t.model());
  CHECK(joint.cov.block(0, 4, 4, 3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(joint.cov.block(4, 0, 3, 4).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd high =
      oracle::gram(t.disc, t.x_high, t.x_high) + t.noise * Eigen::MatrixXd::Identity(3, 3);
  CHECK((joint.cov.block(4, 4, 3, 3) - high).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(joint.mean.tail(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identical processes share their covariance") {
  std::mt19937_64 rng(3);
  oracle::ToyInstance t = oracle::random_toy(rng, 5, 0, 0, 2);
  t.x_high = t.x_low.topRows(2);
  t.y_high = t.y_low.head(2);
  t.u = 1.0;
  t.low_noise = 0.0;
  t.noise = 0.0;
  // Zero discrepancy is not a valid kernel; a vanishing variance stands in for it.
  t.disc.variance = 1e-300;
  const MultiFidelityModel model = t.model();
  const JointPrior joint = assemble_joint(model);
  const Eigen::MatrixXd expected = joint.cov.block(0, 0, 2, 2);
  const Eigen::MatrixXd high = joint.cov.block(5, 5, 2, 2);
  CHECK((high - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("prediction matches brute-force latent conditioning") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const oracle::ToyInstance t = oracle::random_toy(rng, 3, 2, 2, 1 + trial % 3);
    const PosteriorPredictive pred = predict_high(t.model(), t.x_cand);
    const oracle::Conditional ref = oracle::toy_conditional(t);
    CHECK((pred.mean - ref.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pred.cov - ref.cov).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pred.cov - pred.cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(pred.cov.diagonal().minCoeff() >= 0.0);
  }
}

TEST_CASE("prediction interpolates a noise-free high-fidelity point") {
  std::mt19937_64 rng(5);
  oracle::ToyInstance t = oracle::random_toy(rng, 6, 3, 0, 2);
  t.noise = 1e-12;
  t.low_noise = 1e-10;
  const PosteriorPredictive pred = predict_high(t.model(), t.x_high.topRows(1));
  CHECK(std::abs(pred.mean[0] - t.y_high[0]) <= 1e-4);
}

TEST_CASE("prediction reverts to the scaled prior far from data") {
  std::mt19937_64 rng(6);
  const oracle::ToyInstance t = oracle::random_toy(rng, 6, 3, 0, 2);
  Eigen::MatrixXd far(1, 2);
  far << 80.0, -90.0;
  const PosteriorPredictive pred = predict_high(t.model(), far);
  CHECK(std::abs(pred.mean[0] - t.u * t.low_mean) <= 1e-6);
  CHECK(std::abs(pred.cov(0, 0) - (t.u * t.u * t.low.variance + t.disc.variance)) <= 1e-6);
}

TEST_CASE("conditioning never raises the variance") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::ToyInstance t = oracle::random_toy(rng, 8, 5, 10, 2);
    const PosteriorPredictive pred = predict_high(t.model(), t.x_cand);
    const double prior = t.u * t.u * t.low.variance + t.disc.variance;
    CHECK(pred.cov.diagonal().maxCoeff() <= prior + 1e-8);
    CHECK(pred.prior_scale == doctest::Approx(prior));
  }
}

TEST_CASE("without high-fidelity data the prediction is the scaled emulator") {
  std::mt19937_64 rng(8);
  oracle::ToyInstance t = oracle::random_toy(rng, 7, 0, 4, 2);
  t.x_high.resize(0, 2);
  t.y_high.resize(0);
  const MultiFidelityModel model = t.model();
  const PosteriorPredictive pred = predict_high(model, t.x_cand);
  const PosteriorPredictive low = gp_predict(model.low_emulator(), t.x_cand);
  CHECK((pred.mean - t.u * low.mean).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd expected = t.u * t.u * low.cov + oracle::gram(t.disc, t.x_cand, t.x_cand);
  CHECK((pred.cov - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("joint is equivariant under permuting the low-fidelity rows") {
  std::mt19937_64 rng(9);
  const oracle::ToyInstance t = oracle::random_toy(rng, 6, 3, 0, 2);
  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  oracle::ToyInstance p = t;
  for (int i = 0; i < 6; ++i) {
    p.x_low.row(i) = t.x_low.row(perm[i]);
    p.y_low[i] = t.y_low[perm[i]];
  }
  const JointPrior a = assemble_joint(t.model());
  const JointPrior b = assemble_joint(p.model());
  std::vector<int> full(9);
  for (int i = 0; i < 6; ++i) full[i] = perm[i];
  for (int i = 6; i < 9; ++i) full[i] = i;
  for (int i = 0; i < 9; ++i) {
    CHECK(b.mean[i] == a.mean[full[i]]);
    for (int j = 0; j < 9; ++j) CHECK(b.cov(i, j) == doctest::Approx(a.cov(full[i], full[j])).epsilon(1e-14));
  }
  const PosteriorPredictive pa = predict_high(t.model(), t.x_high);
  const PosteriorPredictive pb = predict_high(p.model(), t.x_high);
  CHECK((pa.mean - pb.mean).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("multi-output prediction is per-output prediction") {
  std::mt19937_64 rng(10);
  std::vector<MultiFidelityModel> models;
  std::vector<oracle::ToyInstance> toys;
  for (int k = 0; k < 4; ++k) {
    toys.push_back(oracle::random_toy(rng, 5, 3, 0, 2));
    models.push_back(toys.back().model());
  }
  const Eigen::MatrixXd x = oracle::random_toy(rng, 1, 1, 6, 2).x_cand;
  const auto multi = predict_high_multi(models, x);
  REQUIRE(multi.size() == 4);
  for (int k = 0; k < 4; ++k) {
    const PosteriorPredictive single = predict_high(models[k], x);
    CHECK(multi[k].mean == single.mean);
    CHECK(multi[k].cov == single.cov);
  }
  const auto twin = predict_high_multi({models[0], models[0]}, x);
  CHECK(twin[0].mean == twin[1].mean);
  CHECK(twin[0].cov == twin[1].cov);

  const oracle::ToyInstance other = oracle::random_toy(rng, 5, 3, 0, 3);
  CHECK_THROWS_AS(predict_high_multi({models[0], other.model()}, x), DomainError);
  CHECK_THROWS_AS(predict_high(models[0], Eigen::MatrixXd::Zero(2, 3)), DomainError);
}

}
