#include <doctest.h>

#include <cmath>

#include "mfcal/errors.hpp"
#include "mfcal/pipeline.hpp"
#include "mfcal/synthetic.hpp"

using namespace mfcal;

namespace {

ScenarioData small_scenario(const Seed& seed, double sigma, Eigen::Vector2d a_low) {
  QuadraticScenario sc = QuadraticScenario::illustrative(seed);
  sc.n_L = 60;
  sc.n_H = 12;
  sc.sigma_eps = sigma;
  sc.a_L = a_low;
  return generate_scenario(sc);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("calibrated outputs feed the model factory") {
  const ScenarioData data = small_scenario(Seed(1), 0.02, Eigen::Vector2d(-0.6, 0.2));
  PipelineOptions opts;
  const auto cal = calibrate_outputs(data.X_L, data.Y_L, data.X_H, data.Y_H, opts);
  REQUIRE(cal.size() == 1);
  CHECK(cal[0].result.loo_samples.size() == 12);
  CHECK(cal[0].low_emulator.mean().kind == MeanFunction::Kind::Constant);
  CHECK(cal[0].low_emulator.mean().value == doctest::Approx(data.Y_L.mean()));

  const ModelFactory factory = make_model_factory(cal, data.X_H, data.Y_H, opts.calibration);
  const auto a = factory(Eigen::VectorXd::Constant(1, 1.0001));
  const auto b = factory(Eigen::VectorXd::Constant(1, 1.0004));
  const auto c = factory(Eigen::VectorXd::Constant(1, 1.2));
  REQUIRE(a.size() == 1);
  CHECK(a[0].u() == 1.0001);
  CHECK(b[0].u() == 1.0004);
  CHECK(a[0].discrepancy().length_scales == b[0].discrepancy().length_scales);
  CHECK(a[0].noise_variance() == b[0].noise_variance());
  const DiscrepancyFit direct =
      fit_discrepancy_given_u(1.2, cal[0].low_emulator, data.X_H, data.Y_H, opts.calibration);
  CHECK(c[0].discrepancy().length_scales == direct.params().length_scales);
  CHECK_THROWS_AS(factory(Eigen::VectorXd::Ones(2)), DomainError);

  const Eigen::MatrixXd u = draw_u_samples(cal, 30, Seed(4));
  CHECK(u.rows() == 30);
  CHECK(u.cols() == 1);
  CHECK(u == draw_u_samples(cal, 30, Seed(4)));
}

TEST_CASE("high-only fit is the zero-scaling discrepancy") {
  const ScenarioData data = small_scenario(Seed(2), 0.02, Eigen::Vector2d(-0.6, 0.2));
  const CalibrationOptions opts;
  const GpFit high = fit_high_only(data.X_H, data.Y_H, opts);
  const DiscrepancyFit zero =
      fit_discrepancy_given_u(0.0, Eigen::VectorXd::Zero(data.Y_H.size()), data.X_H, data.Y_H, opts);
  CHECK(high.mean().kind == MeanFunction::Kind::Zero);
  CHECK(high.params().length_scales == zero.params().length_scales);
  CHECK(high.noise_variance() == zero.noise_variance());
}

TEST_CASE("mse study without a fidelity gap or noise") {
  ScenarioGenerator gen;
  gen.optimum = Eigen::Vector2d(-0.8, 0.4);
  gen.box = Box::cube(2, -1.0, 1.0);
  gen.generate = [](int j) {
    return small_scenario(Seed(100, {static_cast<std::uint64_t>(j)}), 0.0,
                          Eigen::Vector2d(-0.8, 0.4));
  };
  DecisionConfig cfg;
  cfg.N_u = 5;
  cfg.n_rep = 5;
  cfg.N = 100;
  cfg.box = gen.box;
  cfg.seed = Seed(9);
  int reported = 0;
  const MseStudyResult res =
      mse_study(gen, 2, cfg, PipelineOptions{}, [&](int, const MseStudyResult&) { ++reported; });
  CHECK(reported == 2);
  REQUIRE(res.datasets.size() == 2);
  CHECK(res.failures.empty());
  CHECK(res.multi_medians.rows() == 2);
  for (const Eigen::VectorXd* mse : {&res.mse_low, &res.mse_high, &res.mse_multi}) {
    REQUIRE(mse->size() == 2);
    CHECK(mse->maxCoeff() <= 0.01);
  }
}

}
