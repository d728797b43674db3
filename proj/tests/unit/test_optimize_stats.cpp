#include <doctest.h>

#include <cmath>
#include <limits>

#include "mfcal/optimize.hpp"
#include "mfcal/stats.hpp"

using namespace mfcal;

TEST_SUITE("optimize") {

TEST_CASE("nelder-mead finds a shifted quadratic bowl") {
  auto f = [](const Eigen::VectorXd& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 4.0 * (x[1] + 0.5) * (x[1] + 0.5);
  };
  NelderMeadOptions opts;
  opts.initial_step = Eigen::Vector2d(0.5, 0.5);
  const auto res = nelder_mead(f, Eigen::Vector2d(-2, 2), Eigen::Vector2d(-5, -5),
                               Eigen::Vector2d(5, 5), opts);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(res.x[1] == doctest::Approx(-0.5).epsilon(1e-3));
}

TEST_CASE("nelder-mead respects bounds and never worsens the start") {
  auto f = [](const Eigen::VectorXd& x) { return x[0]; };
  NelderMeadOptions opts;
  opts.initial_step = Eigen::VectorXd::Constant(1, 0.3);
  const auto res =
      nelder_mead(f, Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 0.0),
                  Eigen::VectorXd::Constant(1, 1.0), opts);
  CHECK(res.x[0] >= 0.0);
  CHECK(res.x[0] < 1e-6);

  auto hostile = [](const Eigen::VectorXd& x) {
    return x[0] == 0.25 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  };
  opts.max_evaluations = 30;
  const auto kept =
      nelder_mead(hostile, Eigen::VectorXd::Constant(1, 0.25), Eigen::VectorXd::Constant(1, 0.0),
                  Eigen::VectorXd::Constant(1, 1.0), opts);
  CHECK(kept.value == 1.0);
  CHECK(kept.x[0] == 0.25);
}

TEST_CASE("golden section locates an interior maximum") {
  int seen = 0;
  const double x = golden_section_max([](double u) { return -(u - 0.3) * (u - 0.3); }, -1.0, 2.0,
                                      1e-6, [&](double, double) { ++seen; });
  CHECK(x == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(seen > 10);
}

}

TEST_SUITE("stats") {

TEST_CASE("quantile and median conventions") {
  CHECK(median({1.0, 3.0}) == 2.0);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({10.0, 0.0}, 0.0) == 0.0);
  CHECK(quantile({10.0, 0.0}, 1.0) == 10.0);
  CHECK(quantile({0.0, 10.0}, 0.975) == doctest::Approx(9.75));
}

TEST_CASE("mean and sample standard deviation") {
  CHECK(mean({1.0, 2.0, 6.0}) == 3.0);
  CHECK(stddev({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(stddev({4.0}) == 0.0);
}

}
