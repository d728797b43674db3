#include "mfcal/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mfcal/errors.hpp"

namespace mfcal {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const NelderMeadOptions& options) {
  const Eigen::Index n = start.size();
  if (n == 0 || lower.size() != n || upper.size() != n)
    throw DomainError("nelder_mead: dimension mismatch");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  NelderMeadResult result;
  auto project = [&](Eigen::VectorXd x) {
    return x.cwiseMax(lower).cwiseMin(upper).eval();
  };
  auto eval = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  // Adaptive coefficients (Gao & Han) behave better than the classic ones past n = 2.
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 0.5 / dn;
  const double delta = 1.0 - 1.0 / dn;

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.reserve(static_cast<std::size_t>(n + 1));
  simplex.push_back(project(start));
  values.push_back(eval(simplex[0]));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = simplex[0];
    double step = options.initial_step.size() == n ? options.initial_step[i] : 0.5;
    if (v[i] + step > upper[i]) step = -step;
    v[i] += step;
    v = project(v);
    simplex.push_back(v);
    values.push_back(eval(v));
  }

  std::vector<std::size_t> order(simplex.size());
  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    double x_spread = 0.0;
    for (const auto& v : simplex)
      x_spread = std::max(x_spread, (v - simplex[best]).cwiseAbs().maxCoeff());
    const double f_spread = values[worst] - values[best];
    if (std::isfinite(values[best]) && f_spread <= options.f_tolerance &&
        x_spread <= options.x_tolerance) {
      result.converged = true;
      break;
    }
    if (x_spread == 0.0 || result.evaluations >= options.max_evaluations) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= dn;

    const Eigen::VectorXd xr = project(centroid + alpha * (centroid - simplex[worst]));
    const double fr = eval(xr);
    if (fr < values[best]) {
      const Eigen::VectorXd xe = project(centroid + beta * (xr - centroid));
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second_worst]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Eigen::VectorXd xc = outside ? project(centroid + gamma * (xr - centroid))
                                       : project(centroid - gamma * (centroid - simplex[worst]));
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = project(simplex[best] + delta * (simplex[i] - simplex[best]));
      values[i] = eval(simplex[i]);
    }
  }

  const auto it = std::min_element(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(it - values.begin());
  result.x = simplex[idx];
  result.value = *it;
  return result;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tolerance, const std::function<void(double, double)>& observe) {
  if (!(lo <= hi)) throw DomainError("golden_section_max: lo > hi");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto probe = [&](double x) {
    const double v = f(x);
    if (observe) observe(x, v);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };

  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = probe(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace mfcal
