#pragma once

// Elementwise construction of the two-fidelity joint Gaussian, optionally
// extended with latent high-fidelity values at candidate points.

#include <random>

#include <Eigen/Dense>

#include "mfcal/posterior.hpp"
#include "oracles.hpp"

namespace oracle {

struct ToyInstance {
  mfcal::KernelParams low;
  double low_noise = 0.0;
  double low_mean = 0.0;
  double u = 1.0;
  mfcal::KernelParams disc;
  double noise = 0.0;
  Eigen::MatrixXd x_low;
  Eigen::VectorXd y_low;
  Eigen::MatrixXd x_high;
  Eigen::VectorXd y_high;
  Eigen::MatrixXd x_cand;

  mfcal::MultiFidelityModel model() const {
    mfcal::GpFit emulator(x_low, y_low, mfcal::MeanFunction::constant(low_mean), low, low_noise);
    return mfcal::MultiFidelityModel(std::move(emulator), u, disc, noise, x_high, y_high);
  }
};

inline ToyInstance random_toy(std::mt19937_64& rng, Eigen::Index n_low, Eigen::Index n_high,
                              Eigen::Index n_cand, Eigen::Index d) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> log_scale(-1.0, 0.7);
  auto points = [&](Eigen::Index n) {
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = unit(rng);
    return x;
  };
  auto params = [&] {
    Eigen::VectorXd ls(d);
    for (Eigen::Index j = 0; j < d; ++j) ls[j] = std::exp(log_scale(rng));
    return mfcal::KernelParams(std::exp(log_scale(rng)), ls);
  };
  ToyInstance t;
  t.low = params();
  t.disc = params();
  t.low_noise = 1e-3 * std::exp(2.0 * unit(rng));
  t.noise = 1e-2 * std::exp(2.0 * unit(rng));
  t.low_mean = unit(rng);
  t.u = 2.0 * unit(rng);
  t.x_low = points(n_low);
  t.x_high = points(n_high);
  t.x_cand = points(n_cand);
  t.y_low.resize(n_low);
  t.y_high.resize(n_high);
  for (Eigen::Index i = 0; i < n_low; ++i) t.y_low[i] = 2.0 * unit(rng);
  for (Eigen::Index i = 0; i < n_high; ++i) t.y_high[i] = 2.0 * unit(rng);
  return t;
}

/// Joint mean and covariance of (Y_L, Y_H, y_H(X_cand)), entry by entry.
inline void toy_joint(const ToyInstance& t, Eigen::VectorXd& mean, Eigen::MatrixXd& cov,
                      bool with_latent) {
  const Eigen::Index nl = t.x_low.rows(), nh = t.x_high.rows();
  const Eigen::Index nc = with_latent ? t.x_cand.rows() : 0;
  const Eigen::Index n = nl + nh + nc;
  // kind 0 = low observation, 1 = high observation, 2 = latent high value
  auto kind = [&](Eigen::Index i) { return i < nl ? 0 : (i < nl + nh ? 1 : 2); };
  auto point = [&](Eigen::Index i) -> Eigen::VectorXd {
    if (i < nl) return t.x_low.row(i).transpose();
    if (i < nl + nh) return t.x_high.row(i - nl).transpose();
    return t.x_cand.row(i - nl - nh).transpose();
  };
  mean.resize(n);
  cov.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mean[i] = kind(i) == 0 ? t.low_mean : t.u * t.low_mean;
    for (Eigen::Index j = 0; j < n; ++j) {
      const int a = kind(i), b = kind(j);
      const Eigen::VectorXd p = point(i), q = point(j);
      const double kl = se_kernel(t.low, p, q);
      double v = 0.0;
      if (a == 0 && b == 0) {
        v = kl + (i == j ? t.low_noise : 0.0);
      } else if (a == 0 || b == 0) {
        v = t.u * kl;
      } else {
        v = t.u * t.u * kl + se_kernel(t.disc, p, q);
        if (a == 1 && b == 1 && i == j) v += t.noise;
      }
      cov(i, j) = v;
    }
  }
}

/// Conditional of the latent block given both observation sets, by explicit inverse.
inline Conditional toy_conditional(const ToyInstance& t) {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  toy_joint(t, mean, cov, true);
  Eigen::VectorXd y(t.y_low.size() + t.y_high.size());
  y << t.y_low, t.y_high;
  return condition(mean, cov, y.size(), y);
}

}  // namespace oracle
