#include "mfcal/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mfcal/errors.hpp"

namespace mfcal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Seed Seed::child(std::uint64_t label) const {
  auto labels = labels_;
  labels.push_back(label);
  return Seed(root_, std::move(labels));
}

Seed Seed::child(std::initializer_list<std::uint64_t> labels) const {
  auto out = labels_;
  out.insert(out.end(), labels.begin(), labels.end());
  return Seed(root_, std::move(out));
}

std::uint64_t Seed::digest() const {
  // Length is folded in so that {} and {0} differ.
  std::uint64_t h = splitmix64(root_ ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(labels_.size()));
  for (std::uint64_t label : labels_) h = splitmix64(h ^ splitmix64(label));
  return h;
}

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  validate();
}

Box Box::cube(Eigen::Index d, double lo, double hi) {
  return Box(Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi));
}

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) return false;
  return ((x.array() >= lower.array()) && (x.array() <= upper.array())).all();
}

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw DomainError("box: lower and upper must be non-empty and of equal length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      std::ostringstream msg;
      msg << "box: dimension " << i << " has lower " << lower[i] << " >= upper " << upper[i];
      throw DomainError(msg.str());
    }
  }
}

Eigen::MatrixXd lhd_sample(Eigen::Index n, const Box& box, const Seed& seed) {
  if (n < 1) throw DomainError("lhd_sample: n must be positive");
  box.validate();
  const Eigen::Index d = box.dim();
  auto rng = seed.engine();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::MatrixXd x(n, d);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double width = box.upper[j] - box.lower[j];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + unif(rng)) /
                       static_cast<double>(n);
      // t < 1 always, but lower + t*width can round up to upper.
      x(i, j) = std::min(box.lower[j] + t * width, box.upper[j]);
    }
  }
  return x;
}

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd& a, double scale) {
  if (a.rows() != a.cols()) throw DomainError("cholesky: matrix must be square");
  const Eigen::Index m = a.rows();
  if (m == 0) {
    llt_.compute(a);
    return;
  }
  if (!a.allFinite()) throw NumericalError("cholesky: matrix has non-finite entries");

  std::vector<double> attempted{0.0};
  llt_.compute(a);
  if (llt_.info() == Eigen::Success) return;

  const double reference = scale > 0.0 ? scale : std::abs(a.trace()) / static_cast<double>(m);
  const double base = kBaseJitter * reference;
  double jitter = base;
  for (int retry = 0; retry < kMaxRetries && base > 0.0; ++retry, jitter *= 10.0) {
    attempted.push_back(jitter);
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      return;
    }
  }
  std::ostringstream msg;
  msg << "cholesky: factorization failed for " << m << "x" << m << " matrix at jitter levels";
  for (double j : attempted) msg << ' ' << j;
  throw NumericalError(msg.str(), std::move(attempted));
}

double JitteredCholesky::half_log_det() const {
  return llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd standard_normal(Eigen::Index m, const Seed& seed) {
  auto rng = seed.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = normal(rng);
  return z;
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           const Seed& seed, double jitter_scale) {
  const Eigen::Index m = mean.size();
  if (cov.rows() != m || cov.cols() != m)
    throw DomainError("mvn_sample: covariance shape does not match mean");
  if (m == 0) return mean;
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw DomainError("mvn_sample: covariance is not symmetric");
  if (cov.isZero(0.0)) return mean;

  JitteredCholesky chol(cov, jitter_scale);
  const Eigen::VectorXd z = standard_normal(m, seed);
  return mean + chol.llt().matrixL() * z;
}

}  // namespace mfcal
