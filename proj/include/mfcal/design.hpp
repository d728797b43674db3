#pragma once

// Random streams, Latin hypercube designs and multivariate normal draws.
//
// Every stochastic stage receives a Seed and derives its own engine from it,
// so no RNG state is shared between stages or threads.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace mfcal {

class Seed {
 public:
  Seed() = default;
  explicit Seed(std::uint64_t root, std::vector<std::uint64_t> labels = {})
      : root_(root), labels_(std::move(labels)) {}

  std::uint64_t root() const { return root_; }
  const std::vector<std::uint64_t>& labels() const { return labels_; }

  /// Stream for a sub-stage; appends labels to this seed's own.
  Seed child(std::uint64_t label) const;
  Seed child(std::initializer_list<std::uint64_t> labels) const;

  /// 64-bit digest of (root, labels); distinct label paths give unrelated digests.
  std::uint64_t digest() const;

  std::mt19937_64 engine() const { return std::mt19937_64(digest()); }

  friend bool operator==(const Seed&, const Seed&) = default;

 private:
  std::uint64_t root_ = 0;
  std::vector<std::uint64_t> labels_;
};

/// Axis-aligned feasible domain, lower[i] < upper[i].
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Box() = default;
  Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

  /// [lo, hi]^d
  static Box cube(Eigen::Index d, double lo, double hi);

  Eigen::Index dim() const { return lower.size(); }
  Eigen::VectorXd width() const { return upper - lower; }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Throws DomainError unless the box is non-empty with lower < upper everywhere.
  void validate() const;
};

/// Random-permutation Latin hypercube: n rows, one uniform point per stratum
/// in every dimension.
Eigen::MatrixXd lhd_sample(Eigen::Index n, const Box& box, const Seed& seed);

/// Cholesky factorization with the jitter escalation used throughout:
/// jitter 0 first, then 1e-10 * scale, multiplied by 10 on each retry,
/// six retries at most. The scale defaults to trace/m.
class JitteredCholesky {
 public:
  static constexpr int kMaxRetries = 6;
  static constexpr double kBaseJitter = 1e-10;

  /// Throws NumericalError carrying every attempted jitter level on failure.
  explicit JitteredCholesky(const Eigen::MatrixXd& a, double scale = 0.0);

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  Eigen::MatrixXd matrix_l() const { return llt_.matrixL(); }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return llt_.rows(); }

  /// Sum of log of the diagonal of L, i.e. half the log-determinant.
  double half_log_det() const;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

/// One draw from N(mean, cov). A zero covariance returns the mean exactly.
/// `jitter_scale` overrides trace/m as the reference for jitter escalation;
/// conditional covariances pass their prior variance, since rounding error
/// in them is proportional to it.
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           const Seed& seed, double jitter_scale = 0.0);

/// Standard normal vector from the given seed's stream.
Eigen::VectorXd standard_normal(Eigen::Index m, const Seed& seed);

}  // namespace mfcal
