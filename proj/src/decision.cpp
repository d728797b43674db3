#include "mfcal/decision.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfcal/errors.hpp"
#include "mfcal/stats.hpp"

namespace mfcal {

namespace {

// Stream labels inside one (s, r) iteration.
constexpr std::uint64_t kCandidates = 0;
constexpr std::uint64_t kFirstOutput = 1;

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, c);
  return out;
}

}  // namespace

ObjectiveSpec ObjectiveSpec::weighted_sum_of_squares(Eigen::VectorXd weights) {
  if (weights.size() < 1) throw DomainError("objective: weights must be non-empty");
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw DomainError("objective: weights must be finite and nonnegative");
  return ObjectiveSpec(Kind::WeightedSumOfSquares, std::move(weights));
}

void ObjectiveSpec::check_outputs(Eigen::Index p) const {
  if (p < 1) throw DomainError("objective: need at least one output");
  if (kind_ == Kind::Identity && p != 1)
    throw DomainError("objective: identity takes exactly one output");
  if (kind_ == Kind::WeightedSumOfSquares && weights_.size() != p)
    throw DomainError("objective: weight count does not match output count");
}

double evaluate_objective(const ObjectiveSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& y) {
  spec.check_outputs(y.size());
  switch (spec.kind()) {
    case ObjectiveSpec::Kind::Identity:
      return y[0];
    case ObjectiveSpec::Kind::SumOfSquares:
      return y.squaredNorm();
    case ObjectiveSpec::Kind::WeightedSumOfSquares:
      return spec.weights().dot(y.cwiseAbs2());
  }
  return 0.0;
}

void DecisionConfig::validate() const {
  if (N_u < 1 || n_rep < 1 || N < 1)
    throw DomainError("decision config: N_u, n_rep and N must be positive");
  box.validate();
  if (!(max_skip_fraction >= 0.0 && max_skip_fraction <= 1.0))
    throw DomainError("decision config: skip fraction must lie in [0, 1]");
}

OptimaCollection sample_optima(const std::function<std::vector<Predictor>(int)>& stage,
                               const ObjectiveSpec& spec, const DecisionConfig& cfg) {
  cfg.validate();
  const Eigen::Index d = cfg.box.dim();
  const std::size_t planned = static_cast<std::size_t>(cfg.N_u) * static_cast<std::size_t>(cfg.n_rep);

  OptimaCollection coll;
  coll.box = cfg.box;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> values;
  rows.reserve(planned);
  values.reserve(planned);

  for (int s = 0; s < cfg.N_u; ++s) {
    std::vector<Predictor> predictors;
    try {
      predictors = stage(s);
    } catch (const NumericalError&) {
    } catch (const FitError&) {
    }
    if (predictors.empty()) {
      for (int r = 0; r < cfg.n_rep; ++r) coll.skipped.emplace_back(s, r);
      continue;
    }
    spec.check_outputs(static_cast<Eigen::Index>(predictors.size()));

    for (int r = 0; r < cfg.n_rep; ++r) {
      const Seed it = cfg.seed.child({static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(r)});
      const Eigen::MatrixXd cand = lhd_sample(cfg.N, cfg.box, it.child(kCandidates));
      Eigen::MatrixXd y(cfg.N, static_cast<Eigen::Index>(predictors.size()));
      try {
        for (std::size_t k = 0; k < predictors.size(); ++k) {
          PosteriorPredictive pred = predictors[k](cand);
          const auto col = static_cast<Eigen::Index>(k);
          y.col(col) = cfg.collapse_variance
                           ? pred.mean
                           : mvn_sample(pred.mean, pred.cov, it.child(kFirstOutput + k),
                                        pred.prior_scale);
        }
      } catch (const NumericalError&) {
        coll.skipped.emplace_back(s, r);
        continue;
      }

      // Strict comparison keeps the lowest index on ties.
      Eigen::Index best = 0;
      double best_value = evaluate_objective(spec, y.row(0).transpose());
      for (Eigen::Index m = 1; m < cfg.N; ++m) {
        const double v = evaluate_objective(spec, y.row(m).transpose());
        if (v < best_value) {
          best_value = v;
          best = m;
        }
      }
      rows.push_back(cand.row(best).transpose());
      values.push_back(best_value);
      coll.provenance.emplace_back(s, r);
    }
  }

  if (static_cast<double>(coll.skipped.size()) >
      cfg.max_skip_fraction * static_cast<double>(planned)) {
    std::ostringstream msg;
    msg << "decision analysis: skipped " << coll.skipped.size() << " of " << planned
        << " iterations";
    throw AnalysisError(msg.str(), coll.skipped.size());
  }

  coll.points.resize(static_cast<Eigen::Index>(rows.size()), d);
  coll.objective.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    coll.points.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    coll.objective[static_cast<Eigen::Index>(i)] = values[i];
  }
  return coll;
}

OptimaCollection run_decision_analysis(const ModelFactory& factory,
                                       const Eigen::MatrixXd& u_samples,
                                       const ObjectiveSpec& spec, const DecisionConfig& cfg) {
  if (u_samples.rows() < 1 || u_samples.cols() < 1)
    throw DomainError("decision analysis: need at least one posterior draw and one output");
  spec.check_outputs(u_samples.cols());
  DecisionConfig local = cfg;
  local.N_u = static_cast<int>(u_samples.rows());

  auto stage = [&](int s) {
    std::vector<MultiFidelityModel> models = factory(u_samples.row(s).transpose());
    if (static_cast<Eigen::Index>(models.size()) != u_samples.cols())
      throw DomainError("decision analysis: factory returned the wrong number of models");
    std::vector<Predictor> out;
    for (auto& m : models) {
      if (m.dim() != cfg.box.dim())
        throw DomainError("decision analysis: model dimension does not match the box");
      out.push_back([model = std::move(m)](const Eigen::MatrixXd& x) { return predict_high(model, x); });
    }
    return out;
  };
  return sample_optima(stage, spec, local);
}

OptimaCollection run_single_fidelity_analysis(const std::vector<GpFit>& fits,
                                              const ObjectiveSpec& spec,
                                              const DecisionConfig& cfg) {
  if (fits.empty()) throw DomainError("decision analysis: need at least one fitted output");
  spec.check_outputs(static_cast<Eigen::Index>(fits.size()));
  for (const auto& f : fits)
    if (f.dim() != cfg.box.dim())
      throw DomainError("decision analysis: fit dimension does not match the box");
  std::vector<Predictor> predictors;
  for (const auto& f : fits)
    predictors.push_back([&f](const Eigen::MatrixXd& x) { return gp_predict(f, x); });
  return sample_optima([&](int) { return predictors; }, spec, cfg);
}

OptimaSummary summarize_optima(const OptimaCollection& coll, int bins) {
  if (coll.size() == 0) throw DomainError("summarize_optima: empty collection");
  if (bins < 1) throw DomainError("summarize_optima: need at least one bin");
  const Eigen::Index d = coll.points.cols();
  if (coll.box.dim() != d) throw DomainError("summarize_optima: box dimension mismatch");

  OptimaSummary out;
  out.median.resize(d);
  out.mean.resize(d);
  out.sd.resize(d);
  out.quantiles.resize(d, 4);
  for (Eigen::Index k = 0; k < d; ++k) {
    const std::vector<double> v = column(coll.points, k);
    out.median[k] = median(v);
    out.mean[k] = mean(v);
    out.sd[k] = stddev(v);
    for (int q = 0; q < 4; ++q) out.quantiles(k, q) = quantile(v, kSummaryQuantiles[q]);

    Histogram h;
    const double lo = coll.box.lower[k];
    const double width = (coll.box.upper[k] - lo) / static_cast<double>(bins);
    for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? coll.box.upper[k] : lo + width * b);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double x : v) {
      auto b = static_cast<long>(std::floor((x - lo) / width));
      b = std::clamp(b, 0L, static_cast<long>(bins - 1));
      ++h.counts[static_cast<std::size_t>(b)];
    }
    out.histograms.push_back(std::move(h));
  }
  return out;
}

}  // namespace mfcal
