#pragma once

// Run configuration: `key = value` lines, optionally grouped under
// `[section]` headers that prefix the keys inside them ("[box.T1]" then
// "lo = 90" is the key "box.T1.lo"). '#' and ';' start comments.
//
//   low = low.csv                  high = high.csv
//   inputs = x1, x2                outputs = y
//   box.<input>.lo / .hi           objective.kind = identity | sum_of_squares | weighted
//   objective.weights = 1, 2       prior.kind = flat | gaussian | uniform
//   prior.mean / prior.sd          prior.lo / prior.hi
//   u_search.lo / .hi / .grid_points / .tolerance
//   N_u, n_rep, N, seed, out_dir, collapse_variance, histogram_bins
//   low_noise = <variance> | estimate

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mfcal/calibration.hpp"
#include "mfcal/decision.hpp"
#include "mfcal/design.hpp"
#include "mfcal/gp.hpp"

namespace mfcal {

struct RunConfig {
  std::string low_path;
  std::string high_path;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Box box;
  ObjectiveSpec objective = ObjectiveSpec::identity();
  CalibrationPrior prior = CalibrationPrior::flat();
  USearch search;
  NoiseModel low_noise = NoiseModel::fixed(1e-10);
  int N_u = 100;
  int n_rep = 100;
  int N = 200;
  std::uint64_t seed = 2025;
  std::string out_dir = ".";
  bool collapse_variance = false;
  int histogram_bins = 30;

  /// Every key as given, after section prefixes were applied.
  std::map<std::string, std::string> entries;

  DecisionConfig decision() const;
  /// Throws SchemaError naming the offending key.
  void validate() const;
};

/// Relative data paths are resolved against `base_dir`.
RunConfig parse_config(std::istream& in, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);

}  // namespace mfcal
