#pragma once

#include <vector>

namespace mfcal {

/// Linear-interpolation sample quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Even counts average the two middle values.
double median(std::vector<double> values);

double mean(const std::vector<double>& values);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(const std::vector<double>& values);

}  // namespace mfcal
