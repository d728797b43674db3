#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfcal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument shapes, bounds, or values.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix could not be factorized, even after jitter escalation.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::vector<double> jitter_levels = {})
      : Error(what), jitter_levels_(std::move(jitter_levels)) {}

  const std::vector<double>& jitter_levels() const { return jitter_levels_; }

 private:
  std::vector<double> jitter_levels_;
};

/// Every multistart of a likelihood optimization failed.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Calibration parameter search produced nothing usable.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Too many decision-analysis iterations were skipped.
class AnalysisError : public Error {
 public:
  AnalysisError(const std::string& what, std::size_t skipped)
      : Error(what), skipped_(skipped) {}

  std::size_t skipped() const { return skipped_; }

 private:
  std::size_t skipped_;
};

/// Missing column, missing config key, or inconsistent file layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A CSV cell did not parse as a finite real. Row and column are 1-based,
/// with row 1 being the header.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace mfcal
