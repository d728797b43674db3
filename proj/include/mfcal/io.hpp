#pragma once

// CSV datasets and file output.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfcal {

/// Which columns of a comma-separated file with a header row to read.
struct DatasetFile {
  std::string path;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

struct Dataset {
  Eigen::MatrixXd X;
  /// n x p, one column per requested output.
  Eigen::MatrixXd Y;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
};

/// Rows are kept in file order, duplicates included. Throws SchemaError for a
/// missing column, a ragged row or fewer than two data rows, and ParseError
/// (1-based row and column, header = row 1) for a cell that is not a finite real.
Dataset load_dataset(const DatasetFile& file);
Dataset read_dataset(std::istream& in, const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs, const std::string& source = "<stream>");

/// printf %.17g, which round-trips every finite double.
std::string format_double(double v);

/// Header `inputs..., outputs...`, one row per observation.
std::string dataset_csv(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                        const std::vector<std::string>& input_names,
                        const std::vector<std::string>& output_names);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

/// Splits on commas and trims surrounding whitespace from each field.
std::vector<std::string> split_fields(const std::string& line);

}  // namespace mfcal
