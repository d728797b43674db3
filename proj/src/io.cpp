#include "mfcal/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfcal/errors.hpp"

namespace mfcal {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_real(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::size_t> locate(const std::vector<std::string>& header,
                                const std::vector<std::string>& names, const std::string& source) {
  std::vector<std::size_t> idx;
  for (const auto& name : names) {
    std::size_t found = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) {
        found = c;
        break;
      }
    if (found == header.size())
      throw SchemaError(source + ": missing column '" + name + "'");
    idx.push_back(found);
  }
  return idx;
}

}  // namespace

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Dataset read_dataset(std::istream& in, const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs, const std::string& source) {
  if (inputs.empty()) throw SchemaError(source + ": no input columns requested");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(source + ": empty file, expected a header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_fields(line);
  const auto in_idx = locate(header, inputs, source);
  const auto out_idx = locate(header, outputs, source);

  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << source << ": row " << row << " has " << fields.size() << " fields, header has "
          << header.size();
      throw SchemaError(msg.str());
    }
    std::vector<double> values;
    for (const auto* group : {&in_idx, &out_idx}) {
      for (std::size_t c : *group) {
        double v = 0.0;
        if (!parse_real(fields[c], v) || !std::isfinite(v)) {
          std::ostringstream msg;
          msg << source << ": row " << row << ", column " << c + 1 << " ('" << header[c]
              << "'): cannot parse '" << fields[c] << "' as a finite number";
          throw ParseError(msg.str(), row, c + 1);
        }
        values.push_back(v);
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() < 2) throw SchemaError(source + ": need at least two data rows");

  Dataset ds;
  ds.input_names = inputs;
  ds.output_names = outputs;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(inputs.size());
  const auto p = static_cast<Eigen::Index>(outputs.size());
  ds.X.resize(n, d);
  ds.Y.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < d; ++k) ds.X(i, k) = r[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k < p; ++k) ds.Y(i, k) = r[static_cast<std::size_t>(d + k)];
  }
  return ds;
}

Dataset load_dataset(const DatasetFile& file) {
  std::ifstream in(file.path);
  if (!in) throw SchemaError("cannot open dataset '" + file.path + "'");
  return read_dataset(in, file.inputs, file.outputs, file.path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dataset_csv(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                        const std::vector<std::string>& input_names,
                        const std::vector<std::string>& output_names) {
  if (x.rows() != y.rows() || static_cast<std::size_t>(x.cols()) != input_names.size() ||
      static_cast<std::size_t>(y.cols()) != output_names.size())
    throw DomainError("dataset_csv: shapes do not match column names");
  std::ostringstream out;
  bool first = true;
  for (const auto* names : {&input_names, &output_names})
    for (const auto& n : *names) {
      out << (first ? "" : ",") << n;
      first = false;
    }
  out << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) out << (k ? "," : "") << format_double(x(i, k));
    for (Eigen::Index k = 0; k < y.cols(); ++k) out << ',' << format_double(y(i, k));
    out << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

}  // namespace mfcal
