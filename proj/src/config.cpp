#include "mfcal/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mfcal/errors.hpp"
#include "mfcal/io.hpp"

namespace mfcal {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

class Entries {
 public:
  explicit Entries(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  const std::string& text(const std::string& key) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw SchemaError("config: missing key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const {
    const std::string& t = text(key);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
      throw SchemaError("config: '" + key + "' must be a finite number, got '" + t + "'");
    return v;
  }

  std::uint64_t unsigned_int(const std::string& key) const {
    const std::string& t = text(key);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw SchemaError("config: '" + key + "' must be a non-negative integer, got '" + t + "'");
    return v;
  }

  int count(const std::string& key) const {
    const std::uint64_t v = unsigned_int(key);
    if (v < 1 || v > 100000000) throw SchemaError("config: '" + key + "' must be a positive count");
    return static_cast<int>(v);
  }

  bool flag(const std::string& key) const {
    const std::string& t = text(key);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw SchemaError("config: '" + key + "' must be true or false, got '" + t + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out = split_fields(text(key));
    for (const auto& s : out)
      if (s.empty()) throw SchemaError("config: '" + key + "' has an empty element");
    return out;
  }

  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_)
      if (used_.count(k) == 0) out.push_back(k);
    return out;
  }

 private:
  const std::map<std::string, std::string>& kv_;
  mutable std::set<std::string> used_;
};

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

DecisionConfig RunConfig::decision() const {
  DecisionConfig cfg;
  cfg.N_u = N_u;
  cfg.n_rep = n_rep;
  cfg.N = N;
  cfg.box = box;
  cfg.seed = Seed(seed);
  cfg.collapse_variance = collapse_variance;
  return cfg;
}

void RunConfig::validate() const {
  if (inputs.empty()) throw SchemaError("config: 'inputs' lists no columns");
  if (outputs.empty()) throw SchemaError("config: 'outputs' lists no columns");
  if (box.dim() != static_cast<Eigen::Index>(inputs.size()))
    throw SchemaError("config: box does not cover every input");
  try {
    box.validate();
    search.validate();
    objective.check_outputs(static_cast<Eigen::Index>(outputs.size()));
  } catch (const DomainError& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  if (N_u < 1 || n_rep < 1 || N < 1) throw SchemaError("config: N_u, n_rep and N must be positive");
  if (histogram_bins < 1) throw SchemaError("config: 'histogram_bins' must be positive");
}

RunConfig parse_config(std::istream& in, const std::string& base_dir) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw SchemaError("config: line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("config: line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw SchemaError("config: line " + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (kv.count(full) != 0)
      throw SchemaError("config: line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
    kv[full] = trim(line.substr(eq + 1));
  }

  const Entries e(kv);
  RunConfig cfg;
  cfg.entries = kv;
  if (e.has("low")) cfg.low_path = resolve(e.text("low"), base_dir);
  if (e.has("high")) cfg.high_path = resolve(e.text("high"), base_dir);
  cfg.inputs = e.list("inputs");
  cfg.outputs = e.list("outputs");

  Eigen::VectorXd lo(static_cast<Eigen::Index>(cfg.inputs.size()));
  Eigen::VectorXd hi(lo.size());
  for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
    lo[static_cast<Eigen::Index>(i)] = e.real("box." + cfg.inputs[i] + ".lo");
    hi[static_cast<Eigen::Index>(i)] = e.real("box." + cfg.inputs[i] + ".hi");
  }
  cfg.box.lower = lo;
  cfg.box.upper = hi;

  const std::string kind =
      e.has("objective.kind") ? e.text("objective.kind")
                              : (cfg.outputs.size() == 1 ? "identity" : "sum_of_squares");
  if (kind == "identity") {
    cfg.objective = ObjectiveSpec::identity();
  } else if (kind == "sum_of_squares") {
    cfg.objective = ObjectiveSpec::sum_of_squares();
  } else if (kind == "weighted") {
    Eigen::VectorXd w(static_cast<Eigen::Index>(e.list("objective.weights").size()));
    const auto items = e.list("objective.weights");
    for (std::size_t i = 0; i < items.size(); ++i) {
      double v = 0.0;
      const auto res = std::from_chars(items[i].data(), items[i].data() + items[i].size(), v);
      if (res.ec != std::errc() || res.ptr != items[i].data() + items[i].size())
        throw SchemaError("config: 'objective.weights' has a non-numeric entry '" + items[i] + "'");
      w[static_cast<Eigen::Index>(i)] = v;
    }
    try {
      cfg.objective = ObjectiveSpec::weighted_sum_of_squares(w);
    } catch (const DomainError& err) {
      throw SchemaError(std::string("config: ") + err.what());
    }
  } else {
    throw SchemaError("config: unknown objective.kind '" + kind + "'");
  }

  const std::string prior = e.has("prior.kind") ? e.text("prior.kind") : "flat";
  try {
    if (prior == "flat") {
      cfg.prior = CalibrationPrior::flat();
    } else if (prior == "gaussian") {
      cfg.prior = CalibrationPrior::gaussian(e.real("prior.mean"), e.real("prior.sd"));
    } else if (prior == "uniform") {
      cfg.prior = CalibrationPrior::uniform(e.real("prior.lo"), e.real("prior.hi"));
    } else {
      throw SchemaError("config: unknown prior.kind '" + prior + "'");
    }
  } catch (const DomainError& err) {
    throw SchemaError(std::string("config: ") + err.what());
  }

  if (e.has("u_search.lo")) cfg.search.lo = e.real("u_search.lo");
  if (e.has("u_search.hi")) cfg.search.hi = e.real("u_search.hi");
  if (e.has("u_search.grid_points")) cfg.search.grid_points = e.count("u_search.grid_points");
  if (e.has("u_search.tolerance")) cfg.search.tolerance = e.real("u_search.tolerance");

  if (e.has("low_noise")) {
    if (e.text("low_noise") == "estimate") {
      cfg.low_noise = NoiseModel::estimated();
    } else {
      const double v = e.real("low_noise");
      if (v < 0.0) throw SchemaError("config: 'low_noise' must be >= 0");
      cfg.low_noise = NoiseModel::fixed(v);
    }
  }

  if (e.has("N_u")) cfg.N_u = e.count("N_u");
  if (e.has("n_rep")) cfg.n_rep = e.count("n_rep");
  if (e.has("N")) cfg.N = e.count("N");
  if (e.has("seed")) cfg.seed = e.unsigned_int("seed");
  if (e.has("out_dir")) cfg.out_dir = resolve(e.text("out_dir"), base_dir);
  if (e.has("collapse_variance")) cfg.collapse_variance = e.flag("collapse_variance");
  if (e.has("histogram_bins")) cfg.histogram_bins = e.count("histogram_bins");

  const auto unused = e.unused();
  if (!unused.empty()) throw SchemaError("config: unknown key '" + unused.front() + "'");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config '" + path + "'");
  return parse_config(in, std::filesystem::path(path).parent_path().string());
}

}  // namespace mfcal
