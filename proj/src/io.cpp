#include "switchid/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace switchid {

namespace {

using Json = nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("write failed on " + path);
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  return *it;
}

double as_double(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

std::uint64_t as_seed(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw ConfigError(where + ": expected a nonnegative integer seed");
  }
  return j.get<std::uint64_t>();
}

std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

double field_double(const Json& j, const char* key, const std::string& where) {
  return as_double(require(j, key, where), where + "." + key);
}

int field_int(const Json& j, const char* key, const std::string& where) {
  return as_int(require(j, key, where), where + "." + key);
}

double opt_double(const Json& j, const char* key, double fallback,
                  const std::string& where) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_double(*it, where + "." + key);
}

int opt_int(const Json& j, const char* key, int fallback,
            const std::string& where) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_int(*it, where + "." + key);
}

std::uint64_t opt_seed(const Json& j, const char* key, std::uint64_t fallback,
                       const std::string& where) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_seed(*it, where + "." + key);
}

std::string opt_string(const Json& j, const char* key,
                       const std::string& fallback, const std::string& where) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_string(*it, where + "." + key);
}

Vec parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<int>(i)) = as_double(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

Mat parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + ": expected a nonempty array of rows");
  }
  const Vec first = parse_vector(j[0], where + "[0]");
  Mat m(j.size(), first.size());
  m.row(0) = first;
  for (std::size_t r = 1; r < j.size(); ++r) {
    const Vec row = parse_vector(j[r], where + "[" + std::to_string(r) + "]");
    if (row.size() != first.size()) {
      throw ConfigError(where + ": ragged rows");
    }
    m.row(static_cast<int>(r)) = row;
  }
  return m;
}

SystemConfig parse_system(const Json& j) {
  const std::string where = "system";
  SystemConfig system;
  system.state_dim = field_int(j, "state_dim", where);
  system.degree = field_int(j, "degree", where);
  if (system.state_dim < 1) throw ConfigError("system.state_dim: must be >= 1");
  if (system.degree < 0) throw ConfigError("system.degree: must be >= 0");
  const Json& modes = require(j, "modes", where);
  if (!modes.is_array() || modes.empty()) {
    throw ConfigError("system.modes: expected a nonempty array");
  }
  for (std::size_t m = 0; m < modes.size(); ++m) {
    system.mode_coeffs.push_back(
        parse_matrix(modes[m], "system.modes[" + std::to_string(m) + "]"));
  }
  if (const auto it = j.find("surfaces"); it != j.end()) {
    system.surface_degree = field_int(*it, "degree", "system.surfaces");
    const Json& coeffs = require(*it, "coefficients", "system.surfaces");
    if (!coeffs.is_array()) {
      throw ConfigError("system.surfaces.coefficients: expected an array");
    }
    for (std::size_t l = 0; l < coeffs.size(); ++l) {
      system.surface_coeffs.push_back(parse_vector(
          coeffs[l], "system.surfaces.coefficients[" + std::to_string(l) + "]"));
    }
  }
  if (const auto it = j.find("modebook"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("system.modebook: expected an array");
    for (std::size_t m = 0; m < it->size(); ++m) {
      const std::string code_where = "system.modebook[" + std::to_string(m) + "]";
      const Json& code = (*it)[m];
      if (!code.is_array()) throw ConfigError(code_where + ": expected an array");
      std::vector<int> signs;
      for (std::size_t l = 0; l < code.size(); ++l) {
        const int s = as_int(code[l], code_where);
        if (s != 1 && s != -1) throw ConfigError(code_where + ": codes are +1/-1");
        signs.push_back(s);
      }
      system.modebook_codes.push_back(std::move(signs));
    }
  }
  return system;
}

SamplingSpec parse_sampling(const Json& j, int state_dim) {
  const std::string where = "sampling";
  SamplingSpec spec;
  const std::string scheme = opt_string(j, "scheme", "uniform_box", where);
  if (scheme == "uniform_box") {
    spec.scheme = SamplingScheme::kUniformBox;
  } else if (scheme == "trajectory") {
    spec.scheme = SamplingScheme::kTrajectory;
  } else {
    throw ConfigError("sampling.scheme: expected 'uniform_box' or 'trajectory'");
  }
  const Json& box = require(j, "box", where);
  if (!box.is_array() || static_cast<int>(box.size()) != state_dim) {
    throw ConfigError("sampling.box: expected one (lo, hi) pair per dimension");
  }
  for (std::size_t k = 0; k < box.size(); ++k) {
    const std::string pair_where = "sampling.box[" + std::to_string(k) + "]";
    const Vec pair = parse_vector(box[k], pair_where);
    if (pair.size() != 2 || !(pair(0) < pair(1))) {
      throw ConfigError(pair_where + ": expected lo < hi");
    }
    spec.box.emplace_back(pair(0), pair(1));
  }
  spec.count = field_int(j, "count", where);
  if (spec.count < 1) throw ConfigError("sampling.count: must be >= 1");
  spec.noise_std = opt_double(j, "noise_std", 0.0, where);
  spec.seed = opt_seed(j, "seed", 0, where);
  spec.dt = opt_double(j, "dt", 0.0, where);
  spec.horizon = opt_double(j, "horizon", 0.0, where);
  if (const auto it = j.find("initial_conditions"); it != j.end()) {
    if (!it->is_array()) {
      throw ConfigError("sampling.initial_conditions: expected an array");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      spec.initial_conditions.push_back(parse_vector(
          (*it)[i], "sampling.initial_conditions[" + std::to_string(i) + "]"));
    }
  }
  return spec;
}

BilevelConfig parse_identify(const Json& j) {
  const std::string where = "identify";
  BilevelConfig config;
  config.mode_count = field_int(j, "mode_count", where);
  config.degree = field_int(j, "degree", where);
  config.eta = opt_double(j, "eta", config.eta, where);
  const std::string relaxation = opt_string(j, "relaxation", "lp", where);
  if (relaxation == "lp") {
    config.relaxation = Relaxation::kLp;
  } else if (relaxation == "sdp") {
    config.relaxation = Relaxation::kSdp;
  } else if (relaxation == "exact") {
    config.relaxation = Relaxation::kExact;
  } else {
    throw ConfigError("identify.relaxation: expected 'lp', 'sdp', or 'exact'");
  }
  const std::string init = opt_string(j, "init", "identity", where);
  if (init == "identity") {
    config.init = InitScheme::kIdentity;
  } else if (init == "random") {
    config.init = InitScheme::kRandom;
  } else {
    throw ConfigError("identify.init: expected 'identity' or 'random'");
  }
  config.init_scale = opt_double(j, "init_scale", config.init_scale, where);
  config.init_seed = opt_seed(j, "init_seed", config.init_seed, where);
  config.max_iters = opt_int(j, "max_iters", config.max_iters, where);
  config.cost_tol = opt_double(j, "cost_tol", config.cost_tol, where);
  config.solver_tol = opt_double(j, "solver_tol", config.solver_tol, where);
  return config;
}

SurfaceFitConfig parse_surface(const Json& j) {
  const std::string where = "surface";
  SurfaceFitConfig config;
  config.degree = opt_int(j, "degree", config.degree, where);
  config.margin = opt_double(j, "margin", config.margin, where);
  config.sparsity = opt_double(j, "sparsity", config.sparsity, where);
  config.bound = opt_double(j, "bound", config.bound, where);
  return config;
}

EvaluateConfig parse_evaluate(const Json& j) {
  const std::string where = "evaluate";
  EvaluateConfig config;
  config.test_count = opt_int(j, "test_count", config.test_count, where);
  config.test_seed = opt_seed(j, "test_seed", config.test_seed, where);
  config.rollout_count = opt_int(j, "rollout_count", config.rollout_count, where);
  config.rollout_seed = opt_seed(j, "rollout_seed", config.rollout_seed, where);
  config.dt = opt_double(j, "dt", config.dt, where);
  config.horizon = opt_double(j, "horizon", config.horizon, where);
  return config;
}

Json vector_json(const Vec& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_json(const Mat& m) {
  Json out = Json::array();
  for (int r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r)));
  return out;
}

Json provenance_json(const std::string& config_hash, std::uint64_t seed) {
  Json out;
  out["config_hash"] = config_hash;
  out["seed"] = seed;
  return out;
}

Json parse_json_file(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Splits one CSV line on commas; no quoting is used by any writer here.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_csv_double(const std::string& field, const std::string& path,
                        int line_number) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw IoError(path + ":" + std::to_string(line_number) +
                  ": malformed number '" + field + "'");
  }
  return value;
}

int parse_csv_int(const std::string& field, const std::string& path,
                  int line_number) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw IoError(path + ":" + std::to_string(line_number) +
                  ": malformed integer '" + field + "'");
  }
  return value;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

ToolConfig load_config(const std::string& path) {
  const std::string bytes = read_file(path);
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");

  ToolConfig config;
  config.hash = fnv1a_hex(bytes);
  config.echo = j.dump();
  config.system = parse_system(require(j, "system", path));
  config.sampling =
      parse_sampling(require(j, "sampling", path), config.system.state_dim);
  config.identify = parse_identify(require(j, "identify", path));
  if (const auto it = j.find("surface"); it != j.end()) {
    config.surface = parse_surface(*it);
  }
  if (const auto it = j.find("evaluate"); it != j.end()) {
    config.evaluate = parse_evaluate(*it);
  }

  // Cross-section consistency.
  const auto basis_p = basis_size(config.system.state_dim, config.system.degree);
  for (std::size_t m = 0; m < config.system.mode_coeffs.size(); ++m) {
    const Mat& coeffs = config.system.mode_coeffs[m];
    if (coeffs.rows() != config.system.state_dim ||
        coeffs.cols() != static_cast<int>(basis_p)) {
      throw ConfigError("system.modes[" + std::to_string(m) + "]: expected " +
                        std::to_string(config.system.state_dim) + " x " +
                        std::to_string(basis_p) + " coefficients");
    }
  }
  if (!config.system.surface_coeffs.empty()) {
    const auto surf_p =
        basis_size(config.system.state_dim, config.system.surface_degree);
    for (std::size_t l = 0; l < config.system.surface_coeffs.size(); ++l) {
      if (config.system.surface_coeffs[l].size() != static_cast<int>(surf_p)) {
        throw ConfigError("system.surfaces.coefficients[" + std::to_string(l) +
                          "]: expected length " + std::to_string(surf_p));
      }
    }
    if (config.system.modebook_codes.size() != config.system.mode_coeffs.size()) {
      throw ConfigError("system.modebook: one code per mode required");
    }
    for (const auto& code : config.system.modebook_codes) {
      if (code.size() != config.system.surface_coeffs.size()) {
        throw ConfigError("system.modebook: code length != surface count");
      }
    }
  } else if (config.system.mode_coeffs.size() > 1) {
    throw ConfigError("system: multi-mode systems need surfaces and modebook");
  }
  return config;
}

SwitchingSystemModel build_true_model(const SystemConfig& system) {
  SwitchingSystemModel model;
  model.basis = MonomialBasis::create(system.state_dim, system.degree);
  for (const Mat& coeffs : system.mode_coeffs) {
    model.modes.push_back(ModeDynamics{coeffs});
  }
  if (!system.surface_coeffs.empty()) {
    SurfaceSet surfaces;
    surfaces.basis = MonomialBasis::create(system.state_dim, system.surface_degree);
    surfaces.surfaces = system.surface_coeffs;
    model.surfaces = std::move(surfaces);
    model.modebook = ModeBook{system.modebook_codes};
  }
  return model;
}

void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const std::string& config_hash) {
  std::ostringstream out;
  out << "# config=" << config_hash << " seed=" << dataset.seed
      << " generator=" << dataset.generator << "\n";
  for (int k = 0; k < dataset.n; ++k) out << "z_" << (k + 1) << ",";
  for (int k = 0; k < dataset.n; ++k) out << "zdot_" << (k + 1) << ",";
  out << "true_mode\n";
  for (const Sample& sample : dataset.samples) {
    for (int k = 0; k < dataset.n; ++k) out << format_double(sample.z(k)) << ",";
    for (int k = 0; k < dataset.n; ++k) {
      out << format_double(sample.zdot(k)) << ",";
    }
    out << (sample.true_mode ? *sample.true_mode + 1 : 0) << "\n";
  }
  write_file(path, out.str());
}

Dataset read_dataset_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int line_number = 0;
  Dataset dataset;

  // Optional provenance comment, then the mandatory header.
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  ++line_number;
  if (!line.empty() && line.front() == '#') {
    std::istringstream tokens(line.substr(1));
    std::string token;
    while (tokens >> token) {
      const std::size_t eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "seed") {
        dataset.seed = std::strtoull(value.c_str(), nullptr, 10);
      } else if (key == "generator") {
        dataset.generator = value;
      }
    }
    if (!std::getline(in, line)) throw IoError(path + ": missing header");
    ++line_number;
  }

  const std::vector<std::string> header = split_csv(line);
  if (header.size() < 3 || header.back() != "true_mode" ||
      (header.size() - 1) % 2 != 0) {
    throw IoError(path + ": malformed header");
  }
  const int n = static_cast<int>((header.size() - 1) / 2);
  for (int k = 0; k < n; ++k) {
    if (header[k] != "z_" + std::to_string(k + 1) ||
        header[n + k] != "zdot_" + std::to_string(k + 1)) {
      throw IoError(path + ": malformed header");
    }
  }
  dataset.n = n;

  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw IoError(path + ":" + std::to_string(line_number) +
                    ": expected " + std::to_string(header.size()) + " fields");
    }
    Sample sample;
    sample.z.resize(n);
    sample.zdot.resize(n);
    for (int k = 0; k < n; ++k) {
      sample.z(k) = parse_csv_double(fields[k], path, line_number);
      sample.zdot(k) = parse_csv_double(fields[n + k], path, line_number);
    }
    const int mode = parse_csv_int(fields.back(), path, line_number);
    if (mode < 0) {
      throw IoError(path + ":" + std::to_string(line_number) +
                    ": negative mode label");
    }
    if (mode > 0) sample.true_mode = mode - 1;
    dataset.samples.push_back(std::move(sample));
  }
  if (dataset.samples.empty()) throw IoError(path + ": no samples");
  return dataset;
}

void write_model_json(const std::string& path,
                      const SwitchingSystemModel& model,
                      const ToolConfig& config, std::uint64_t seed) {
  Json out;
  out["provenance"] = provenance_json(config.hash, seed);
  out["state_dim"] = model.state_dim();
  out["degree"] = model.basis.d;
  out["mode_count"] = model.mode_count();
  Json modes = Json::array();
  for (const ModeDynamics& mode : model.modes) {
    modes.push_back(matrix_json(mode.coeffs));
  }
  out["modes"] = std::move(modes);
  out["config"] = Json::parse(config.echo);
  write_file(path, out.dump(2) + "\n");
}

SwitchingSystemModel read_model_json(const std::string& path) {
  const Json j = parse_json_file(path);
  SwitchingSystemModel model;
  const int state_dim = field_int(j, "state_dim", path);
  const int degree = field_int(j, "degree", path);
  model.basis = MonomialBasis::create(state_dim, degree);
  const Json& modes = require(j, "modes", path);
  if (!modes.is_array() || modes.empty()) {
    throw IoError(path + ": missing mode coefficients");
  }
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const Mat coeffs =
        parse_matrix(modes[m], path + ".modes[" + std::to_string(m) + "]");
    if (coeffs.rows() != state_dim || coeffs.cols() != model.basis.size()) {
      throw IoError(path + ": mode coefficient shape mismatch");
    }
    model.modes.push_back(ModeDynamics{coeffs});
  }
  return model;
}

void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& records,
                       const std::string& config_hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# config=" << config_hash << " seed=" << seed << "\n";
  out << "iteration,cost,mismatch_prev,mismatch_truth,tightness_ratio,"
         "assign_seconds,fit_seconds\n";
  for (const IterationRecord& r : records) {
    out << r.iteration << "," << format_double(r.cost) << ",";
    if (r.mismatch_prev >= 0) out << r.mismatch_prev;
    out << ",";
    if (r.mismatch_truth >= 0) out << r.mismatch_truth;
    out << ",";
    if (r.tightness >= 0.0) out << format_double(r.tightness);
    out << "," << format_double(r.assign_seconds) << ","
        << format_double(r.fit_seconds) << "\n";
  }
  write_file(path, out.str());
}

void write_surfaces_json(const std::string& path, const SurfacesFile& file,
                         const std::string& config_hash, std::uint64_t seed) {
  Json out;
  out["provenance"] = provenance_json(config_hash, seed);
  out["state_dim"] = file.surfaces.basis.n;
  out["degree"] = file.surfaces.basis.d;
  Json surfaces = Json::array();
  for (const Vec& a : file.surfaces.surfaces) surfaces.push_back(vector_json(a));
  out["surfaces"] = std::move(surfaces);
  out["modebook"] = file.modebook.codes;
  Json certificate;
  certificate["t"] = file.certificate_t;
  Json witnesses = Json::array();
  for (const Vec& w : file.certificate_witness) {
    witnesses.push_back(vector_json(w));
  }
  certificate["witness"] = std::move(witnesses);
  out["certificate"] = std::move(certificate);
  Json admissible;
  admissible["lo"] = file.admissible.lo;
  admissible["hi"] = file.admissible.hi;
  admissible["empty"] = file.admissible.empty;
  out["admissible_margin"] = std::move(admissible);
  out["margin_used"] = file.margin_used;
  out["total_slack"] = file.total_slack;
  out["l1_norms"] = file.l1_norms;
  write_file(path, out.dump(2) + "\n");
}

SurfacesFile read_surfaces_json(const std::string& path) {
  const Json j = parse_json_file(path);
  SurfacesFile file;
  const int state_dim = field_int(j, "state_dim", path);
  const int degree = field_int(j, "degree", path);
  file.surfaces.basis = MonomialBasis::create(state_dim, degree);
  const Json& surfaces = require(j, "surfaces", path);
  if (!surfaces.is_array() || surfaces.empty()) {
    throw IoError(path + ": missing surfaces");
  }
  for (std::size_t l = 0; l < surfaces.size(); ++l) {
    const Vec a =
        parse_vector(surfaces[l], path + ".surfaces[" + std::to_string(l) + "]");
    if (a.size() != file.surfaces.basis.size()) {
      throw IoError(path + ": surface coefficient length mismatch");
    }
    file.surfaces.surfaces.push_back(a);
  }
  const Json& modebook = require(j, "modebook", path);
  for (const auto& code : modebook) {
    file.modebook.codes.push_back(code.get<std::vector<int>>());
  }
  const Json& certificate = require(j, "certificate", path);
  file.certificate_t =
      require(certificate, "t", path).get<std::vector<double>>();
  for (const auto& w : require(certificate, "witness", path)) {
    file.certificate_witness.push_back(parse_vector(w, path + ".witness"));
  }
  const Json& admissible = require(j, "admissible_margin", path);
  file.admissible.lo = field_double(admissible, "lo", path);
  file.admissible.hi = field_double(admissible, "hi", path);
  file.admissible.empty = require(admissible, "empty", path).get<bool>();
  file.margin_used = field_double(j, "margin_used", path);
  file.total_slack = field_double(j, "total_slack", path);
  file.l1_norms = require(j, "l1_norms", path).get<std::vector<double>>();
  return file;
}

}  // namespace switchid
