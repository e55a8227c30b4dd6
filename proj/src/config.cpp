#include "enspod/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "enspod/error.hpp"
#include "enspod/format.hpp"

namespace enspod {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  if (!value.empty() && value.back() == ',') items.emplace_back();
  return items;
}

double to_double(const std::string& value, int line) {
  const auto v = parse_double(value);
  if (!v) throw ParseError("expected a number, got '" + value + "'", line);
  return *v;
}

long long to_int(const std::string& value, int line) {
  const auto v = parse_int(value);
  if (!v) throw ParseError("expected an integer, got '" + value + "'", line);
  return *v;
}

bool to_bool(const std::string& value, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParseError("expected true or false, got '" + value + "'", line);
}

std::vector<double> to_doubles(const std::string& value, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(to_double(item, line));
  return out;
}

std::vector<int> to_ints(const std::string& value, int line) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) out.push_back(static_cast<int>(to_int(item, line)));
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

std::string join(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out;
}

bool multiple_of(double total, double step) {
  const double ratio = total / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  if (c.mesh.empty()) throw ValidationError("mesh must be set");
  if (!(c.nu > 0.0)) throw ValidationError("nu must be positive");
  if (!(c.dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(c.final_time >= c.dt)) throw ValidationError("final_time must be at least dt");
  if (!multiple_of(c.final_time, c.dt)) throw ValidationError("final_time must be a multiple of dt");
  if (c.snapshot_epsilons.empty()) throw ValidationError("snapshot_epsilons needs at least one member");
  if (c.eval_epsilons.empty()) throw ValidationError("eval_epsilons needs at least one member");
  if (c.snapshot_stride < 1) throw ValidationError("snapshot_stride must be >= 1");
  if (c.rom_dims.empty()) throw ValidationError("rom_dims must not be empty");
  for (int R : c.rom_dims) {
    if (R < 1) throw ValidationError("rom_dims entries must be >= 1");
  }
  if (c.force != "offset_circles" && c.force != "zero") {
    throw ValidationError("unknown force '" + c.force + "'");
  }
  if (c.snapshot_file.empty() || c.basis_file.empty()) throw ValidationError("file names must be set");
  if (!(c.thresholds.constant41 > 0.0) || !(c.thresholds.threshold41 > 0.0) ||
      !(c.thresholds.threshold42 > 0.0)) {
    throw ValidationError("stability constants and thresholds must be positive");
  }
  if (!(c.convergence_dt0 > 0.0)) throw ValidationError("convergence_dt0 must be positive");
  if (c.convergence_levels < 2) throw ValidationError("convergence_levels must be >= 2");
  if (c.convergence_mesh_n < 1) throw ValidationError("convergence_mesh_n must be >= 1");
  if (!(c.convergence_final_time >= c.convergence_dt0) ||
      !multiple_of(c.convergence_final_time, c.convergence_dt0)) {
    throw ValidationError("convergence_final_time must be a multiple of convergence_dt0");
  }
  if (c.convergence_scales.empty()) throw ValidationError("convergence_scales must not be empty");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", line);

    if (key == "mesh") c.mesh = value;
    else if (key == "nu") c.nu = to_double(value, line);
    else if (key == "dt") c.dt = to_double(value, line);
    else if (key == "final_time") c.final_time = to_double(value, line);
    else if (key == "snapshot_epsilons") c.snapshot_epsilons = to_doubles(value, line);
    else if (key == "eval_epsilons") c.eval_epsilons = to_doubles(value, line);
    else if (key == "snapshot_stride") c.snapshot_stride = static_cast<int>(to_int(value, line));
    else if (key == "rom_dims") c.rom_dims = to_ints(value, line);
    else if (key == "force") c.force = value;
    else if (key == "perturb_forcing") c.perturb_forcing = to_bool(value, line);
    else if (key == "snapshot_file") c.snapshot_file = value;
    else if (key == "basis_file") c.basis_file = value;
    else if (key == "constant41") c.thresholds.constant41 = to_double(value, line);
    else if (key == "threshold41") c.thresholds.threshold41 = to_double(value, line);
    else if (key == "threshold42") c.thresholds.threshold42 = to_double(value, line);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(value, line));
    else if (key == "convergence_dt0") c.convergence_dt0 = to_double(value, line);
    else if (key == "convergence_levels") c.convergence_levels = static_cast<int>(to_int(value, line));
    else if (key == "convergence_mesh_n") c.convergence_mesh_n = static_cast<int>(to_int(value, line));
    else if (key == "convergence_final_time") c.convergence_final_time = to_double(value, line);
    else if (key == "convergence_scales") c.convergence_scales = to_doubles(value, line);
    else if (key == "convergence_omega") c.convergence_omega = to_double(value, line);
    else throw ParseError("unknown key '" + key + "'", line);
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config " + path.string());
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "mesh = " << c.mesh << '\n'
      << "nu = " << format_double(c.nu) << '\n'
      << "dt = " << format_double(c.dt) << '\n'
      << "final_time = " << format_double(c.final_time) << '\n'
      << "snapshot_epsilons = " << join(c.snapshot_epsilons) << '\n'
      << "eval_epsilons = " << join(c.eval_epsilons) << '\n'
      << "snapshot_stride = " << c.snapshot_stride << '\n'
      << "rom_dims = " << join(c.rom_dims) << '\n'
      << "force = " << c.force << '\n'
      << "perturb_forcing = " << (c.perturb_forcing ? "true" : "false") << '\n'
      << "snapshot_file = " << c.snapshot_file << '\n'
      << "basis_file = " << c.basis_file << '\n'
      << "constant41 = " << format_double(c.thresholds.constant41) << '\n'
      << "threshold41 = " << format_double(c.thresholds.threshold41) << '\n'
      << "threshold42 = " << format_double(c.thresholds.threshold42) << '\n'
      << "seed = " << c.seed << '\n'
      << "convergence_dt0 = " << format_double(c.convergence_dt0) << '\n'
      << "convergence_levels = " << c.convergence_levels << '\n'
      << "convergence_mesh_n = " << c.convergence_mesh_n << '\n'
      << "convergence_final_time = " << format_double(c.convergence_final_time) << '\n'
      << "convergence_scales = " << join(c.convergence_scales) << '\n'
      << "convergence_omega = " << format_double(c.convergence_omega) << '\n';
  return out.str();
}

}  // namespace enspod
