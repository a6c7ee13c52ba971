#include "snlsapp/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "snls/errors.hpp"
#include "snlsapp/manifest.hpp"

namespace snlsapp {

namespace {

using snls::ConfigError;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"grid", {"dim", "length", "points"}},
      {"model", {"lambda", "sigma"}},
      {"noise", {"type", "amplitude", "k_max", "decay", "modes"}},
      {"integrator", {"dt", "scheme", "dealias", "blowup_guard"}},
      {"initial", {"type", "amplitude", "k_max", "decay", "modes"}},
      {"run",
       {"seed", "trajectories", "horizon", "sample_interval", "workers", "k_report", "tail_cutoffs",
        "snapshot_times", "output"}},
      {"verify",
       {"window_start", "window_end", "moment_k", "transient_points", "aldous_base_times", "aldous_deltas",
        "aldous_tolerance", "kb_horizons"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

double to_real(const std::string& key, std::string s) {
  s = trim(s);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) s = "1";
  }
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not a number: '" + s + "'");
  return v * factor;
}

long long to_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + s + "'");
}

class Entries {
 public:
  explicit Entries(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& k) const { return kv_.count(k) > 0; }
  std::string text(const std::string& k, const std::string& fallback) const {
    auto it = kv_.find(k);
    return it == kv_.end() ? fallback : it->second;
  }
  double real(const std::string& k, double fallback) const { return has(k) ? to_real(k, kv_.at(k)) : fallback; }
  long long integer(const std::string& k, long long fallback) const {
    return has(k) ? to_int(k, kv_.at(k)) : fallback;
  }
  bool boolean(const std::string& k, bool fallback) const { return has(k) ? to_bool(k, kv_.at(k)) : fallback; }

 private:
  std::map<std::string, std::string> kv_;
};

// "k1[,k2]:re[:im]" entries separated by ';'.
std::vector<snls::ModeAmplitude> parse_modes(const std::string& key, const std::string& text, int dim) {
  std::vector<snls::ModeAmplitude> out;
  for (const auto& entry : split(text, ';')) {
    const auto parts = split(entry, ':');
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError(key + ": malformed mode entry '" + entry + "'");
    const auto idx = split(parts[0], ',');
    if (static_cast<int>(idx.size()) != dim) throw ConfigError(key + ": mode index must have " +
                                                               std::to_string(dim) + " component(s)");
    snls::ModeAmplitude m;
    for (int a = 0; a < dim; ++a) m.k[a] = static_cast<int>(to_int(key, idx[a]));
    m.value = {to_real(key, parts[1]), parts.size() == 3 ? to_real(key, parts[2]) : 0.0};
    out.push_back(m);
  }
  return out;
}

snls::NoiseOperator operator_from(const Entries& e, const std::string& section, const snls::Grid& grid,
                                  const std::string& default_type) {
  const std::string type = e.text(section + ".type", default_type);
  if (type == "zero") return snls::NoiseOperator::zero(grid);
  if (type == "band" || type == "gaussian") {
    return snls::NoiseOperator::band(grid, e.real(section + ".amplitude", 0.1),
                                     static_cast<int>(e.integer(section + ".k_max", 8)),
                                     e.real(section + ".decay", 2.0));
  }
  if (type == "modes" || type == "fixed") {
    return snls::NoiseOperator::from_modes(grid, parse_modes(section + ".modes", e.text(section + ".modes", ""),
                                                             grid.dim()));
  }
  throw ConfigError(section + ".type: unknown value '" + type + "'");
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(to_real("list", p));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& p : split(text, ',')) out.push_back(static_cast<int>(to_int("list", p)));
  return out;
}

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }

  std::map<std::string, std::string> kv;
  std::vector<std::string> canonical;
  for (const auto& [section, body] : tree) {
    auto known = schema().find(section);
    if (known == schema().end()) throw ConfigError("unknown section [" + section + "]");
    if (body.empty()) throw ConfigError("key outside a section: " + section);
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
      const std::string full = section + "." + key;
      kv[full] = trim(value.data());
      canonical.push_back(full + "=" + kv[full]);
    }
  }
  std::sort(canonical.begin(), canonical.end());
  const Entries e(std::move(kv));

  snls::Grid grid(static_cast<int>(e.integer("grid.dim", 1)), e.real("grid.length", 2.0 * std::numbers::pi),
                  static_cast<int>(e.integer("grid.points", 64)));
  snls::SimConfig sim{grid};
  sim.lambda = e.real("model.lambda", 0.5);
  sim.sigma = e.real("model.sigma", 1.0);
  sim.dt = e.real("integrator.dt", 1e-3);
  const std::string scheme = e.text("integrator.scheme", "strang");
  if (scheme == "strang") {
    sim.scheme = snls::Scheme::strang;
  } else if (scheme == "lie") {
    sim.scheme = snls::Scheme::lie;
  } else {
    throw ConfigError("integrator.scheme: unknown value '" + scheme + "'");
  }
  sim.dealias = e.boolean("integrator.dealias", false);
  sim.blowup_guard = e.real("integrator.blowup_guard", 1e6);
  sim.validate();

  RunConfig cfg(sim, operator_from(e, "noise", grid, "band"), snls::InitialLaw::zero());
  const std::string init = e.text("initial.type", "zero");
  if (init == "gaussian") {
    cfg.initial = snls::InitialLaw::gaussian(operator_from(e, "initial", grid, "gaussian"));
  } else if (init == "fixed") {
    snls::SpectralField u0(grid);
    for (const auto& m : parse_modes("initial.modes", e.text("initial.modes", ""), grid.dim())) {
      u0.set(m.k, m.value);
    }
    cfg.initial = snls::InitialLaw::fixed(u0);
  } else if (init != "zero") {
    throw ConfigError("initial.type: unknown value '" + init + "'");
  }

  const long long seed = e.integer("run.seed", 1);
  if (seed < 0) throw ConfigError("run.seed must be nonnegative");
  cfg.record.seed = static_cast<std::uint64_t>(seed);
  const long long traj = e.integer("run.trajectories", 100);
  if (traj < 1) throw ConfigError("run.trajectories must be >= 1");
  cfg.trajectories = static_cast<std::size_t>(traj);
  cfg.horizon = e.real("run.horizon", 20.0);
  cfg.sample_interval = e.real("run.sample_interval", 0.1);
  if (!(cfg.horizon > 0.0) || !(cfg.sample_interval > 0.0)) {
    throw ConfigError("run.horizon and run.sample_interval must be positive");
  }
  const long long workers = e.integer("run.workers", 0);
  if (workers < 0) throw ConfigError("run.workers must be nonnegative");
  cfg.record.workers = static_cast<unsigned>(workers);
  cfg.record.k_report = static_cast<int>(e.integer("run.k_report", 8));
  cfg.record.tail_cutoffs = parse_int_list(e.text("run.tail_cutoffs", ""));
  cfg.record.snapshot_times = parse_real_list(e.text("run.snapshot_times", ""));
  cfg.output_root = e.text("run.output", "runs");

  auto& v = cfg.verify;
  v.window_start = e.real("verify.window_start", 10.0);
  v.window_end = e.real("verify.window_end", cfg.horizon);
  v.moment_k = static_cast<int>(e.integer("verify.moment_k", 1));
  v.transient_points = static_cast<int>(e.integer("verify.transient_points", 10));
  v.aldous_base_times = parse_real_list(e.text("verify.aldous_base_times", ""));
  v.aldous_deltas = parse_real_list(e.text("verify.aldous_deltas", ""));
  v.aldous_tolerance = e.real("verify.aldous_tolerance", 0.0);
  if (e.has("verify.kb_horizons")) v.kb_horizons = parse_real_list(e.text("verify.kb_horizons", ""));

  for (double t : v.aldous_base_times) {
    cfg.record.snapshot_times.push_back(t);
    for (double d : v.aldous_deltas) cfg.record.snapshot_times.push_back(t + d);
  }
  cfg.canonical = std::move(canonical);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string RunConfig::hash() const {
  std::string text;
  for (const auto& line : canonical) text += line + "\n";
  return sha256_hex(text).substr(0, 12);
}

std::filesystem::path RunConfig::run_directory() const {
  return output_root / ("run-" + std::to_string(record.seed) + "-" + hash());
}

}  // namespace snlsapp
