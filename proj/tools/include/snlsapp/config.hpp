#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "snls/ensemble.hpp"
#include "snls/integrator.hpp"
#include "snls/noise.hpp"

namespace snlsapp {

/// Settings used by `verify` and `kb`.
struct VerifySettings {
  double window_start = 10.0;
  double window_end = 20.0;
  int moment_k = 1;
  int transient_points = 10;
  std::vector<double> aldous_base_times;
  std::vector<double> aldous_deltas;
  /// Upper bound on the increment at the smallest delta; <= 0 selects
  /// twice the linear-flow prediction.
  double aldous_tolerance = 0.0;
  std::vector<double> kb_horizons{5.0, 10.0, 20.0};
};

struct RunConfig {
  RunConfig(snls::SimConfig s, snls::NoiseOperator n, snls::InitialLaw i)
      : sim(std::move(s)), noise(std::move(n)), initial(std::move(i)) {}

  snls::SimConfig sim;
  snls::NoiseOperator noise;
  snls::InitialLaw initial;
  snls::RecordOptions record;
  std::size_t trajectories = 100;
  double horizon = 20.0;
  double sample_interval = 0.1;
  std::filesystem::path output_root = "runs";
  VerifySettings verify;
  /// Canonical "section.key=value" lines, sorted; the config hash is taken over these.
  std::vector<std::string> canonical;

  snls::Schedule schedule() const { return snls::Schedule::uniform(horizon, sample_interval); }
  /// First 12 hex digits of the SHA-256 of the canonical text.
  std::string hash() const;
  /// output_root / "run-<seed>-<hash>".
  std::filesystem::path run_directory() const;
};

/// Parses an INI-style file (sections, key = value, ';' or '#' comments).
/// Unknown keys and malformed values raise snls::ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace snlsapp
