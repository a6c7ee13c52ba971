#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace snlsapp {

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, blew_up = 3 };

enum class Check { mass, energy, transient, stationary, aldous, tail };

/// Throws snls::ConfigError for unknown names.
Check parse_check(const std::string& name);
std::string check_name(Check c);

struct CommandOptions {
  /// Overrides the configured output root.
  std::optional<std::filesystem::path> output_root;
  /// verify/kb: read this record instead of the config's run directory.
  std::optional<std::filesystem::path> record_dir;
  std::optional<int> moment_k;
};

int cmd_simulate(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_verify(const std::filesystem::path& config, Check check, const CommandOptions& opts, std::ostream& out,
               std::ostream& err);
int cmd_kb(const std::filesystem::path& config, const std::vector<double>& horizons, const CommandOptions& opts,
           std::ostream& out, std::ostream& err);

}  // namespace snlsapp
