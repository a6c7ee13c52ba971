#pragma once

#include <stdexcept>
#include <string>

namespace snls {

/// Invalid parameters, shapes or config files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Missing or insufficient recorded data (unknown observable, unsampled
/// time, degenerate window).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by the integrator when the H^1 guard trips or the state is no
/// longer finite. The trajectory that raised it is flagged, not continued.
class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(double h1_norm)
      : std::runtime_error("blow-up guard tripped: |u|_H1 = " + std::to_string(h1_norm)),
        h1_norm_(h1_norm) {}

  double h1_norm() const noexcept { return h1_norm_; }

 private:
  double h1_norm_;
};

}  // namespace snls
