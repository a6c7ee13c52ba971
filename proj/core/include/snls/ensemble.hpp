#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snls/integrator.hpp"
#include "snls/noise.hpp"
#include "snls/spectral_field.hpp"

namespace snls {

/// Law of u_0. Every variant is band-limited or deterministic, so all
/// polynomial moments of |u_0|_{H^1} are finite.
class InitialLaw {
 public:
  enum class Kind { zero, fixed, gaussian };

  static InitialLaw zero();
  static InitialLaw fixed(SpectralField field);
  /// Independent circular Gaussian modes with E|c_k|^2 = |scale_k|^2.
  static InitialLaw gaussian(const NoiseOperator& scale);

  Kind kind() const noexcept { return kind_; }
  /// Draws from the initial-state domain of `stream`; increments are untouched.
  SpectralField sample(const Grid& grid, const NoiseStream& stream) const;

 private:
  Kind kind_ = Kind::zero;
  std::optional<SpectralField> field_;
  std::vector<Complex> scale_;
};

struct Schedule {
  std::vector<double> times;

  /// 0, interval, 2 interval, ..., horizon.
  static Schedule uniform(double horizon, double interval);
};

struct RecordOptions {
  std::uint64_t seed = 1;
  /// 0 selects $SNLS_WORKERS, falling back to the hardware concurrency.
  unsigned workers = 0;
  /// Per-mode |c_k|^2 series are recorded for |k|_inf <= k_report (< 0: none).
  int k_report = 8;
  std::vector<int> tail_cutoffs;
  /// Times at which full coefficient snapshots are kept (increment diagnostics).
  std::vector<double> snapshot_times;
};

unsigned resolve_worker_count(unsigned requested);

/// Names of recorded observables.
namespace observables {
inline constexpr std::string_view mass = "mass";
inline constexpr std::string_view energy = "energy";
inline constexpr std::string_view f1 = "f1";
inline constexpr std::string_view sobolev1 = "sobolev1";
/// int |u|^{2 sigma + 2}
inline constexpr std::string_view potential = "potential";
/// int |u|^{2 sigma}
inline constexpr std::string_view nl_weight = "nl_weight";
/// sum_i Re(u, Phi e_i)^2 over the real noise directions.
inline constexpr std::string_view noise_projection = "noise_projection";

std::string mode(Mode k, int dim);
std::string tail(int cutoff);
}  // namespace observables

struct TrajectoryStatus {
  std::uint64_t index = 0;
  bool blown_up = false;
  double blowup_time = 0.0;
  double blowup_norm = 0.0;
};

struct RunMetadata {
  double lambda = 0.0;
  double sigma = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  int k_report = -1;
  std::vector<int> tail_cutoffs;
};

/// Per-trajectory observable series on a shared sampling schedule, plus
/// optional coefficient snapshots. Values of flagged (blown-up) trajectories
/// are NaN from the blow-up time on and never enter estimates.
class EnsembleRecord {
 public:
  EnsembleRecord(Grid grid, std::vector<double> sample_times, std::vector<std::string> names,
                 std::size_t trajectories, std::vector<double> snapshot_times = {});

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> sample_times() const noexcept { return times_; }
  std::span<const double> snapshot_times() const noexcept { return snapshot_times_; }
  std::size_t trajectories() const noexcept { return status_.size(); }
  const std::vector<std::string>& observable_names() const noexcept { return names_; }

  bool has_observable(std::string_view name) const noexcept;
  /// Throws DataError for unknown names.
  std::size_t observable_id(std::string_view name) const;
  /// Index of sample time t (relative tolerance 1e-9); throws DataError.
  std::size_t time_index(double t) const;
  std::size_t snapshot_index(double t) const;

  std::span<const double> series(std::size_t obs, std::size_t traj) const;
  std::span<double> series(std::size_t obs, std::size_t traj);
  std::span<const double> series(std::string_view name, std::size_t traj) const {
    return series(observable_id(name), traj);
  }

  const SpectralField& snapshot(std::size_t traj, std::size_t snap) const;
  SpectralField& snapshot(std::size_t traj, std::size_t snap);

  const TrajectoryStatus& status(std::size_t traj) const { return status_.at(traj); }
  TrajectoryStatus& status(std::size_t traj) { return status_.at(traj); }
  std::size_t flagged_count() const noexcept;
  /// Indices of trajectories that did not blow up, ascending.
  std::vector<std::size_t> valid_trajectories() const;

  RunMetadata meta;

 private:
  Grid grid_;
  std::vector<double> times_;
  std::vector<std::string> names_;
  std::vector<double> snapshot_times_;
  std::vector<TrajectoryStatus> status_;
  std::vector<double> values_;  // [obs][traj][time]
  std::vector<SpectralField> snapshots_;  // [traj][snap]
};

/// Runs n_traj independent trajectories of `cfg` with noise `phi` from `law`.
/// Trajectory i uses NoiseStream(options.seed, i); results are identical for
/// any worker count. BlowUpError is caught per trajectory and flagged.
EnsembleRecord run_ensemble(const SimConfig& cfg, const NoiseOperator& phi, const InitialLaw& law,
                            std::size_t n_traj, const Schedule& schedule, const RecordOptions& options);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Sample mean and standard error (n - 1 normalization; SE = 0 for n = 1).
Estimate summarize(std::span<const double> values);

/// Mean and SE of observable `name` at sample time t over non-flagged trajectories.
Estimate estimate_observable(const EnsembleRecord& rec, std::string_view name, double t);

/// CSV layout: one <observable>.csv per observable (columns t, traj_0, ...),
/// summary.csv (t, observable, mean, std_error, n_valid), trajectories.csv,
/// record.meta and, when snapshots exist, snapshots.csv. Returns written paths.
std::vector<std::filesystem::path> write_record_csv(const EnsembleRecord& rec,
                                                    const std::filesystem::path& dir);
/// Inverse of write_record_csv; values round-trip exactly.
EnsembleRecord read_record_csv(const std::filesystem::path& dir);

}  // namespace snls
