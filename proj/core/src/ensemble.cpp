#include "snls/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "snls/errors.hpp"
#include "snls/functionals.hpp"

namespace snls {

InitialLaw InitialLaw::zero() { return InitialLaw{}; }

InitialLaw InitialLaw::fixed(SpectralField field) {
  InitialLaw law;
  law.kind_ = Kind::fixed;
  field.pin_nyquist();
  law.field_ = std::move(field);
  return law;
}

InitialLaw InitialLaw::gaussian(const NoiseOperator& scale) {
  InitialLaw law;
  law.kind_ = Kind::gaussian;
  law.scale_.assign(scale.amplitudes().begin(), scale.amplitudes().end());
  return law;
}

SpectralField InitialLaw::sample(const Grid& grid, const NoiseStream& stream) const {
  switch (kind_) {
    case Kind::zero:
      return SpectralField(grid);
    case Kind::fixed:
      if (!(field_->grid() == grid)) throw ConfigError("initial field grid does not match");
      return *field_;
    case Kind::gaussian: {
      if (scale_.size() != grid.size()) throw ConfigError("initial scale grid does not match");
      SpectralField out(grid);
      for (std::size_t i = 0; i < scale_.size(); ++i) {
        if (scale_[i] == Complex{}) continue;
        const auto [x1, x2] = stream.normal_pair(static_cast<std::uint32_t>(i), StreamDomain::initial_state);
        out[i] = scale_[i] * Complex(x1, x2) * std::sqrt(0.5);
      }
      return out;
    }
  }
  return SpectralField(grid);
}

Schedule Schedule::uniform(double horizon, double interval) {
  if (!(interval > 0.0) || !(horizon >= 0.0)) throw ConfigError("invalid sampling schedule");
  const auto n = static_cast<std::size_t>(std::llround(horizon / interval));
  if (std::abs(static_cast<double>(n) * interval - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw ConfigError("horizon must be a multiple of the sample interval");
  }
  Schedule s;
  s.times.reserve(n + 1);
  for (std::size_t j = 0; j <= n; ++j) s.times.push_back(static_cast<double>(j) * interval);
  return s;
}

unsigned resolve_worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SNLS_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

namespace observables {

std::string mode(Mode k, int dim) {
  if (dim == 1) return "mode_" + std::to_string(k[0]);
  return "mode_" + std::to_string(k[0]) + "_" + std::to_string(k[1]);
}

std::string tail(int cutoff) { return "tail_" + std::to_string(cutoff); }

}  // namespace observables

namespace {

bool times_match(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

std::size_t find_time(std::span<const double> times, double t, const char* what) {
  const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9 * std::max(1.0, std::abs(t)));
  if (it != times.end() && times_match(*it, t)) return static_cast<std::size_t>(it - times.begin());
  throw DataError(std::string(what) + " " + std::to_string(t) + " was not recorded");
}

}  // namespace

EnsembleRecord::EnsembleRecord(Grid grid, std::vector<double> sample_times, std::vector<std::string> names,
                               std::size_t trajectories, std::vector<double> snapshot_times)
    : grid_(std::move(grid)),
      times_(std::move(sample_times)),
      names_(std::move(names)),
      snapshot_times_(std::move(snapshot_times)),
      status_(trajectories),
      values_(names_.size() * trajectories * times_.size(), 0.0) {
  if (!std::is_sorted(times_.begin(), times_.end()) ||
      std::adjacent_find(times_.begin(), times_.end()) != times_.end()) {
    throw ConfigError("sample times must be strictly increasing");
  }
  std::sort(snapshot_times_.begin(), snapshot_times_.end());
  snapshot_times_.erase(std::unique(snapshot_times_.begin(), snapshot_times_.end()), snapshot_times_.end());
  for (std::size_t i = 0; i < trajectories; ++i) status_[i].index = i;
  snapshots_.assign(trajectories * snapshot_times_.size(), SpectralField(grid_));
}

bool EnsembleRecord::has_observable(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t EnsembleRecord::observable_id(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("unknown observable '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t EnsembleRecord::time_index(double t) const { return find_time(times_, t, "sample time"); }

std::size_t EnsembleRecord::snapshot_index(double t) const {
  return find_time(snapshot_times_, t, "snapshot time");
}

std::span<const double> EnsembleRecord::series(std::size_t obs, std::size_t traj) const {
  const std::size_t nt = times_.size();
  return {values_.data() + (obs * status_.size() + traj) * nt, nt};
}

std::span<double> EnsembleRecord::series(std::size_t obs, std::size_t traj) {
  const std::size_t nt = times_.size();
  return {values_.data() + (obs * status_.size() + traj) * nt, nt};
}

const SpectralField& EnsembleRecord::snapshot(std::size_t traj, std::size_t snap) const {
  return snapshots_.at(traj * snapshot_times_.size() + snap);
}

SpectralField& EnsembleRecord::snapshot(std::size_t traj, std::size_t snap) {
  return snapshots_.at(traj * snapshot_times_.size() + snap);
}

std::size_t EnsembleRecord::flagged_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(status_.begin(), status_.end(), [](const auto& s) { return s.blown_up; }));
}

std::vector<std::size_t> EnsembleRecord::valid_trajectories() const {
  std::vector<std::size_t> out;
  out.reserve(status_.size());
  for (std::size_t i = 0; i < status_.size(); ++i) {
    if (!status_[i].blown_up) out.push_back(i);
  }
  return out;
}

namespace {

std::size_t step_index(double t, double dt) {
  const double n = std::round(t / dt);
  if (t < 0.0 || std::abs(n * dt - t) > 1e-9 * std::max(1.0, t)) {
    throw ConfigError("time " + std::to_string(t) + " is not a multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

struct ObservableLayout {
  std::vector<std::string> names;
  std::vector<std::size_t> mode_flat;
  std::vector<int> cutoffs;
};

ObservableLayout make_layout(const Grid& grid, const RecordOptions& opt) {
  ObservableLayout layout;
  for (auto n : {observables::mass, observables::energy, observables::f1, observables::sobolev1,
                 observables::potential, observables::nl_weight, observables::noise_projection}) {
    layout.names.emplace_back(n);
  }
  if (opt.k_report >= grid.points() / 2) throw ConfigError("k_report must be below N/2");
  const int kr = opt.k_report;
  if (kr >= 0) {
    const int k2_range = grid.dim() == 2 ? kr : 0;
    for (int k1 = -kr; k1 <= kr; ++k1) {
      for (int k2 = -k2_range; k2 <= k2_range; ++k2) {
        layout.mode_flat.push_back(grid.flat_index({k1, k2}));
        layout.names.push_back(observables::mode({k1, k2}, grid.dim()));
      }
    }
  }
  for (int c : opt.tail_cutoffs) {
    if (c < 0 || c > grid.points() / 2) throw ConfigError("tail cutoff must lie in [0, N/2]");
    layout.cutoffs.push_back(c);
    layout.names.push_back(observables::tail(c));
  }
  return layout;
}

class Recorder {
 public:
  Recorder(const SimConfig& cfg, const NoiseOperator& phi, const ObservableLayout& layout)
      : cfg_(cfg), phi_(phi), layout_(layout), physical_(cfg.grid.size()) {}

  void record(const SpectralField& u, EnsembleRecord& rec, std::size_t traj, std::size_t t) {
    using namespace functionals;
    to_physical(u, physical_);
    const Grid& g = cfg_.grid;
    const double sigma = cfg_.sigma;
    const double pot = power_integral(g, physical_, 2.0 * sigma + 2.0);
    const double f1v = pot / (2.0 * sigma + 2.0);
    const auto amp = phi_.amplitudes();
    double projection = 0.0;
    for (std::size_t i : phi_.active_modes()) projection += std::norm(amp[i]) * std::norm(u[i]);

    std::size_t obs = 0;
    auto put = [&](double v) { rec.series(obs++, traj)[t] = v; };
    put(mass(u));
    put(kinetic(u) - f1v);
    put(f1v);
    put(sobolev_norm_sq(u, 1.0));
    put(pot);
    put(power_integral(g, physical_, 2.0 * sigma));
    put(0.5 * projection);
    for (std::size_t flat : layout_.mode_flat) put(std::norm(u[flat]));
    for (int c : layout_.cutoffs) put(tail_mass(u, c, 1.0));
  }

 private:
  const SimConfig& cfg_;
  const NoiseOperator& phi_;
  const ObservableLayout& layout_;
  std::vector<Complex> physical_;
};

}  // namespace

EnsembleRecord run_ensemble(const SimConfig& cfg, const NoiseOperator& phi, const InitialLaw& law,
                            std::size_t n_traj, const Schedule& schedule, const RecordOptions& options) {
  cfg.validate();
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (schedule.times.empty()) throw ConfigError("sampling schedule is empty");
  const ObservableLayout layout = make_layout(cfg.grid, options);

  EnsembleRecord rec(cfg.grid, schedule.times, layout.names, n_traj, options.snapshot_times);
  rec.meta = RunMetadata{cfg.lambda, cfg.sigma, cfg.dt, options.seed, options.k_report, layout.cutoffs};

  std::vector<std::size_t> sample_steps;
  for (double t : rec.sample_times()) sample_steps.push_back(step_index(t, cfg.dt));
  std::vector<std::size_t> snap_steps;
  for (double t : rec.snapshot_times()) snap_steps.push_back(step_index(t, cfg.dt));
  std::size_t last_step = sample_steps.back();
  if (!snap_steps.empty()) last_step = std::max(last_step, snap_steps.back());

  const unsigned workers = std::min<std::size_t>(resolve_worker_count(options.workers), n_traj);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t n_obs = layout.names.size();

  auto work = [&] {
    try {
      Stepper stepper(cfg, phi);
      Recorder recorder(cfg, phi, layout);
      for (std::size_t traj = next++; traj < n_traj; traj = next++) {
        NoiseStream stream(options.seed, traj);
        SpectralField u = law.sample(cfg.grid, stream);
        std::size_t si = 0;
        std::size_t ni = 0;
        std::size_t n = 0;
        try {
          for (;; ++n) {
            while (si < sample_steps.size() && sample_steps[si] == n) recorder.record(u, rec, traj, si++);
            while (ni < snap_steps.size() && snap_steps[ni] == n) rec.snapshot(traj, ni++) = u;
            if (n == last_step) break;
            stepper.advance(u, stream);
          }
        } catch (const BlowUpError& e) {
          auto& st = rec.status(traj);
          st.blown_up = true;
          st.blowup_time = static_cast<double>(n) * cfg.dt;
          st.blowup_norm = e.h1_norm();
          for (std::size_t o = 0; o < n_obs; ++o) {
            auto s = rec.series(o, traj);
            std::fill(s.begin() + static_cast<std::ptrdiff_t>(si), s.end(),
                      std::numeric_limits<double>::quiet_NaN());
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n_traj;
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rec;
}

Estimate summarize(std::span<const double> values) {
  Estimate e;
  e.n = values.size();
  if (e.n == 0) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
  }
  return e;
}

Estimate estimate_observable(const EnsembleRecord& rec, std::string_view name, double t) {
  const std::size_t obs = rec.observable_id(name);
  const std::size_t ti = rec.time_index(t);
  std::vector<double> v;
  for (std::size_t traj : rec.valid_trajectories()) v.push_back(rec.series(obs, traj)[ti]);
  return summarize(v);
}

}  // namespace snls
