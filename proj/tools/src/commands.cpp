#include "snlsapp/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "snls/diagnostics.hpp"
#include "snls/errors.hpp"
#include "snls/measures.hpp"
#include "snlsapp/config.hpp"
#include "snlsapp/manifest.hpp"

#ifndef SNLS_VERSION
#define SNLS_VERSION "unknown"
#endif

namespace snlsapp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw snls::DataError("cannot write " + path.string());
  return out;
}

RunConfig configure(const std::filesystem::path& path, const CommandOptions& opts) {
  if (!std::filesystem::exists(path)) throw snls::ConfigError("config file not found: " + path.string());
  RunConfig cfg = load_config(path);
  if (opts.output_root) cfg.output_root = *opts.output_root;
  if (opts.moment_k) cfg.verify.moment_k = *opts.moment_k;
  return cfg;
}

struct SimulateResult {
  snls::EnsembleRecord record;
  std::filesystem::path dir;
};

SimulateResult simulate(const RunConfig& cfg, std::ostream& out) {
  RunManifest manifest;
  manifest.config = cfg.canonical;
  manifest.seed = cfg.record.seed;
  manifest.version = SNLS_VERSION;
  manifest.started = utc_timestamp();
  auto rec = snls::run_ensemble(cfg.sim, cfg.noise, cfg.initial, cfg.trajectories, cfg.schedule(), cfg.record);
  const auto dir = cfg.run_directory();
  std::filesystem::create_directories(dir);
  snls::write_record_csv(rec, dir);
  manifest.finished = utc_timestamp();
  manifest.files = hash_directory(dir);
  write_manifest(manifest, dir / "manifest.txt");

  out << "run directory: " << dir.string() << "\n";
  out << "trajectories: " << rec.trajectories() << " (blown up: " << rec.flagged_count() << ")\n";
  if (rec.flagged_count() < rec.trajectories()) {
    const double t = rec.sample_times().back();
    for (auto name : {snls::observables::mass, snls::observables::energy}) {
      const auto e = snls::estimate_observable(rec, name, t);
      out << "E[" << name << "](t=" << fmt(t) << ") = " << fmt(e.mean) << " +/- " << fmt(e.std_error) << "\n";
    }
  }
  return {std::move(rec), dir};
}

SimulateResult obtain_record(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const auto dir = opts.record_dir ? *opts.record_dir : cfg.run_directory();
  if (std::filesystem::exists(dir / "record.meta")) {
    auto rec = snls::read_record_csv(dir);
    if (rec.meta.lambda != cfg.sim.lambda || rec.meta.sigma != cfg.sim.sigma || rec.meta.dt != cfg.sim.dt) {
      out << "warning: record parameters differ from the config; the config values are used\n";
    }
    return {std::move(rec), dir};
  }
  if (opts.record_dir) throw snls::ConfigError("no record found in " + dir.string());
  return simulate(cfg, out);
}

bool report_balance(const snls::BalanceReport& r, double floor, const std::filesystem::path& path,
                    std::ostream& out) {
  snls::write_balance_csv(r, path);
  const double tol = r.tolerance(floor);
  const bool pass = r.passes(floor);
  out << "window [" << fmt(r.window.t_start) << ", " << fmt(r.window.t_end) << "], dt " << fmt(r.dt_used)
      << ", spacing " << fmt(r.sample_spacing) << "\n";
  out << "lhs " << fmt(r.lhs) << "  rhs " << fmt(r.rhs) << "\n";
  for (const auto& t : r.terms) out << "  " << t.name << " " << fmt(t.value) << " +/- " << fmt(t.std_error) << "\n";
  out << "residual " << fmt(r.residual) << " (SE " << fmt(r.residual_se) << ", tolerance " << fmt(tol) << ")\n";
  if (!r.note.empty()) out << "note: " << r.note << "\n";
  return pass;
}

bool run_check(Check check, const RunConfig& cfg, const snls::EnsembleRecord& rec,
               const std::filesystem::path& dir, std::ostream& out) {
  const auto& v = cfg.verify;
  const snls::Window window{v.window_start, v.window_end};
  const auto path = dir / ("check_" + check_name(check) + ".csv");
  switch (check) {
    case Check::mass: {
      const double floor = std::max(1e-3 * snls::hs_norm_sq(cfg.noise, snls::HsWeight::identity), 1e-12);
      return report_balance(snls::mass_balance_residual(rec, cfg.sim, cfg.noise, window), floor, path, out);
    }
    case Check::energy: {
      const double grad = snls::hs_norm_sq(cfg.noise, snls::HsWeight::gradient);
      const double floor = cfg.noise.active_modes().empty() ? 1e-6 : 1e-2 * grad;
      return report_balance(snls::energy_balance_residual(rec, cfg.sim, cfg.noise, window), floor, path, out);
    }
    case Check::transient: {
      const auto curve = snls::transient_mass_curve(rec, cfg.sim, cfg.noise);
      const std::size_t n = curve.size();
      const auto points = static_cast<std::size_t>(std::max(1, v.transient_points));
      auto f = open_csv(path);
      f << "t,predicted,estimated,std_error,checked,within\n";
      std::vector<bool> checked(n, false);
      for (std::size_t i = 1; i <= points && n > 1; ++i) {
        checked[static_cast<std::size_t>(std::llround(static_cast<double>(i * (n - 1)) / points))] = true;
      }
      bool pass = true;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& p = curve[i];
        const bool ok = p.within(3.0);
        f << csv(p.t) << "," << csv(p.predicted) << "," << csv(p.estimated) << "," << csv(p.std_error) << ","
          << (checked[i] ? 1 : 0) << "," << (ok ? 1 : 0) << "\n";
        if (checked[i]) {
          out << "t=" << fmt(p.t) << " predicted " << fmt(p.predicted) << " estimated " << fmt(p.estimated)
              << " +/- " << fmt(p.std_error) << (ok ? "" : "  OUTSIDE 3 SE") << "\n";
          pass = pass && ok;
        }
      }
      return pass;
    }
    case Check::stationary: {
      const auto m = snls::stationary_moment_check(rec, cfg.noise, cfg.sim.lambda, v.moment_k, window);
      auto f = open_csv(path);
      f << "quantity,value\n";
      const std::pair<const char*, double> rows[] = {
          {"k", m.k},
          {"lhs", m.lhs},
          {"lhs_se", m.lhs_se},
          {"noise_term", m.noise_term},
          {"projection_term", m.projection_term},
          {"rhs", m.rhs},
          {"difference", m.difference},
          {"difference_se", m.difference_se},
          {"moment_k", m.moment_k},
          {"bound", m.bound},
          {"equality_ok", m.equality_ok ? 1.0 : 0.0},
          {"bound_ok", m.bound_ok ? 1.0 : 0.0},
      };
      for (const auto& [name, value] : rows) f << name << "," << csv(value) << "\n";
      out << "k=" << m.k << ": lhs " << fmt(m.lhs) << " rhs " << fmt(m.rhs) << " difference " << fmt(m.difference)
          << " (tolerance " << fmt(3.0 * m.difference_se) << ")\n";
      out << "bound " << fmt(m.bound) << (m.bound_ok ? " holds" : " VIOLATED") << "\n";
      return m.pass();
    }
    case Check::aldous: {
      if (v.aldous_base_times.empty() || v.aldous_deltas.empty()) {
        throw snls::ConfigError("aldous check needs verify.aldous_base_times and verify.aldous_deltas");
      }
      const auto curve = snls::aldous_increment(rec, v.aldous_base_times, v.aldous_deltas);
      const bool linear = cfg.sim.sigma == 0.0;
      auto f = open_csv(path);
      f << "delta,mean,std_error,linear_prediction\n";
      bool pass = snls::increments_shrink(curve);
      const snls::IncrementPoint* smallest = &curve.front();
      for (const auto& p : curve) {
        const double pred = snls::aldous_linear_prediction(cfg.noise, cfg.sim.lambda, p.delta, 1.0);
        f << csv(p.delta) << "," << csv(p.mean) << "," << csv(p.std_error) << "," << csv(pred) << "\n";
        const bool ok = !linear || std::abs(p.mean - pred) <= 3.0 * p.std_error + 1e-14;
        out << "delta=" << fmt(p.delta) << " increment " << fmt(p.mean) << " +/- " << fmt(p.std_error)
            << " linear " << fmt(pred) << (ok ? "" : "  OUTSIDE 3 SE") << "\n";
        pass = pass && ok;
        if (p.delta < smallest->delta) smallest = &p;
      }
      const double tol = v.aldous_tolerance > 0.0
                             ? v.aldous_tolerance
                             : 2.0 * snls::aldous_linear_prediction(cfg.noise, cfg.sim.lambda, smallest->delta, linear ? 1.0 : 0.0);
      const bool small = smallest->mean <= tol;
      out << "smallest delta increment " << fmt(smallest->mean) << " (tolerance " << fmt(tol) << ")\n";
      out << "halving monotone: " << (snls::increments_shrink(curve) ? "yes" : "NO") << "\n";
      return pass && small;
    }
    case Check::tail: {
      if (rec.meta.tail_cutoffs.empty()) throw snls::ConfigError("tail check needs run.tail_cutoffs");
      const auto profile = snls::tightness_tail_profile(rec, rec.meta.tail_cutoffs);
      const int kmax = cfg.noise.band_limit();
      const bool exact_zero = cfg.sim.sigma == 0.0 && cfg.initial.kind() == snls::InitialLaw::Kind::zero;
      auto f = open_csv(path);
      f << "cutoff,sup_mean\n";
      bool pass = profile.nonincreasing;
      for (std::size_t i = 0; i < profile.cutoffs.size(); ++i) {
        f << profile.cutoffs[i] << "," << csv(profile.sup_mean[i]) << "\n";
        const bool must_vanish = exact_zero && profile.cutoffs[i] >= kmax;
        const bool ok = !must_vanish || profile.sup_mean[i] == 0.0;
        out << "cutoff " << profile.cutoffs[i] << ": sup_t E[tail] = " << fmt(profile.sup_mean[i])
            << (ok ? "" : "  EXPECTED 0") << "\n";
        pass = pass && ok;
      }
      out << "nonincreasing: " << (profile.nonincreasing ? "yes" : "NO") << "\n";
      return pass;
    }
  }
  return false;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const snls::ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return config_error;
  } catch (const snls::DataError& ex) {
    err << "data error: " << ex.what() << "\n";
    return config_error;
  }
}

}  // namespace

Check parse_check(const std::string& name) {
  for (Check c : {Check::mass, Check::energy, Check::transient, Check::stationary, Check::aldous, Check::tail}) {
    if (check_name(c) == name) return c;
  }
  throw snls::ConfigError("unknown check '" + name + "'");
}

std::string check_name(Check c) {
  switch (c) {
    case Check::mass: return "mass";
    case Check::energy: return "energy";
    case Check::transient: return "transient";
    case Check::stationary: return "stationary";
    case Check::aldous: return "aldous";
    case Check::tail: return "tail";
  }
  return "?";
}

int cmd_simulate(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = configure(config, opts);
    const auto result = simulate(cfg, out);
    return result.record.flagged_count() > 0 ? blew_up : ok;
  });
}

int cmd_verify(const std::filesystem::path& config, Check check, const CommandOptions& opts, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = configure(config, opts);
    const auto result = obtain_record(cfg, opts, out);
    out << "check " << check_name(check) << "\n";
    const bool pass = run_check(check, cfg, result.record, result.dir, out);
    out << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? ok : check_failed;
  });
}

int cmd_kb(const std::filesystem::path& config, const std::vector<double>& horizons, const CommandOptions& opts,
           std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = configure(config, opts);
    const auto hs = horizons.empty() ? cfg.verify.kb_horizons : horizons;
    const auto result = obtain_record(cfg, opts, out);
    const auto kb = snls::kb_convergence(result.record, snls::observables::mass, hs);
    for (double h : kb.horizons) {
      snls::write_measure_csv(snls::kb_average(result.record, snls::observables::mass, h),
                              result.dir / ("kb_mass_" + csv(h) + ".csv"));
    }
    auto f = open_csv(result.dir / "kb_convergence.csv");
    f << "horizon_from,horizon_to,w1,difference_se\n";
    for (std::size_t i = 0; i < kb.distances.size(); ++i) {
      const double se = i > 0 ? kb.difference_se[i - 1] : 0.0;
      f << csv(kb.horizons[i]) << "," << csv(kb.horizons[i + 1]) << "," << csv(kb.distances[i]) << "," << csv(se)
        << "\n";
      out << "W1(mu_" << fmt(kb.horizons[i]) << ", mu_" << fmt(kb.horizons[i + 1]) << ") = " << fmt(kb.distances[i])
          << "\n";
    }
    out << (kb.nonincreasing ? "nonincreasing: PASS" : "nonincreasing: FAIL") << "\n";
    return kb.nonincreasing ? ok : check_failed;
  });
}

}  // namespace snlsapp
