#include "snls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>

#include "snls/errors.hpp"
#include "snls/functionals.hpp"

namespace snls {

double BalanceReport::tolerance(double floor) const noexcept {
  if (residual_se == 0.0) return std::max(floor, 2.0 * discretization_bound);
  return std::max(3.0 * residual_se, floor);
}

bool BalanceReport::passes(double floor) const noexcept {
  return std::isfinite(residual) && std::abs(residual) <= tolerance(floor);
}

namespace {

struct WindowSamples {
  std::vector<std::size_t> idx;
  double spacing = 0.0;
};

WindowSamples window_samples(const EnsembleRecord& rec, Window w) {
  if (!(w.t_end > w.t_start)) throw DataError("degenerate window");
  const auto times = rec.sample_times();
  const double eps = 1e-9 * std::max(1.0, std::abs(w.t_end));
  WindowSamples out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= w.t_start - eps && times[i] <= w.t_end + eps) out.idx.push_back(i);
  }
  if (out.idx.size() < 2) throw DataError("degenerate window: fewer than 2 sample times");
  out.spacing = times[out.idx[1]] - times[out.idx[0]];
  for (std::size_t k = 1; k < out.idx.size(); ++k) {
    if (out.idx[k] != out.idx[k - 1] + 1 ||
        std::abs(times[out.idx[k]] - times[out.idx[k - 1]] - out.spacing) > 1e-9 * std::max(1.0, out.spacing)) {
      throw DataError("balance window requires a uniform sampling schedule");
    }
  }
  return out;
}

std::vector<std::size_t> valid_or_throw(const EnsembleRecord& rec, std::size_t minimum) {
  auto v = rec.valid_trajectories();
  if (v.size() < minimum) throw DataError("not enough valid trajectories");
  return v;
}

// Drift term evaluated at sample index (per trajectory).
struct TermSpec {
  std::string name;
  std::function<double(std::size_t traj, std::size_t ti)> at;
};

double max_abs_derivative(std::span<const double> x, double h, int order) {
  double best = 0.0;
  for (std::size_t i = 0; i + static_cast<std::size_t>(order) < x.size(); ++i) {
    double d = 0.0;
    if (order == 2) d = x[i + 2] - 2.0 * x[i + 1] + x[i];
    if (order == 3) d = x[i + 3] - 3.0 * x[i + 2] + 3.0 * x[i + 1] - x[i];
    best = std::max(best, std::abs(d) / std::pow(h, order));
  }
  return best;
}

BalanceReport balance(const EnsembleRecord& rec, const SimConfig& cfg, Window window, std::string_view functional,
                      const std::vector<TermSpec>& terms) {
  const auto ws = window_samples(rec, window);
  const auto valid = valid_or_throw(rec, 1);
  const std::size_t obs = rec.observable_id(functional);
  const double lambda = cfg.lambda;
  const double h = ws.spacing;
  const std::size_t nmid = ws.idx.size() - 1;

  std::vector<double> lhs_traj;
  std::vector<std::vector<double>> term_traj(terms.size());
  std::vector<double> resid_traj;
  std::vector<double> mean_resid(nmid, 0.0);
  std::vector<double> mean_x(ws.idx.size(), 0.0);
  std::vector<std::vector<double>> mean_terms(terms.size(), std::vector<double>(ws.idx.size(), 0.0));

  for (std::size_t j : valid) {
    const auto x = rec.series(obs, j);
    double lhs_sum = 0.0;
    std::vector<double> tsum(terms.size(), 0.0);
    for (std::size_t m = 0; m < nmid; ++m) {
      const std::size_t a = ws.idx[m];
      const std::size_t b = ws.idx[m + 1];
      const double lhs = (x[b] - x[a]) / h + lambda * (x[a] + x[b]);
      double rhs = 0.0;
      for (std::size_t q = 0; q < terms.size(); ++q) {
        const double v = 0.5 * (terms[q].at(j, a) + terms[q].at(j, b));
        tsum[q] += v;
        rhs += v;
      }
      lhs_sum += lhs;
      mean_resid[m] += lhs - rhs;
    }
    for (std::size_t m = 0; m < ws.idx.size(); ++m) {
      mean_x[m] += x[ws.idx[m]];
      for (std::size_t q = 0; q < terms.size(); ++q) mean_terms[q][m] += terms[q].at(j, ws.idx[m]);
    }
    lhs_traj.push_back(lhs_sum / static_cast<double>(nmid));
    double rsum = 0.0;
    for (std::size_t q = 0; q < terms.size(); ++q) {
      term_traj[q].push_back(tsum[q] / static_cast<double>(nmid));
      rsum += term_traj[q].back();
    }
    resid_traj.push_back(lhs_traj.back() - rsum);
  }

  const double n = static_cast<double>(valid.size());
  BalanceReport r;
  r.window = window;
  r.dt_used = cfg.dt;
  r.sample_spacing = h;
  const Estimate lhs = summarize(lhs_traj);
  r.lhs = lhs.mean;
  r.lhs_se = lhs.std_error;
  for (std::size_t q = 0; q < terms.size(); ++q) {
    const Estimate e = summarize(term_traj[q]);
    r.terms.push_back({terms[q].name, e.mean, e.std_error});
    r.rhs += e.mean;
  }
  const Estimate res = summarize(resid_traj);
  r.residual = r.lhs - r.rhs;
  r.residual_se = res.std_error;
  for (double v : mean_resid) r.max_abs_pointwise = std::max(r.max_abs_pointwise, std::abs(v / n));

  // Midpoint difference quotient: h^2/24 |X'''|; midpoint averages: h^2/8 |f''|.
  for (double& v : mean_x) v /= n;
  double bound = h * h / 24.0 * max_abs_derivative(mean_x, h, 3) + lambda * h * h / 4.0 * max_abs_derivative(mean_x, h, 2);
  for (auto& mt : mean_terms) {
    for (double& v : mt) v /= n;
    bound += h * h / 8.0 * max_abs_derivative(mt, h, 2);
  }
  r.discretization_bound = bound;
  if (rec.flagged_count() > 0) {
    r.note = std::to_string(rec.flagged_count()) + " blown-up trajectories excluded";
  }
  return r;
}

}  // namespace

BalanceReport mass_balance_residual(const EnsembleRecord& rec, const SimConfig& cfg, const NoiseOperator& phi,
                                    Window window) {
  const double hs = hs_norm_sq(phi, HsWeight::identity);
  std::vector<TermSpec> terms{{"noise_injection", [hs](std::size_t, std::size_t) { return hs; }}};
  return balance(rec, cfg, window, observables::mass, terms);
}

BalanceReport energy_balance_residual(const EnsembleRecord& rec, const SimConfig& cfg, const NoiseOperator& phi,
                                      Window window) {
  const double sigma = cfg.sigma;
  const double lambda = cfg.lambda;
  const double hs = hs_norm_sq(phi, HsWeight::identity);
  const double grad_hs = hs_norm_sq(phi, HsWeight::gradient);
  const double inv_vol = 1.0 / cfg.grid.volume();
  const std::size_t pot = rec.observable_id(observables::potential);
  const std::size_t nlw = rec.observable_id(observables::nl_weight);
  const EnsembleRecord* r = &rec;

  std::vector<TermSpec> terms{
      {"nonlinear_dissipation",
       [=](std::size_t j, std::size_t t) { return lambda * sigma / (sigma + 1.0) * r->series(pot, j)[t]; }},
      {"gradient_noise", [=](std::size_t, std::size_t) { return 0.5 * grad_hs; }},
      {"weighted_noise", [=](std::size_t j, std::size_t t) { return -0.5 * hs * inv_vol * r->series(nlw, j)[t]; }},
      {"real_part_correction",
       [=](std::size_t j, std::size_t t) { return -sigma * 0.5 * hs * inv_vol * r->series(nlw, j)[t]; }},
  };
  BalanceReport report = balance(rec, cfg, window, observables::energy, terms);
  if (sigma > 0.0 && sigma < 1.0) {
    if (!report.note.empty()) report.note += "; ";
    report.note += "|u|^(2 sigma - 2) clamped at |u| = 1e-8 in direct sums";
  }
  return report;
}

void write_balance_csv(const BalanceReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  char buf[256];
  auto row = [&](const std::string& name, double v, double se) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", name.c_str(), v, se);
    out << buf;
  };
  out << "term,value,std_error\n";
  row("lhs", report.lhs, report.lhs_se);
  for (const auto& t : report.terms) row(t.name, t.value, t.std_error);
  row("rhs", report.rhs, 0.0);
  row("residual", report.residual, report.residual_se);
}

ItoCorrections ito_corrections_closed_form(const SpectralField& u, const NoiseOperator& phi, double sigma) {
  const double hs = hs_norm_sq(phi, HsWeight::identity);
  const double w = functionals::power_integral(u, 2.0 * sigma) / u.grid().volume();
  ItoCorrections c;
  c.weighted_hs = hs * w;
  c.real_part_sum = 0.5 * hs * w;
  const auto a = phi.amplitudes();
  for (std::size_t i : phi.active_modes()) c.noise_projection += std::norm(a[i]) * std::norm(u[i]);
  c.noise_projection *= 0.5;
  return c;
}

ItoCorrections ito_corrections_direct(const SpectralField& u, const NoiseOperator& phi, double sigma) {
  const Grid& g = u.grid();
  const PhysicalField v = to_physical(u);
  const double hd = g.cell_volume();
  const double norm = 1.0 / std::sqrt(g.volume());
  const auto a = phi.amplitudes();
  ItoCorrections c;
  std::vector<Complex> direction(g.size());
  for (std::size_t i : phi.active_modes()) {
    const Mode k = g.mode(i);
    const double base = 2.0 * std::numbers::pi / g.length();
    for (const Complex unit : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
      const Complex coeff = a[i] * unit * std::sqrt(0.5) * norm;
      Complex inner = 0.0;
      double weighted = 0.0;
      double real_part = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const auto x = grid_point(g, j);
        const Complex f = coeff * std::polar(1.0, base * (k[0] * x[0] + k[1] * x[1]));
        const double abs_sq = std::norm(v[j]);
        weighted += functionals::pow_abs_sq(abs_sq, sigma) * std::norm(f);
        const double clamped = std::max(abs_sq, kSingularClamp * kSingularClamp);
        const double re = std::real(std::conj(v[j]) * f);
        real_part += functionals::pow_abs_sq(clamped, sigma - 1.0) * re * re;
        inner += std::conj(v[j]) * f;
      }
      c.weighted_hs += hd * weighted;
      c.real_part_sum += hd * real_part;
      c.noise_projection += std::pow(std::real(hd * inner), 2);
    }
  }
  return c;
}

bool TransientPoint::within(double z) const noexcept {
  const double tol = z * std_error + 1e-12 * (std::abs(predicted) + std::abs(estimated));
  return std::abs(estimated - predicted) <= tol;
}

std::vector<TransientPoint> transient_mass_curve(const EnsembleRecord& rec, const SimConfig& cfg,
                                                 const NoiseOperator& phi) {
  const auto valid = valid_or_throw(rec, 1);
  const std::size_t obs = rec.observable_id(observables::mass);
  const std::size_t t0 = rec.time_index(0.0);
  const double hs = hs_norm_sq(phi, HsWeight::identity);
  const double lambda = cfg.lambda;

  std::vector<double> m0;
  for (auto j : valid) m0.push_back(rec.series(obs, j)[t0]);
  const double mean_m0 = summarize(m0).mean;

  std::vector<TransientPoint> out;
  const auto times = rec.sample_times();
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    const double decay = std::exp(-2.0 * lambda * t);
    std::vector<double> mt;
    std::vector<double> paired;
    for (std::size_t q = 0; q < valid.size(); ++q) {
      const double v = rec.series(obs, valid[q])[ti];
      mt.push_back(v);
      paired.push_back(v - decay * m0[q]);
    }
    TransientPoint p;
    p.t = t;
    p.predicted = decay * mean_m0 + hs * (-std::expm1(-2.0 * lambda * t)) / (2.0 * lambda);
    p.estimated = summarize(mt).mean;
    p.std_error = summarize(paired).std_error;
    out.push_back(p);
  }
  return out;
}

MomentCheck stationary_moment_check(const EnsembleRecord& rec, const NoiseOperator& phi, double lambda, int k,
                                    Window window) {
  if (k < 1) throw ConfigError("moment order k must be >= 1");
  const auto valid = valid_or_throw(rec, 2);
  const auto times = rec.sample_times();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= window.t_start - 1e-9 && times[i] <= window.t_end + 1e-9) idx.push_back(i);
  }
  if (idx.empty()) throw DataError("insufficient stationary samples in window");
  const std::size_t mobs = rec.observable_id(observables::mass);
  const std::size_t qobs = rec.observable_id(observables::noise_projection);
  const double hs = hs_norm_sq(phi, HsWeight::identity);

  std::vector<double> lhs, noise, proj, diff, mk;
  for (auto j : valid) {
    const auto m = rec.series(mobs, j);
    const auto q = rec.series(qobs, j);
    double sl = 0.0, sn = 0.0, sp = 0.0, smk = 0.0;
    for (auto t : idx) {
      const double p = std::pow(m[t], k);
      sl += 2.0 * lambda * p * m[t];
      sn += hs * p;
      sp += 2.0 * k * std::pow(m[t], k - 1) * q[t];
      smk += p;
    }
    const double c = static_cast<double>(idx.size());
    lhs.push_back(sl / c);
    noise.push_back(sn / c);
    proj.push_back(sp / c);
    diff.push_back((sl - sn - sp) / c);
    mk.push_back(smk / c);
  }
  MomentCheck r;
  r.k = k;
  const Estimate el = summarize(lhs);
  const Estimate ed = summarize(diff);
  const Estimate em = summarize(mk);
  r.lhs = el.mean;
  r.lhs_se = el.std_error;
  r.noise_term = summarize(noise).mean;
  r.projection_term = summarize(proj).mean;
  r.rhs = r.noise_term + r.projection_term;
  r.difference = ed.mean;
  r.difference_se = ed.std_error;
  r.moment_k = em.mean;
  r.moment_k_se = em.std_error;
  r.bound = (hs + 0.5 * k) * em.mean;
  const double rel = em.mean > 0.0 ? em.std_error / em.mean : 0.0;
  r.equality_ok = std::abs(r.difference) <= 3.0 * r.difference_se;
  r.bound_ok = r.lhs <= r.bound * (1.0 + 3.0 * rel);
  return r;
}

std::vector<IncrementPoint> aldous_increment(const EnsembleRecord& rec, std::span<const double> base_times,
                                             std::span<const double> deltas) {
  if (base_times.empty()) throw DataError("no base times for increments");
  const auto valid = valid_or_throw(rec, 1);
  std::vector<IncrementPoint> out;
  for (double delta : deltas) {
    IncrementPoint p;
    p.delta = delta;
    if (delta == 0.0) {
      out.push_back(p);
      continue;
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (double t : base_times) pairs.emplace_back(rec.snapshot_index(t), rec.snapshot_index(t + delta));
    std::vector<double> per_traj;
    for (auto j : valid) {
      double s = 0.0;
      for (const auto& [a, b] : pairs) s += functionals::mass(rec.snapshot(j, b) - rec.snapshot(j, a));
      per_traj.push_back(s / static_cast<double>(pairs.size()));
    }
    const Estimate e = summarize(per_traj);
    p.mean = e.mean;
    p.std_error = e.std_error;
    out.push_back(p);
  }
  return out;
}

double aldous_linear_prediction(const NoiseOperator& phi, double lambda, double delta, double potential) {
  const auto k2 = phi.grid().kappa_sq();
  const auto a = phi.amplitudes();
  double s = 0.0;
  for (std::size_t i : phi.active_modes()) {
    s += 2.0 * (1.0 - std::exp(-lambda * delta) * std::cos((k2[i] - potential) * delta)) * std::norm(a[i]) / (2.0 * lambda);
  }
  return s;
}

bool increments_shrink(std::span<const IncrementPoint> curve) {
  std::vector<IncrementPoint> c(curve.begin(), curve.end());
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    const double se = std::max(c[i].std_error, c[i + 1].std_error);
    if (!(c[i + 1].mean < c[i].mean + 3.0 * se) && !(c[i + 1].mean == 0.0 && c[i].mean == 0.0)) return false;
  }
  return true;
}

TailProfile tightness_tail_profile(const EnsembleRecord& rec, std::span<const int> cutoffs) {
  const auto valid = valid_or_throw(rec, 1);
  TailProfile p;
  p.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  std::sort(p.cutoffs.begin(), p.cutoffs.end());
  const std::size_t nt = rec.sample_times().size();
  for (int c : p.cutoffs) {
    const std::size_t obs = rec.observable_id(observables::tail(c));
    double sup = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (auto j : valid) s += rec.series(obs, j)[t];
      sup = std::max(sup, s / static_cast<double>(valid.size()));
    }
    p.sup_mean.push_back(sup);
  }
  for (std::size_t i = 0; i + 1 < p.sup_mean.size(); ++i) {
    if (p.sup_mean[i + 1] > p.sup_mean[i]) p.nonincreasing = false;
  }
  return p;
}

std::optional<double> gn_ratio(const SpectralField& f, double sigma) {
  const double l2_sq = functionals::mass(f);
  if (l2_sq == 0.0) return std::nullopt;
  const double d = f.grid().dim();
  const double h1 = std::sqrt(functionals::sobolev_norm_sq(f, 1.0));
  const double l2 = std::sqrt(l2_sq);
  const double num = functionals::power_integral(f, 2.0 * sigma + 2.0);
  return num / (std::pow(h1, d * sigma) * std::pow(l2, sigma * (2.0 - d) + 2.0));
}

}  // namespace snls
