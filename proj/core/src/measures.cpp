#include "snls/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "snls/errors.hpp"

namespace snls {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> values, std::vector<double> weights) {
  if (values.empty()) throw ConfigError("empirical measure needs at least one sample");
  if (values.size() != weights.size()) throw ConfigError("values and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ConfigError("empirical measure sample is not finite");
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw ConfigError("weights must be positive");
    total += weights[i];
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  values_.reserve(order.size());
  weights_.reserve(order.size());
  for (auto i : order) {
    values_.push_back(values[i]);
    weights_.push_back(weights[i] / total);
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<double> values) {
  std::vector<double> w(values.size(), 1.0);
  return EmpiricalMeasure(std::move(values), std::move(w));
}

EmpiricalMeasure EmpiricalMeasure::merge(const EmpiricalMeasure& a, double wa, const EmpiricalMeasure& b,
                                         double wb) {
  if (!(wa > 0.0) || !(wb > 0.0)) throw ConfigError("mixture weights must be positive");
  std::vector<double> v(a.values_.begin(), a.values_.end());
  v.insert(v.end(), b.values_.begin(), b.values_.end());
  std::vector<double> w;
  w.reserve(v.size());
  for (double x : a.weights_) w.push_back(wa * x);
  for (double x : b.weights_) w.push_back(wb * x);
  return EmpiricalMeasure(std::move(v), std::move(w));
}

double EmpiricalMeasure::mean() const noexcept { return moment(1); }

double EmpiricalMeasure::moment(int p) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += weights_[i] * std::pow(values_[i], p);
  return s;
}

double EmpiricalMeasure::cdf(double x) const noexcept {
  const auto end = std::upper_bound(values_.begin(), values_.end(), x);
  double s = 0.0;
  for (auto it = values_.begin(); it != end; ++it) s += weights_[static_cast<std::size_t>(it - values_.begin())];
  return std::min(1.0, s);
}

double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  const auto va = a.values();
  const auto wa = a.weights();
  const auto vb = b.values();
  const auto wb = b.weights();
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  double total = 0.0;
  double x = std::min(va[0], vb[0]);
  // Sweep the merged support; between consecutive atoms both CDFs are constant.
  while (i < va.size() || j < vb.size()) {
    const double next = (j >= vb.size() || (i < va.size() && va[i] <= vb[j])) ? va[i] : vb[j];
    total += std::abs(fa - fb) * (next - x);
    x = next;
    while (i < va.size() && va[i] == x) fa += wa[i++];
    while (j < vb.size() && vb[j] == x) fb += wb[j++];
  }
  return total;
}

namespace {

std::vector<std::size_t> window_indices(const EnsembleRecord& rec, double t_begin, double t_end) {
  const auto times = rec.sample_times();
  const double eps = 1e-9 * std::max(1.0, std::abs(t_end));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_begin - eps && times[i] <= t_end + eps) idx.push_back(i);
  }
  if (idx.size() < 2) throw DataError("fewer than 2 sample times in the averaging window");
  const double step = times[idx[1]] - times[idx[0]];
  for (std::size_t k = 1; k < idx.size(); ++k) {
    if (std::abs(times[idx[k]] - times[idx[k - 1]] - step) > 1e-9 * std::max(1.0, step) + 1e-12) {
      throw DataError("sampling schedule is not uniform over the averaging window");
    }
  }
  return idx;
}

EmpiricalMeasure pool(const EnsembleRecord& rec, std::size_t obs, std::span<const std::size_t> trajs,
                      std::span<const std::size_t> times) {
  std::vector<double> v;
  v.reserve(trajs.size() * times.size());
  for (auto j : trajs) {
    const auto s = rec.series(obs, j);
    for (auto t : times) v.push_back(s[t]);
  }
  return EmpiricalMeasure::uniform(std::move(v));
}

std::vector<std::size_t> resample(std::span<const std::size_t> from, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, from.size() - 1);
  std::vector<std::size_t> out(from.size());
  for (auto& x : out) x = from[pick(rng)];
  return out;
}

std::vector<std::size_t> require_valid(const EnsembleRecord& rec) {
  auto valid = rec.valid_trajectories();
  if (valid.empty()) throw DataError("no valid trajectories");
  return valid;
}

}  // namespace

EmpiricalMeasure kb_average(const EnsembleRecord& rec, std::string_view name, double t_begin, double t_end) {
  const auto obs = rec.observable_id(name);
  const auto idx = window_indices(rec, t_begin, t_end);
  return pool(rec, obs, require_valid(rec), idx);
}

EmpiricalMeasure kb_average(const EnsembleRecord& rec, std::string_view name, double horizon) {
  if (horizon > rec.sample_times().back() * (1.0 + 1e-9)) throw DataError("horizon beyond the last sample time");
  return kb_average(rec, name, 0.0, horizon);
}

EmpiricalMeasure marginal(const EnsembleRecord& rec, std::string_view name, double t) {
  const auto obs = rec.observable_id(name);
  const std::size_t ti = rec.time_index(t);
  return pool(rec, obs, require_valid(rec), std::span<const std::size_t>(&ti, 1));
}

double stationarity_gap(const EnsembleRecord& rec, std::string_view name, double t1, double t2) {
  return wasserstein1(marginal(rec, name, t1), marginal(rec, name, t2));
}

double gap_resolution(const EnsembleRecord& rec, std::string_view name, double t, int reps, std::uint64_t seed) {
  const auto obs = rec.observable_id(name);
  const std::size_t ti = rec.time_index(t);
  const auto valid = require_valid(rec);
  const std::span<const std::size_t> one(&ti, 1);
  const EmpiricalMeasure base = pool(rec, obs, valid, one);
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += wasserstein1(base, pool(rec, obs, resample(valid, rng), one));
  return sum / reps;
}

KbConvergence kb_convergence(const EnsembleRecord& rec, std::string_view name, std::vector<double> horizons,
                             int reps, std::uint64_t seed) {
  KbConvergence out;
  out.horizons = std::move(horizons);
  if (out.horizons.size() < 2) return out;
  const auto obs = rec.observable_id(name);
  const auto valid = require_valid(rec);
  std::vector<std::vector<std::size_t>> windows;
  for (double h : out.horizons) {
    if (h > rec.sample_times().back() * (1.0 + 1e-9)) throw DataError("horizon beyond the last sample time");
    windows.push_back(window_indices(rec, 0.0, h));
  }

  auto distances = [&](std::span<const std::size_t> trajs) {
    std::vector<EmpiricalMeasure> mu;
    for (const auto& w : windows) mu.push_back(pool(rec, obs, trajs, w));
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < mu.size(); ++i) d.push_back(wasserstein1(mu[i], mu[i + 1]));
    return d;
  };

  out.distances = distances(valid);
  const std::size_t nd = out.distances.size();
  std::vector<std::vector<double>> diffs(nd > 0 ? nd - 1 : 0);
  std::mt19937_64 rng(seed);
  for (int r = 0; r < reps; ++r) {
    const auto d = distances(resample(valid, rng));
    for (std::size_t i = 0; i + 1 < nd; ++i) diffs[i].push_back(d[i + 1] - d[i]);
  }
  for (std::size_t i = 0; i + 1 < nd; ++i) {
    const auto& x = diffs[i];
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double se = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
    out.difference_se.push_back(se);
    if (out.distances[i + 1] > out.distances[i] + 3.0 * se) out.nonincreasing = false;
  }
  return out;
}

void write_measure_csv(const EmpiricalMeasure& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "value,weight\n";
  char buf[64];
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m.values()[i], m.weights()[i]);
    out << buf;
  }
}

}  // namespace snls
