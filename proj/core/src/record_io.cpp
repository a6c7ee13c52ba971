#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "snls/ensemble.hpp"
#include "snls/errors.hpp"

namespace snls {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw DataError("malformed number '" + s + "'");
  return v;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  return in;
}

}  // namespace

std::vector<fs::path> write_record_csv(const EnsembleRecord& rec, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const auto times = rec.sample_times();
  const std::size_t nt = times.size();
  const std::size_t ntraj = rec.trajectories();

  {
    const fs::path p = dir / "record.meta";
    auto out = open_out(p);
    const Grid& g = rec.grid();
    out << "dim=" << g.dim() << "\nlength=" << fmt(g.length()) << "\npoints=" << g.points()
        << "\nlambda=" << fmt(rec.meta.lambda) << "\nsigma=" << fmt(rec.meta.sigma)
        << "\ndt=" << fmt(rec.meta.dt) << "\nseed=" << rec.meta.seed << "\nk_report=" << rec.meta.k_report
        << "\ntail_cutoffs=" << join(rec.meta.tail_cutoffs) << "\ntrajectories=" << ntraj
        << "\nsample_times=" << join(std::vector<double>(times.begin(), times.end()))
        << "\nsnapshot_times="
        << join(std::vector<double>(rec.snapshot_times().begin(), rec.snapshot_times().end()))
        << "\nobservables=";
    for (std::size_t i = 0; i < rec.observable_names().size(); ++i) {
      out << (i ? "," : "") << rec.observable_names()[i];
    }
    out << '\n';
    written.push_back(p);
  }

  for (std::size_t obs = 0; obs < rec.observable_names().size(); ++obs) {
    const fs::path p = dir / (rec.observable_names()[obs] + ".csv");
    auto out = open_out(p);
    out << 't';
    for (std::size_t j = 0; j < ntraj; ++j) out << ",traj_" << j;
    out << '\n';
    for (std::size_t ti = 0; ti < nt; ++ti) {
      out << fmt(times[ti]);
      for (std::size_t j = 0; j < ntraj; ++j) out << ',' << fmt(rec.series(obs, j)[ti]);
      out << '\n';
    }
    written.push_back(p);
  }

  {
    const fs::path p = dir / "summary.csv";
    auto out = open_out(p);
    out << "t,observable,mean,std_error,n_valid\n";
    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (const auto& name : rec.observable_names()) {
        const Estimate e = estimate_observable(rec, name, times[ti]);
        out << fmt(times[ti]) << ',' << name << ',' << fmt(e.mean) << ',' << fmt(e.std_error) << ','
            << e.n << '\n';
      }
    }
    written.push_back(p);
  }

  {
    const fs::path p = dir / "trajectories.csv";
    auto out = open_out(p);
    out << "traj,index,blown_up,blowup_time,blowup_norm\n";
    for (std::size_t j = 0; j < ntraj; ++j) {
      const auto& s = rec.status(j);
      out << j << ',' << s.index << ',' << (s.blown_up ? 1 : 0) << ',' << fmt(s.blowup_time) << ','
          << fmt(s.blowup_norm) << '\n';
    }
    written.push_back(p);
  }

  if (!rec.snapshot_times().empty()) {
    const fs::path p = dir / "snapshots.csv";
    auto out = open_out(p);
    out << "traj,t,k1,k2,re,im\n";
    const Grid& g = rec.grid();
    for (std::size_t j = 0; j < ntraj; ++j) {
      for (std::size_t s = 0; s < rec.snapshot_times().size(); ++s) {
        const SpectralField& f = rec.snapshot(j, s);
        for (std::size_t i = 0; i < f.size(); ++i) {
          if (f[i] == Complex{}) continue;
          const Mode k = g.mode(i);
          out << j << ',' << fmt(rec.snapshot_times()[s]) << ',' << k[0] << ',' << k[1] << ','
              << fmt(f[i].real()) << ',' << fmt(f[i].imag()) << '\n';
        }
      }
    }
    written.push_back(p);
  }
  return written;
}

EnsembleRecord read_record_csv(const fs::path& dir) {
  std::map<std::string, std::string> meta;
  {
    auto in = open_in(dir / "record.meta");
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw DataError("record.meta lacks '" + key + "'");
    return it->second;
  };
  auto doubles = [&](const std::string& key) {
    std::vector<double> v;
    for (const auto& s : split(get(key), ',')) {
      if (!s.empty()) v.push_back(parse_double(s));
    }
    return v;
  };

  const Grid grid(std::stoi(get("dim")), parse_double(get("length")), std::stoi(get("points")));
  const auto ntraj = static_cast<std::size_t>(std::stoull(get("trajectories")));
  std::vector<std::string> names;
  for (const auto& s : split(get("observables"), ',')) {
    if (!s.empty()) names.push_back(s);
  }
  EnsembleRecord rec(grid, doubles("sample_times"), names, ntraj, doubles("snapshot_times"));
  rec.meta.lambda = parse_double(get("lambda"));
  rec.meta.sigma = parse_double(get("sigma"));
  rec.meta.dt = parse_double(get("dt"));
  rec.meta.seed = std::stoull(get("seed"));
  rec.meta.k_report = std::stoi(get("k_report"));
  for (double c : doubles("tail_cutoffs")) rec.meta.tail_cutoffs.push_back(static_cast<int>(c));

  const std::size_t nt = rec.sample_times().size();
  for (std::size_t obs = 0; obs < names.size(); ++obs) {
    auto in = open_in(dir / (names[obs] + ".csv"));
    std::string line;
    std::getline(in, line);
    for (std::size_t ti = 0; ti < nt; ++ti) {
      if (!std::getline(in, line)) throw DataError(names[obs] + ".csv is truncated");
      const auto cells = split(line, ',');
      if (cells.size() != ntraj + 1) throw DataError(names[obs] + ".csv has a malformed row");
      for (std::size_t j = 0; j < ntraj; ++j) rec.series(obs, j)[ti] = parse_double(cells[j + 1]);
    }
  }

  {
    auto in = open_in(dir / "trajectories.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto c = split(line, ',');
      if (c.size() != 5) throw DataError("trajectories.csv has a malformed row");
      auto& s = rec.status(std::stoull(c[0]));
      s.index = std::stoull(c[1]);
      s.blown_up = c[2] == "1";
      s.blowup_time = parse_double(c[3]);
      s.blowup_norm = parse_double(c[4]);
    }
  }

  if (!rec.snapshot_times().empty()) {
    auto in = open_in(dir / "snapshots.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto c = split(line, ',');
      if (c.size() != 6) throw DataError("snapshots.csv has a malformed row");
      SpectralField& f = rec.snapshot(std::stoull(c[0]), rec.snapshot_index(parse_double(c[1])));
      f.set({std::stoi(c[2]), std::stoi(c[3])}, Complex(parse_double(c[4]), parse_double(c[5])));
    }
  }
  return rec;
}

}  // namespace snls
