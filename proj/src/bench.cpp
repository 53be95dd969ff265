#include "ewaldmd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "ewaldmd/error.hpp"

namespace ewaldmd {

namespace {

std::string format_row(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// One system advanced a step at a time for timing.
class TimedSystem {
 public:
  TimedSystem(const SimConfig& config, std::size_t workers)
      : config_(config), ps_(build_system(config)), engine_(workers),
        field_(config, ps_.box(), static_cast<long long>(ps_.size())) {
    assign_velocities(ps_, config_.velocity_scale, config_.seed);
    field_.assemble(engine_, ps_);
  }

  StepRecord step() {
    ForceAssembler assemble = [this](ParticleSet& p) { return field_.assemble(engine_, p).total(); };
    const auto t0 = std::chrono::steady_clock::now();
    velocity_verlet_step(engine_, ps_, config_.dt, assemble);
    StepRecord rec;
    rec.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const ForceTimings& ft = field_.last_timings();
    rec.t_short_range = ft.short_range;
    rec.t_rho_hat = ft.rho_hat;
    rec.t_long_range = ft.long_range;
    rec.t_lj = ft.lj;
    return rec;
  }

 private:
  SimConfig config_;
  ParticleSet ps_;
  LoopEngine engine_;
  ForceField field_;
};

// Times every system round-robin, one step each per round, so slow drift in
// machine speed hits all of them alike. Returns the sampled records per system.
std::vector<std::vector<StepRecord>> time_interleaved(std::vector<std::unique_ptr<TimedSystem>>& systems,
                                                      const TimingOptions& timing) {
  if (timing.samples < 1 || timing.warmup < 0) throw Error(ErrorKind::invalid_argument, "bad timing options");
  for (auto& s : systems) {
    for (int w = 0; w < timing.warmup; ++w) s->step();
  }
  std::vector<std::vector<StepRecord>> records(systems.size());
  for (int k = 0; k < timing.samples; ++k) {
    for (std::size_t i = 0; i < systems.size(); ++i) records[i].push_back(systems[i]->step());
  }
  return records;
}

double median_of(const std::vector<StepRecord>& recs, double StepRecord::*field) {
  std::vector<double> v;
  v.reserve(recs.size());
  for (const auto& r : recs) v.push_back(r.*field);
  return median(std::move(v));
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::invalid_argument, "median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "slope fit needs at least two matching points");
  }
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "log-log fit needs positive values");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error(ErrorKind::invalid_argument, "slope fit needs distinct sizes");
  return sxy / sxx;
}

ComplexityReport bench_complexity(const SimConfig& base, std::span<const long long> n_list,
                                  const TimingOptions& timing, const SyntheticTimer& synthetic) {
  const double spacing = base.box / std::cbrt(static_cast<double>(base.n_particles));
  const std::size_t workers = resolve_thread_count(base.threads);
  ComplexityReport report;
  std::vector<std::unique_ptr<TimedSystem>> systems;
  for (const long long n : n_list) {
    SimConfig c = base;
    c.n_particles = n;
    c.box = spacing * std::cbrt(static_cast<double>(n));
    const ParticleSet probe = build_system(c);
    c.box = probe.box().edge_length();

    ComplexityRow row;
    row.n = n;
    if (c.coulomb) {
      const EwaldParams p = choose_parameters(n, probe.box(), c.tolerance, c.ewald);
      row.alpha = p.alpha;
      row.r_c = p.r_cutoff;
      row.n_k = enumerate_kvectors(probe.box(), p).count();
    }
    if (synthetic) {
      row.t_total = synthetic(n);
    } else {
      systems.push_back(std::make_unique<TimedSystem>(c, workers));
    }
    report.rows.push_back(row);
  }
  if (!synthetic) {
    const auto records = time_interleaved(systems, timing);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      ComplexityRow& row = report.rows[i];
      row.t_total = median_of(records[i], &StepRecord::wall);
      row.t_sr = median_of(records[i], &StepRecord::t_short_range);
      row.t_alg1 = median_of(records[i], &StepRecord::t_rho_hat);
      row.t_alg2 = median_of(records[i], &StepRecord::t_long_range);
    }
  }
  if (report.rows.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& r : report.rows) {
      xs.push_back(static_cast<double>(r.n));
      ys.push_back(r.t_total);
    }
    report.slope = fit_loglog_slope(xs, ys);
  }
  return report;
}

ThreadReport bench_threads(const SimConfig& config, std::span<const std::size_t> thread_list,
                           const TimingOptions& timing, bool threads_configured) {
  ThreadReport report;
  if (thread_list.empty()) throw Error(ErrorKind::invalid_argument, "empty thread list");
  if (threads_configured) {
    report.warnings.push_back("run.threads = " + std::to_string(config.threads) +
                              " is ignored; the thread sweep list takes precedence");
  }
  std::vector<std::unique_ptr<TimedSystem>> systems;
  for (const std::size_t threads : thread_list) {
    if (threads == 0) throw Error(ErrorKind::invalid_argument, "thread counts in a sweep must be positive");
    SimConfig c = config;
    c.threads = threads;
    systems.push_back(std::make_unique<TimedSystem>(c, threads));
  }
  const auto records = time_interleaved(systems, timing);
  for (std::size_t i = 0; i < thread_list.size(); ++i) {
    ThreadRow row;
    row.threads = thread_list[i];
    row.t_per_iter = median_of(records[i], &StepRecord::wall);
    report.rows.push_back(row);
  }
  // Speedup is relative to the single-worker row when present, else to the
  // first row scaled by its worker count.
  const auto one = std::find_if(report.rows.begin(), report.rows.end(), [](const ThreadRow& r) { return r.threads == 1; });
  const ThreadRow& ref = one != report.rows.end() ? *one : report.rows.front();
  const double baseline = ref.t_per_iter * static_cast<double>(ref.threads);
  for (auto& row : report.rows) {
    row.speedup = baseline / row.t_per_iter;
    row.efficiency = row.speedup / static_cast<double>(row.threads);
  }
  return report;
}

std::vector<std::string> complexity_csv_rows(const ComplexityReport& report) {
  std::vector<std::string> rows;
  for (const auto& r : report.rows) {
    rows.push_back(format_row("%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu", r.n, r.t_total, r.t_sr, r.t_alg1, r.t_alg2,
                              r.alpha, r.r_c, r.n_k));
  }
  return rows;
}

std::vector<std::string> threads_csv_rows(const ThreadReport& report) {
  std::vector<std::string> rows;
  for (const auto& r : report.rows) {
    rows.push_back(format_row("%zu,%.9g,%.6g,%.6g", r.threads, r.t_per_iter, r.speedup, r.efficiency));
  }
  return rows;
}

void append_csv(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& rows) {
  bool fresh = true;
  if (std::ifstream existing(path); existing) {
    std::string first;
    if (std::getline(existing, first)) {
      if (first != header) {
        throw Error(ErrorKind::io_error, path.string() + " has header '" + first + "', expected '" + header + "'");
      }
      fresh = false;
    }
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  if (fresh) out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
}

}  // namespace ewaldmd
