#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ewaldmd/sim_driver.hpp"

namespace ewaldmd {

// Median of `samples` steps after `warmup` discarded ones. Sweeps build every
// system first and sample them round-robin.
struct TimingOptions {
  int warmup = 2;
  int samples = 5;
};

struct ComplexityRow {
  long long n = 0;
  double t_total = 0.0;
  double t_sr = 0.0;
  double t_alg1 = 0.0;
  double t_alg2 = 0.0;
  double alpha = 0.0;
  double r_c = 0.0;
  std::size_t n_k = 0;
};

struct ComplexityReport {
  std::vector<ComplexityRow> rows;
  std::optional<double> slope;  // d log t / d log N; needs two or more sizes
};

inline constexpr const char* kComplexityHeader = "N,t_total_per_iter,t_sr,t_alg1,t_alg2,alpha,r_c,N_k";
inline constexpr const char* kThreadsHeader = "threads,t_per_iter,speedup,efficiency";

// Replaces the measured t_total for each N (test mode).
using SyntheticTimer = std::function<double(long long n)>;

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

// Rock-salt systems at the base configuration's density, auto parameters.
ComplexityReport bench_complexity(const SimConfig& base, std::span<const long long> n_list,
                                  const TimingOptions& timing = {}, const SyntheticTimer& synthetic = {});

struct ThreadRow {
  std::size_t threads = 1;
  double t_per_iter = 0.0;
  double speedup = 1.0;
  double efficiency = 1.0;
};

struct ThreadReport {
  std::vector<ThreadRow> rows;
  std::vector<std::string> warnings;
};

// The sweep list overrides any configured thread count (warned when
// `threads_configured` is set).
ThreadReport bench_threads(const SimConfig& config, std::span<const std::size_t> thread_list,
                           const TimingOptions& timing = {}, bool threads_configured = false);

std::vector<std::string> complexity_csv_rows(const ComplexityReport& report);
std::vector<std::string> threads_csv_rows(const ThreadReport& report);

// Writes the header when the file is new or empty, otherwise checks that the
// existing header matches and appends.
void append_csv(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& rows);

}  // namespace ewaldmd
