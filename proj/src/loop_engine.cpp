#include "ewaldmd/loop_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace ewaldmd {

namespace {

// Bins wrapped positions into per_dim^3 cells in CSR layout.
void bin_particles(const ParticleSet& ps, double L, std::size_t per_dim, std::vector<std::size_t>& cell_of,
                   std::vector<std::size_t>& start, std::vector<std::size_t>& members) {
  const double edge = L / static_cast<double>(per_dim);
  const std::size_t ncell = per_dim * per_dim * per_dim;
  const auto pos = ps.data(Property::position);
  cell_of.resize(ps.size());
  start.assign(ncell + 1, 0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::size_t idx[3];
    for (int a = 0; a < 3; ++a) {
      const double x = pos[3 * i + a];
      if (!(x >= 0.0 && x < L)) {
        throw Error(ErrorKind::invalid_argument, "particle " + std::to_string(i) + " is outside the box; wrap first");
      }
      idx[a] = std::min(static_cast<std::size_t>(x / edge), per_dim - 1);
    }
    cell_of[i] = (idx[0] * per_dim + idx[1]) * per_dim + idx[2];
    ++start[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) start[c + 1] += start[c];
  members.resize(ps.size());
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (std::size_t i = 0; i < ps.size(); ++i) members[fill[cell_of[i]]++] = i;
}

// Offsets with one representative per residue mod per_dim (the one nearest
// zero) whose cells come closer than r_c: along an axis, cells d apart are
// separated by at least (|d| - 1) edges.
std::vector<std::array<int, 3>> scan_offsets(std::size_t per_dim, double edge, double r_c) {
  const int lo = -static_cast<int>((per_dim - 1) / 2);
  const int hi = static_cast<int>(per_dim / 2);
  const int reach = static_cast<int>(std::ceil(r_c / edge));
  auto gap = [edge](int d) { return std::max(std::abs(d) - 1, 0) * edge; };
  std::vector<std::array<int, 3>> out;
  for (int dx = std::max(lo, -reach); dx <= std::min(hi, reach); ++dx) {
    for (int dy = std::max(lo, -reach); dy <= std::min(hi, reach); ++dy) {
      for (int dz = std::max(lo, -reach); dz <= std::min(hi, reach); ++dz) {
        const double gx = gap(dx), gy = gap(dy), gz = gap(dz);
        if (gx * gx + gy * gy + gz * gz < r_c * r_c) out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

// Picks the scan-grid resolution minimizing the estimated scan cost: every
// visited cell costs a fixed overhead (worth about 8 candidate distance
// evaluations) plus one evaluation per particle it holds.
std::size_t scan_resolution(std::size_t coarse, double L, double r_c, std::size_t n) {
  constexpr double kCellOverhead = 8.0;
  const double density = static_cast<double>(n);
  std::size_t best = coarse;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t f = coarse; f <= 4 * coarse + 4; ++f) {
    const double cells = static_cast<double>(f) * static_cast<double>(f) * static_cast<double>(f);
    if (f > coarse && cells > 8.0 * density) break;
    const double stencil = static_cast<double>(scan_offsets(f, L / static_cast<double>(f), r_c).size());
    const double cost = stencil * (kCellOverhead + density / cells);
    if (cost < best_cost) {
      best_cost = cost;
      best = f;
    }
  }
  return best;
}

}  // namespace

CellList build_cell_list(const ParticleSet& ps, const SimulationBox& box, double r_c) {
  const double L = box.edge_length();
  if (!(r_c > 0.0)) throw Error(ErrorKind::invalid_argument, "cutoff must be positive");
  if (r_c > 0.5 * L) {
    throw Error(ErrorKind::cutoff_too_large,
                "cutoff " + std::to_string(r_c) + " exceeds half the box edge " + std::to_string(0.5 * L));
  }

  CellList cl;
  cl.cutoff_ = r_c;
  cl.cells_per_dim_ = static_cast<std::size_t>(std::floor(L / r_c));
  cl.cell_edge_ = L / static_cast<double>(cl.cells_per_dim_);
  const std::size_t m = cl.cells_per_dim_;
  const std::size_t ncell = m * m * m;
  bin_particles(ps, L, m, cl.cell_of_, cl.cell_start_, cl.members_);

  cl.stencil_start_.assign(ncell + 1, 0);
  const auto sm = static_cast<long>(m);
  std::vector<std::size_t> around;
  for (std::size_t c = 0; c < ncell; ++c) {
    const long cx = static_cast<long>(c / (m * m));
    const long cy = static_cast<long>((c / m) % m);
    const long cz = static_cast<long>(c % m);
    around.clear();
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dz = -1; dz <= 1; ++dz) {
          const long nx = ((cx + dx) % sm + sm) % sm;
          const long ny = ((cy + dy) % sm + sm) % sm;
          const long nz = ((cz + dz) % sm + sm) % sm;
          around.push_back(static_cast<std::size_t>((nx * sm + ny) * sm + nz));
        }
      }
    }
    std::sort(around.begin(), around.end());
    around.erase(std::unique(around.begin(), around.end()), around.end());
    cl.stencil_.insert(cl.stencil_.end(), around.begin(), around.end());
    cl.stencil_start_[c + 1] = cl.stencil_.size();
  }

  ScanGrid& g = cl.scan_;
  g.per_dim = scan_resolution(m, L, r_c, ps.size());
  g.edge = L / static_cast<double>(g.per_dim);
  g.offsets = scan_offsets(g.per_dim, g.edge, r_c);
  if (g.per_dim == m) {
    g.cell_of = cl.cell_of_;
    g.start = cl.cell_start_;
    g.members = cl.members_;
  } else {
    bin_particles(ps, L, g.per_dim, g.cell_of, g.start, g.members);
  }
  return cl;
}

GlobalAccumulator reduce_global(std::span<const std::vector<double>> partials) {
  if (partials.empty()) return GlobalAccumulator(0);
  GlobalAccumulator out(partials.front().size());
  auto values = out.values();
  for (const auto& p : partials) {
    if (p.size() != values.size()) {
      throw Error(ErrorKind::invalid_argument, "partial reduction vectors differ in length");
    }
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += p[k];
  }
  return out;
}

std::size_t resolve_thread_count(std::size_t requested) {
  if (const char* env = std::getenv("EWALDMD_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) {
      throw Error(ErrorKind::invalid_argument, std::string("EWALDMD_THREADS is not a non-negative integer: ") + env);
    }
    requested = static_cast<std::size_t>(v);
  }
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

namespace detail {

SortedPositions::SortedPositions(const ParticleSet& ps, const ScanGrid& grid) : index(grid.members) {
  const auto pos = ps.data(Property::position);
  const std::size_t n = index.size();
  x.resize(n);
  y.resize(n);
  z.resize(n);
  xf.resize(n);
  yf.resize(n);
  zf.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = pos[3 * index[k]];
    y[k] = pos[3 * index[k] + 1];
    z[k] = pos[3 * index[k] + 2];
    xf[k] = static_cast<float>(x[k]);
    yf[k] = static_cast<float>(y[k]);
    zf[k] = static_cast<float>(z[k]);
  }
}

namespace {

template <class T>
T image(T d, T L, T half) {
  return d + L * (static_cast<T>(d < -half) - static_cast<T>(d >= half));
}

// Single-precision squared image distances; only a filter, the survivors are
// re-measured in double precision. Wrapped coordinates put every difference in
// (-L, L), so one conditional shift per axis yields the image in [-L/2, L/2).
[[gnu::target_clones("avx2", "default")]] void coarse_distances(float xi, float yi, float zi,
                                                                const float* __restrict sx,
                                                                const float* __restrict sy,
                                                                const float* __restrict sz, std::size_t m, float L,
                                                                float* __restrict r2) {
  const float half = 0.5f * L;
  for (std::size_t k = 0; k < m; ++k) {
    const float ex = image(xi - sx[k], L, half);
    const float ey = image(yi - sy[k], L, half);
    const float ez = image(zi - sz[k], L, half);
    r2[k] = ex * ex + ey * ey + ez * ez;
  }
}

}  // namespace

std::size_t scan_cell(double xi, double yi, double zi, const SortedPositions& sorted, std::size_t first,
                      std::size_t m, double L, double r_c, PairScratch& scratch) {
  scratch.reserve(m);
  float* coarse = scratch.coarse.data();
  coarse_distances(static_cast<float>(xi), static_cast<float>(yi), static_cast<float>(zi), sorted.xf.data() + first,
                   sorted.yf.data() + first, sorted.zf.data() + first, m, static_cast<float>(L), coarse);
  // Rounding to float moves each coordinate difference by at most a few L
  // float-epsilons; widening the cutoff by 16 L eps keeps every true hit.
  const auto widened = static_cast<float>(r_c + 16.0 * L * std::numeric_limits<float>::epsilon());
  const float filter = widened * widened;
  std::size_t* hit = scratch.hit.data();
  std::size_t candidates = 0;
  for (std::size_t k = 0; k < m; ++k) {
    hit[candidates] = k;
    candidates += coarse[k] < filter ? 1 : 0;
  }

  const double* sx = sorted.x.data() + first;
  const double* sy = sorted.y.data() + first;
  const double* sz = sorted.z.data() + first;
  const double half = 0.5 * L;
  const double rc2 = r_c * r_c;
  std::size_t hits = 0;
  for (std::size_t c = 0; c < candidates; ++c) {
    const std::size_t k = hit[c];
    const Vec3 dr{image(xi - sx[k], L, half), image(yi - sy[k], L, half), image(zi - sz[k], L, half)};
    const double r2 = dot(dr, dr);
    hit[hits] = k;
    scratch.dr[hits] = dr;
    scratch.r2[hits] = r2;
    hits += r2 < rc2 ? 1 : 0;
  }
  return hits;
}

LoopPlan prepare_loop(std::span<const AccessDescriptor> descriptors, ParticleSet& ps, bool checked) {
  LoopPlan plan;
  plan.checked = checked;
  for (const auto& d : descriptors) {
    if (const auto* p = std::get_if<Property>(&d.target)) {
      const auto k = static_cast<std::size_t>(*p);
      if (plan.mode[k] != kUndeclared) {
        throw Error(ErrorKind::contract_violation,
                    std::string("property declared twice in one kernel: ") + property_name(*p));
      }
      plan.mode[k] = static_cast<int>(d.mode);
      plan.data[k] = ps.data(*p).data();
      if (d.mode == Access::inc_zero) ps.zero(*p);
    } else {
      GlobalAccumulator* acc = std::get<GlobalAccumulator*>(d.target);
      if (acc == nullptr) throw Error(ErrorKind::contract_violation, "null global accumulator");
      if (d.mode == Access::inc_zero) acc->zero();
      plan.globals.push_back({d.mode, acc});
    }
  }
  return plan;
}

WorkerState make_worker_state(const LoopPlan& plan) {
  WorkerState s;
  s.partials.reserve(plan.globals.size());
  for (const auto& g : plan.globals) {
    s.partials.emplace_back(g.mode == Access::read ? 0 : g.acc->size(), 0.0);
  }
  return s;
}

void finish_loop(const LoopPlan& plan, std::span<WorkerState> workers) {
  std::vector<std::vector<double>> column;
  column.reserve(workers.size());
  for (std::size_t g = 0; g < plan.globals.size(); ++g) {
    if (plan.globals[g].mode == Access::read) continue;
    column.clear();
    for (auto& w : workers) column.push_back(std::move(w.partials[g]));
    const GlobalAccumulator sum = reduce_global(column);
    auto target = plan.globals[g].acc->values();
    for (std::size_t k = 0; k < target.size(); ++k) target[k] += sum[k];
  }
}

void access_violation(const char* what, Property p) {
  throw Error(ErrorKind::contract_violation, std::string(what) + " property '" + property_name(p) + "'");
}

void global_access_violation(const char* what, std::size_t slot) {
  throw Error(ErrorKind::contract_violation, std::string(what) + " slot " + std::to_string(slot));
}

}  // namespace detail
}  // namespace ewaldmd
