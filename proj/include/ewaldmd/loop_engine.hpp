#pragma once

// Particle and pair loops over a ParticleSet.
//
// A kernel is a body plus an AccessList declaring how it touches particle
// properties and global accumulators. The engine zeroes INC_ZERO targets,
// gives every worker a private partial buffer for each incremented global,
// and reduces the partials in worker-index order once all workers finish.
// Particles are block-partitioned (pair loops in cell order); a worker only
// ever writes to the particles in its own block, so kernels write to the
// center particle only.

#include <array>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "ewaldmd/core_model.hpp"
#include "ewaldmd/error.hpp"

namespace ewaldmd {

struct GlobalSlot {
  std::size_t index;
};

class AccessList {
 public:
  AccessList& particle(Property p, Access mode) {
    descriptors_.push_back({mode, p});
    return *this;
  }
  GlobalSlot global(GlobalAccumulator& acc, Access mode) {
    descriptors_.push_back({mode, &acc});
    return GlobalSlot{globals_++};
  }
  // READ binding; the engine never writes through it.
  GlobalSlot global(const GlobalAccumulator& acc) { return global(const_cast<GlobalAccumulator&>(acc), Access::read); }
  std::span<const AccessDescriptor> descriptors() const noexcept { return descriptors_; }

 private:
  std::vector<AccessDescriptor> descriptors_;
  std::size_t globals_ = 0;
};

template <class Body>
struct PairKernel {
  AccessList access;
  Body body;
};

template <class Body>
struct ParticleKernel {
  AccessList access;
  Body body;
};

// Binning used by the pair loop to find candidates. Its cells may be finer
// than the cutoff; one periodic offset stencil, identical for every cell,
// lists each cell offset whose nearest image lies within the cutoff, so every
// partner closer than the cutoff is scanned exactly once.
struct ScanGrid {
  std::size_t per_dim = 0;
  double edge = 0.0;
  std::vector<std::size_t> cell_of;  // per particle
  std::vector<std::size_t> start;    // CSR offsets into members, cell_count + 1
  std::vector<std::size_t> members;
  std::vector<std::array<int, 3>> offsets;

  std::size_t cell_count() const noexcept { return per_dim * per_dim * per_dim; }
  std::size_t neighbor(std::size_t c, const std::array<int, 3>& d) const {
    const auto m = static_cast<long>(per_dim);
    const auto shift = [m](long x, int dx) { return static_cast<std::size_t>(((x + dx) % m + m) % m); };
    const auto cx = static_cast<long>(c / (per_dim * per_dim));
    const auto cy = static_cast<long>((c / per_dim) % per_dim);
    const auto cz = static_cast<long>(c % per_dim);
    return (shift(cx, d[0]) * per_dim + shift(cy, d[1])) * per_dim + shift(cz, d[2]);
  }
};

// Spatial binning with cell edge >= cutoff; the 27-cell periodic stencil of a
// cell covers every partner closer than the cutoff.
class CellList {
 public:
  double cutoff() const noexcept { return cutoff_; }
  double cell_edge() const noexcept { return cell_edge_; }
  std::size_t cells_per_dim() const noexcept { return cells_per_dim_; }
  std::size_t cell_count() const noexcept { return cells_per_dim_ * cells_per_dim_ * cells_per_dim_; }
  std::size_t particle_count() const noexcept { return cell_of_.size(); }

  std::size_t cell_of(std::size_t particle) const { return cell_of_[particle]; }
  // Offset of cell c's first member in the cell-ordered member array.
  std::size_t cell_begin(std::size_t c) const { return cell_start_[c]; }
  std::span<const std::size_t> members() const noexcept { return members_; }
  std::span<const std::size_t> cell(std::size_t c) const {
    return std::span<const std::size_t>(members_).subspan(cell_start_[c], cell_start_[c + 1] - cell_start_[c]);
  }
  // Distinct cells in the periodic 27-stencil (fewer when cells_per_dim < 3).
  std::span<const std::size_t> neighbor_cells(std::size_t c) const {
    return std::span<const std::size_t>(stencil_).subspan(stencil_start_[c], stencil_start_[c + 1] - stencil_start_[c]);
  }

  const ScanGrid& scan_grid() const noexcept { return scan_; }

 private:
  friend CellList build_cell_list(const ParticleSet& ps, const SimulationBox& box, double r_c);

  double cutoff_ = 0.0;
  double cell_edge_ = 0.0;
  std::size_t cells_per_dim_ = 0;
  std::vector<std::size_t> cell_of_;
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> members_;
  std::vector<std::size_t> stencil_start_;
  std::vector<std::size_t> stencil_;
  ScanGrid scan_;
};

CellList build_cell_list(const ParticleSet& ps, const SimulationBox& box, double r_c);

// Element-wise sum in worker-index order.
GlobalAccumulator reduce_global(std::span<const std::vector<double>> partials);

// Resolves a configured worker count: the EWALDMD_THREADS environment variable
// wins when set; 0 means hardware concurrency.
std::size_t resolve_thread_count(std::size_t requested);

#ifdef NDEBUG
inline constexpr bool kCheckAccessByDefault = false;
#else
inline constexpr bool kCheckAccessByDefault = true;
#endif

namespace detail {

inline constexpr int kUndeclared = -1;

struct LoopPlan {
  std::array<double*, kPropertyCount> data{};
  std::array<int, kPropertyCount> mode{kUndeclared, kUndeclared, kUndeclared, kUndeclared, kUndeclared};
  struct Global {
    Access mode;
    GlobalAccumulator* acc;
  };
  std::vector<Global> globals;
  bool checked = false;
};

struct WorkerState {
  std::vector<std::vector<double>> partials;  // one per global slot; empty for READ
};

// Positions gathered in scan-grid order so a neighbor cell is a contiguous scan.
struct SortedPositions {
  SortedPositions(const ParticleSet& ps, const ScanGrid& grid);
  std::span<const std::size_t> index;
  std::vector<double> x, y, z;
  std::vector<float> xf, yf, zf;
};

// Per-worker buffers for scanning one neighbor cell.
struct PairScratch {
  void reserve(std::size_t m) {
    if (coarse.size() >= m) return;
    coarse.resize(m);
    hit.resize(m);
    dr.resize(m);
    r2.resize(m);
  }
  std::vector<float> coarse;
  // Per hit h: offset within the cell, separation and squared distance.
  std::vector<std::size_t> hit;
  std::vector<Vec3> dr;
  std::vector<double> r2;
};

// Minimum-image separations from (xi, yi, zi) to sorted slots [first, first + m)
// into scratch; returns how many fall inside the cutoff, with their offsets in
// hit and separations in dr.
std::size_t scan_cell(double xi, double yi, double zi, const SortedPositions& sorted, std::size_t first,
                      std::size_t m, double L, double r_c, PairScratch& scratch);

LoopPlan prepare_loop(std::span<const AccessDescriptor> descriptors, ParticleSet& ps, bool checked);
WorkerState make_worker_state(const LoopPlan& plan);
void finish_loop(const LoopPlan& plan, std::span<WorkerState> workers);

[[noreturn]] void access_violation(const char* what, Property p);
[[noreturn]] void global_access_violation(const char* what, std::size_t slot);

class ViewBase {
 public:
  ViewBase(const LoopPlan& plan, WorkerState& state) : plan_(&plan), state_(&state) {}

  std::span<double> global_inc(GlobalSlot g) const {
    if (plan_->checked) {
      if (g.index >= plan_->globals.size()) global_access_violation("undeclared global", g.index);
      if (plan_->globals[g.index].mode == Access::read) global_access_violation("write to READ global", g.index);
    }
    return state_->partials[g.index];
  }
  void inc_global(GlobalSlot g, std::size_t element, double v) const { global_inc(g)[element] += v; }

  std::span<const double> global_read(GlobalSlot g) const {
    if (plan_->checked) {
      if (g.index >= plan_->globals.size()) global_access_violation("undeclared global", g.index);
      if (plan_->globals[g.index].mode != Access::read) global_access_violation("read of non-READ global", g.index);
    }
    return plan_->globals[g.index].acc->values();
  }

 protected:
  double read(Property p, std::size_t i, std::size_t comp) const {
    const auto k = static_cast<std::size_t>(p);
    if (plan_->checked && plan_->mode[k] != static_cast<int>(Access::read)) access_violation("read of non-READ", p);
    return plan_->data[k][i * property_width(p) + comp];
  }
  void inc(Property p, std::size_t i, std::size_t comp, double v) const {
    const auto k = static_cast<std::size_t>(p);
    if (plan_->checked && (plan_->mode[k] == kUndeclared || plan_->mode[k] == static_cast<int>(Access::read))) {
      access_violation("write to non-INC", p);
    }
    plan_->data[k][i * property_width(p) + comp] += v;
  }

  const LoopPlan* plan_;
  WorkerState* state_;
};

}  // namespace detail

class ParticleView : public detail::ViewBase {
 public:
  using ViewBase::ViewBase;

  std::size_t index() const noexcept { return i_; }
  double get(Property p, std::size_t comp = 0) const { return read(p, i_, comp); }
  Vec3 get_vec(Property p) const { return {read(p, i_, 0), read(p, i_, 1), read(p, i_, 2)}; }
  void inc(Property p, std::size_t comp, double v) const { ViewBase::inc(p, i_, comp, v); }
  void inc(Property p, const Vec3& v) const {
    ViewBase::inc(p, i_, 0, v.x);
    ViewBase::inc(p, i_, 1, v.y);
    ViewBase::inc(p, i_, 2, v.z);
  }

  void bind(std::size_t i) noexcept { i_ = i; }

 private:
  std::size_t i_ = 0;
};

// Center particle i is writable, neighbor j is read-only.
// separation() is the minimum-image vector r_i - r_j.
class PairView : public detail::ViewBase {
 public:
  using ViewBase::ViewBase;

  std::size_t center_index() const noexcept { return i_; }
  std::size_t neighbor_index() const noexcept { return j_; }
  const Vec3& separation() const noexcept { return dr_; }
  double distance_sq() const noexcept { return r2_; }

  double center(Property p, std::size_t comp = 0) const { return read(p, i_, comp); }
  double neighbor(Property p, std::size_t comp = 0) const { return read(p, j_, comp); }
  void inc_center(Property p, std::size_t comp, double v) const { inc(p, i_, comp, v); }
  void inc_center(Property p, const Vec3& v) const {
    inc(p, i_, 0, v.x);
    inc(p, i_, 1, v.y);
    inc(p, i_, 2, v.z);
  }

  void bind(std::size_t i, std::size_t j, const Vec3& dr, double r2) noexcept {
    i_ = i;
    j_ = j;
    dr_ = dr;
    r2_ = r2;
  }

 private:
  std::size_t i_ = 0;
  std::size_t j_ = 0;
  Vec3 dr_;
  double r2_ = 0.0;
};

class LoopEngine {
 public:
  explicit LoopEngine(std::size_t workers = 1, bool check_access = kCheckAccessByDefault)
      : workers_(workers == 0 ? 1 : workers), checked_(check_access) {}

  std::size_t workers() const noexcept { return workers_; }
  bool checks_access() const noexcept { return checked_; }

  template <class Body>
  void execute_particle_loop(const ParticleKernel<Body>& kernel, ParticleSet& ps) const {
    auto plan = detail::prepare_loop(kernel.access.descriptors(), ps, checked_);
    run_blocks(plan, ps.size(), [&](std::size_t begin, std::size_t end, detail::WorkerState& state) {
      ParticleView view(plan, state);
      for (std::size_t i = begin; i < end; ++i) {
        view.bind(i);
        kernel.body(view);
      }
    });
  }

  // Visits every ordered pair (i, j), i != j, whose minimum-image separation is
  // strictly less than the cell list's cutoff.
  template <class Body>
  void execute_pair_loop(const PairKernel<Body>& kernel, ParticleSet& ps, const CellList& cl) const {
    if (cl.particle_count() != ps.size()) {
      throw Error(ErrorKind::contract_violation, "cell list was built for a different particle count");
    }
    auto plan = detail::prepare_loop(kernel.access.descriptors(), ps, checked_);
    const ScanGrid& grid = cl.scan_grid();
    const detail::SortedPositions sorted(ps, grid);
    const double r_c = cl.cutoff();
    const double L = ps.box().edge_length();
    const double* pos = ps.data(Property::position).data();
    run_blocks(plan, ps.size(), [&](std::size_t begin, std::size_t end, detail::WorkerState& state) {
      PairView view(plan, state);
      detail::PairScratch scratch;
      // Centres are visited in scan-grid order so consecutive particles share
      // the cells they scan.
      for (std::size_t s = begin; s < end; ++s) {
        const std::size_t i = sorted.index[s];
        const double xi = pos[3 * i], yi = pos[3 * i + 1], zi = pos[3 * i + 2];
        const std::size_t home = grid.cell_of[i];
        for (const auto& offset : grid.offsets) {
          const std::size_t c = grid.neighbor(home, offset);
          const std::size_t first = grid.start[c];
          const std::size_t m = grid.start[c + 1] - first;
          if (m == 0) continue;
          const std::size_t hits = detail::scan_cell(xi, yi, zi, sorted, first, m, L, r_c, scratch);
          for (std::size_t h = 0; h < hits; ++h) {
            const std::size_t j = sorted.index[first + scratch.hit[h]];
            if (j == i) continue;
            view.bind(i, j, scratch.dr[h], scratch.r2[h]);
            kernel.body(view);
          }
        }
      }
    });
  }

 private:
  template <class Work>
  void run_blocks(detail::LoopPlan& plan, std::size_t n, Work&& work) const {
    std::vector<detail::WorkerState> states;
    states.reserve(workers_);
    for (std::size_t w = 0; w < workers_; ++w) states.push_back(detail::make_worker_state(plan));

    std::vector<std::exception_ptr> errors(workers_);
    auto block = [&](std::size_t w) {
      const std::size_t begin = n * w / workers_;
      const std::size_t end = n * (w + 1) / workers_;
      try {
        work(begin, end, states[w]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    {
      std::vector<std::jthread> threads;
      threads.reserve(workers_ - 1);
      for (std::size_t w = 1; w < workers_; ++w) threads.emplace_back(block, w);
      block(0);
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    detail::finish_loop(plan, states);
  }

  std::size_t workers_;
  bool checked_;
};

}  // namespace ewaldmd
