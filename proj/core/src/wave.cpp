#include "mwave/wave.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mwave {

TimeGrid TimeGrid::for_speed(double T, double h, double c_max, double cfl) {
  if (!(T > 0) || !(h > 0) || !(c_max > 0)) throw std::invalid_argument("T, h, c_max must be positive");
  const int nt = std::max(1, int(std::ceil(T * c_max / (cfl * h) - 1e-9)));
  return with_steps(T, nt);
}

TimeGrid TimeGrid::with_steps(double T, int nt) {
  if (!(T > 0) || nt < 1) throw std::invalid_argument("time grid needs T > 0 and nt >= 1");
  return {T, nt, T / nt};
}

void check_cfl(const TimeGrid& tg, double h, double c_max) {
  if (tg.dt > kCfl * h / c_max * (1 + 1e-12)) {
    std::ostringstream os;
    os << "unstable dt: dt=" << tg.dt << " exceeds " << kCfl << "*h/c_max=" << kCfl * h / c_max;
    throw NumericalError(os.str());
  }
}

// ---------------------------------------------------------------------------

BoundaryTrace::BoundaryTrace(GridPtr grid, TimeGrid tg)
    : grid_(std::move(grid)), tg_(tg), nb_(grid_->boundary_count()) {
  values_.assign(std::size_t(tg_.nt + 1) * nb_, 0.0);
}

void BoundaryTrace::require_compatible(const BoundaryTrace& o) const {
  if (!grid_ || !o.grid_ || !(*grid_ == *o.grid_) || !(tg_ == o.tg_))
    throw std::invalid_argument("trace layout mismatch");
}

BoundaryTrace& BoundaryTrace::operator+=(const BoundaryTrace& o) {
  require_compatible(o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

BoundaryTrace& BoundaryTrace::operator-=(const BoundaryTrace& o) {
  require_compatible(o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

BoundaryTrace& BoundaryTrace::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

double BoundaryTrace::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double trace_l2_norm(const BoundaryTrace& tr) {
  const int nt = tr.steps();
  double acc = 0.0;
  for (int k = 0; k <= nt; ++k) {
    const double w = (k == 0 || k == nt) ? 0.5 : 1.0;
    double row = 0.0;
    for (double v : tr.row(k)) row += v * v;
    acc += w * row;
  }
  return std::sqrt(acc * tr.time_grid().dt * tr.grid()->h());
}

double trace_h1_norm(const BoundaryTrace& tr) {
  const int nt = tr.steps();
  const std::size_t nb = tr.nodes();
  const double dt = tr.time_grid().dt, h = tr.grid()->h();
  const double l2 = trace_l2_norm(tr);
  double dt_acc = 0.0, ds_acc = 0.0;
  for (int k = 0; k <= nt; ++k) {
    for (std::size_t b = 0; b < nb; ++b) {
      if (k < nt) {
        const double d = (tr.at(k + 1, b) - tr.at(k, b)) / dt;
        dt_acc += d * d;
      }
      const double w = (k == 0 || k == nt) ? 0.5 : 1.0;
      const double d = (tr.at(k, (b + 1) % nb) - tr.at(k, b)) / h;
      ds_acc += w * d * d;
    }
  }
  return std::sqrt(l2 * l2 + (dt_acc + ds_acc) * dt * h);
}

double trace_sobolev_norm(const BoundaryTrace& tr, int s) {
  if (s == 0) return trace_l2_norm(tr);
  if (s == 1) return trace_h1_norm(tr);
  throw std::invalid_argument("trace Sobolev index must be 0 or 1");
}

// ---------------------------------------------------------------------------

namespace {

struct Window {
  int i0, i1, j0, j1;  // padded coords, half-open
  bool empty() const { return i1 <= i0 || j1 <= j0; }
};

Window intersect(Window a, Window b) {
  return {std::max(a.i0, b.i0), std::min(a.i1, b.i1), std::max(a.j0, b.j0), std::min(a.j1, b.j1)};
}

Window dilate(Window a, int k) { return {a.i0 - k, a.i1 + k, a.j0 - k, a.j1 + k}; }

Window hull(Window a, Window b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.i0, b.i0), std::max(a.i1, b.i1), std::min(a.j0, b.j0), std::max(a.j1, b.j1)};
}

Window padded_window(const SupportBox& b, int pad) {
  if (b.empty()) return {0, 0, 0, 0};
  return {b.i0 + pad, b.i1 + pad, b.j0 + pad, b.j1 + pad};
}

// Staggered leapfrog energy between two consecutive levels on an s x s grid.
double leapfrog_energy(const double* next, const double* cur, const double* c2, int s, double dt, double h) {
  double kin = 0.0, pot = 0.0;
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i) {
      const std::size_t q = std::size_t(j) * s + i;
      const double d = (next[q] - cur[q]) / dt;
      kin += d * d / c2[q];
      if (i + 1 < s) pot += (next[q + 1] - next[q]) * (cur[q + 1] - cur[q]);
      if (j + 1 < s) pot += (next[q + s] - next[q]) * (cur[q + s] - cur[q]);
    }
  return kin * h * h + pot;
}

}  // namespace

FreeSolution solve_free(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg,
                        const SolveOptions& opts, const SpacetimeSource* source) {
  const GridPtr& grid = speed.grid();
  require_same_layout(data.f1, data.f2);
  if (!(*data.grid() == *grid)) throw std::invalid_argument("grid mismatch");
  const double h = grid->h();
  const double c_max = speed.c_max();
  check_cfl(tg, h, c_max);
  if (!grid->satisfies_padding(c_max, tg.T))
    throw std::invalid_argument("padding too small for reflection-free propagation over [0,T]");
  if (data.extent() == Extent::Padded &&
      (data.f1.boundary_ring_max() != 0.0 || data.f2.boundary_ring_max() != 0.0))
    throw std::invalid_argument("bad support");

  const int n = grid->n(), pad = grid->pad(), M = grid->padded_side(), N = tg.nt;
  const double dt = tg.dt, dt2 = dt * dt;
  const std::vector<double> c2 = speed.padded_c2();
  std::vector<double> coef(c2.size());
  for (std::size_t q = 0; q < c2.size(); ++q) coef[q] = dt2 * c2[q] / (h * h);

  ScalarField u0 = data.f1.padded(), v0 = data.f2.padded();

  FreeSolution out{BoundaryTrace(grid, tg), {}};
  Wavefield& wf = out.field;
  if (opts.cube_box) {
    const auto& b = *opts.cube_box;
    if (b.empty() || b.i0 < 0 || b.j0 < 0 || b.i1 > n || b.j1 > n)
      throw std::invalid_argument("cube box must lie inside the domain");
    wf.cube_box = b;
    wf.cube.assign(std::size_t(N + 1) * (b.i1 - b.i0) * (b.j1 - b.j0), 0.0);
  }

  Window src_win{0, 0, 0, 0};
  std::vector<double> src_buf;
  int src_w = 0;
  if (source) {
    const auto& b = source->box;
    if (b.i0 < 0 || b.j0 < 0 || b.i1 > n || b.j1 > n) throw std::invalid_argument("source grid mismatch");
    src_win = padded_window(b, pad);
    src_w = b.i1 - b.i0;
    src_buf.assign(std::size_t(src_w) * (b.j1 - b.j0), 0.0);
  }
  auto load_source = [&](int k) {
    if (source) source->sample(k, src_buf);
  };

  const bool full_field = opts.record_energy || !opts.snapshot_steps.empty();
  Window roi = padded_window({0, n, 0, n}, pad);
  const Window interior{1, M - 1, 1, M - 1};
  Window init = hull(padded_window(u0.nonzero_box(), pad), padded_window(v0.nonzero_box(), pad));
  init = hull(init, src_win);

  std::vector<double> prev(u0.values().begin(), u0.values().end());
  std::vector<double> cur(u0.values().begin(), u0.values().end());
  const auto& bidx = grid->boundary_idx();
  auto record_trace = [&](int k, const std::vector<double>& u) {
    auto row = out.trace.row(k);
    for (std::size_t b = 0; b < bidx.size(); ++b) {
      const int i = int(bidx[b] % n), j = int(bidx[b] / n);
      row[b] = u[std::size_t(j + pad) * M + i + pad];
    }
  };
  auto record_cube = [&](int k, const std::vector<double>& u) {
    if (!opts.cube_box) return;
    const auto& b = wf.cube_box;
    double* dst = wf.cube.data() + std::size_t(k) * (b.i1 - b.i0) * (b.j1 - b.j0);
    for (int j = b.j0; j < b.j1; ++j)
      for (int i = b.i0; i < b.i1; ++i) *dst++ = u[std::size_t(j + pad) * M + i + pad];
  };
  auto snapshot = [&](int k, const std::vector<double>& u_k, const std::vector<double>& u_km1) {
    if (std::find(opts.snapshot_steps.begin(), opts.snapshot_steps.end(), k) == opts.snapshot_steps.end())
      return;
    CauchyPair p = CauchyPair::zero(grid, Extent::Padded);
    if (k == 0) {
      p = {u0, v0};
    } else {
      std::copy(u_k.begin(), u_k.end(), p.f1.values().begin());
      auto vel = p.f2.values();
      for (int j = 1; j < M - 1; ++j)
        for (int i = 1; i < M - 1; ++i) {
          const std::size_t q = std::size_t(j) * M + i;
          const double lap = u_k[q + 1] + u_k[q - 1] + u_k[q + M] + u_k[q - M] - 4 * u_k[q];
          vel[q] = (u_k[q] - u_km1[q]) / dt + 0.5 * coef[q] * lap / dt;
        }
      if (source) {
        const auto& b = source->box;
        for (int j = b.j0; j < b.j1; ++j)
          for (int i = b.i0; i < b.i1; ++i)
            vel[std::size_t(j + pad) * M + i + pad] += 0.5 * dt * src_buf[std::size_t(j - b.j0) * src_w + i - b.i0];
      }
    }
    wf.steps.push_back(k);
    wf.snapshots.push_back(std::move(p));
  };

  record_trace(0, cur);
  record_cube(0, cur);
  load_source(0);
  snapshot(0, cur, cur);
  if (init.empty()) {
    // Zero data and no source: the solution vanishes identically.
    if (opts.record_energy) wf.energy.assign(N, 0.0);
    for (int k = 1; k <= N; ++k) snapshot(k, cur, cur);
    return out;
  }

  for (int k = 0; k < N; ++k) {
    Window win = intersect(dilate(init, k + 1), interior);
    if (!full_field) win = intersect(win, dilate(roi, N - k));
    const double* uc = cur.data();
    double* up = prev.data();  // holds u^{k-1}, overwritten by u^{k+1}
    const double* vp = v0.values().data();
    const bool first = k == 0;
#pragma omp parallel for if (opts.threads > 1) num_threads(opts.threads) schedule(static)
    for (int j = win.j0; j < win.j1; ++j) {
      const std::size_t row = std::size_t(j) * M;
      for (int i = win.i0; i < win.i1; ++i) {
        const std::size_t q = row + i;
        const double lap = uc[q + 1] + uc[q - 1] + uc[q + M] + uc[q - M] - 4 * uc[q];
        up[q] = first ? uc[q] + dt * vp[q] + 0.5 * coef[q] * lap : 2 * uc[q] - up[q] + coef[q] * lap;
      }
    }
    if (source) {
      const auto& b = source->box;
      const double w = first ? 0.5 * dt2 : dt2;
      for (int j = b.j0; j < b.j1; ++j)
        for (int i = b.i0; i < b.i1; ++i)
          up[std::size_t(j + pad) * M + i + pad] += w * src_buf[std::size_t(j - b.j0) * src_w + i - b.i0];
    }
    if (opts.record_energy) wf.energy.push_back(leapfrog_energy(up, uc, c2.data(), M, dt, h));
    std::swap(prev, cur);  // cur = u^{k+1}, prev = u^k
    record_trace(k + 1, cur);
    record_cube(k + 1, cur);
    load_source(k + 1);
    snapshot(k + 1, cur, prev);
  }
  return out;
}

BoundaryTrace solve_duhamel(const SpacetimeSource& source, const SpeedModel& speed, const TimeGrid& tg,
                            int threads) {
  SolveOptions opts;
  opts.threads = threads;
  return solve_free(CauchyPair::zero(speed.grid()), speed, tg, opts, &source).trace;
}

CauchyPair propagator_U(double s, const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg,
                        int threads) {
  if (!(s >= 0.0) || s > tg.T * (1 + 1e-12)) throw std::invalid_argument("propagator time outside [0,T]");
  const int steps = int(std::lround(s / tg.dt));
  if (steps == 0) return data.padded();
  SolveOptions opts;
  opts.snapshot_steps = {steps};
  opts.threads = threads;
  // Only the first `steps` levels are needed.
  TimeGrid sub = TimeGrid::with_steps(steps * tg.dt, steps);
  auto sol = solve_free(data, speed, sub, opts);
  return std::move(sol.field.snapshots.front());
}

// ---------------------------------------------------------------------------

namespace {

DirichletEvolution evolve_dirichlet(const CauchyPair& initial, const SpeedModel& speed, const TimeGrid& tg,
                                    const BoundaryTrace* g, bool reversed, bool record_energy) {
  const GridPtr& grid = speed.grid();
  if (initial.extent() != Extent::Domain || !(*initial.grid() == *grid))
    throw std::invalid_argument("grid mismatch");
  const double h = grid->h();
  check_cfl(tg, h, speed.c_max());
  if (g && (!(*g->grid() == *grid) || !(g->time_grid() == tg)))
    throw std::invalid_argument("boundary data does not match the grid or time grid");

  const int n = grid->n(), N = tg.nt;
  const double dt = tg.dt;
  std::vector<double> coef(grid->domain_size());
  for (std::size_t q = 0; q < coef.size(); ++q) coef[q] = dt * dt * speed.c2()[q] / (h * h);
  const auto& bidx = grid->boundary_idx();
  auto set_boundary = [&](int k, std::vector<double>& u) {
    if (!g) {
      for (auto q : bidx) u[q] = 0.0;
      return;
    }
    auto row = g->row(reversed ? N - k : k);
    for (std::size_t b = 0; b < bidx.size(); ++b) u[bidx[b]] = row[b];
  };

  std::vector<double> prev(initial.f1.values().begin(), initial.f1.values().end());
  std::vector<double> cur = prev;
  const auto v0 = initial.f2.values();
  DirichletEvolution out;
  for (int k = 0; k < N; ++k) {
    const bool first = k == 0;
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t q = std::size_t(j) * n + i;
        const double lap = cur[q + 1] + cur[q - 1] + cur[q + n] + cur[q - n] - 4 * cur[q];
        const double sign = reversed ? -1.0 : 1.0;
        prev[q] = first ? cur[q] + sign * dt * v0[q] + 0.5 * coef[q] * lap
                        : 2 * cur[q] - prev[q] + coef[q] * lap;
      }
    set_boundary(k + 1, prev);
    if (record_energy)
      out.energy.push_back(leapfrog_energy(prev.data(), cur.data(), speed.c2().values().data(), n, dt, h));
    std::swap(prev, cur);
  }
  // Endpoint velocity consistent with the Taylor start of the scheme.
  CauchyPair fin = CauchyPair::zero(grid);
  std::copy(cur.begin(), cur.end(), fin.f1.values().begin());
  auto vel = fin.f2.values();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t q = std::size_t(j) * n + i;
      double v = (cur[q] - prev[q]) / dt;
      if (i > 0 && j > 0 && i < n - 1 && j < n - 1)
        v += 0.5 * coef[q] * (cur[q + 1] + cur[q - 1] + cur[q + n] + cur[q - n] - 4 * cur[q]) / dt;
      vel[q] = v;
    }
  out.final_state = std::move(fin);
  return out;
}

}  // namespace

DirichletEvolution solve_dirichlet(const CauchyPair& initial, const SpeedModel& speed, const TimeGrid& tg,
                                   const BoundaryTrace* boundary, bool record_energy) {
  return evolve_dirichlet(initial, speed, tg, boundary, false, record_energy);
}

CauchyPair solve_dirichlet_backward(const BoundaryTrace* h, const CauchyPair& terminal,
                                    const SpeedModel& speed, const TimeGrid& tg) {
  // Forward in reversed time tau = T - t: velocity flips sign at both ends.
  auto ev = evolve_dirichlet(terminal, speed, tg, h, true, false);
  ev.final_state.f2 *= -1.0;
  return std::move(ev.final_state);
}

}  // namespace mwave
