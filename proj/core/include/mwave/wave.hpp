#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mwave/grid.hpp"

namespace mwave {

/// Uniform time grid t_k = k*dt, k = 0..nt, dt = T/nt.
struct TimeGrid {
  double T = 0.0;
  int nt = 0;
  double dt = 0.0;

  /// Smallest nt with dt <= cfl*h/c_max.
  static TimeGrid for_speed(double T, double h, double c_max, double cfl = 0.4);
  static TimeGrid with_steps(double T, int nt);

  double t(int k) const { return k * dt; }
  friend bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.nt == b.nt && a.T == b.T; }
};

inline constexpr double kCfl = 0.4;

/// Throws NumericalError("unstable dt") unless dt <= kCfl*h/c_max.
void check_cfl(const TimeGrid& tg, double h, double c_max);

/// Samples of u on [0,T] x boundary nodes, time-major: values[k*nb + b].
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  BoundaryTrace(GridPtr grid, TimeGrid tg);

  const GridPtr& grid() const { return grid_; }
  const TimeGrid& time_grid() const { return tg_; }
  std::size_t nodes() const { return nb_; }
  int steps() const { return tg_.nt; }

  double& at(int k, std::size_t b) { return values_[std::size_t(k) * nb_ + b]; }
  double at(int k, std::size_t b) const { return values_[std::size_t(k) * nb_ + b]; }
  std::span<double> row(int k) { return {values_.data() + std::size_t(k) * nb_, nb_}; }
  std::span<const double> row(int k) const { return {values_.data() + std::size_t(k) * nb_, nb_}; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  BoundaryTrace& operator+=(const BoundaryTrace& o);
  BoundaryTrace& operator-=(const BoundaryTrace& o);
  BoundaryTrace& operator*=(double a);
  friend BoundaryTrace operator+(BoundaryTrace a, const BoundaryTrace& b) { return a += b; }
  friend BoundaryTrace operator-(BoundaryTrace a, const BoundaryTrace& b) { return a -= b; }
  friend BoundaryTrace operator*(double a, BoundaryTrace t) { return t *= a; }

  double max_abs() const;

 private:
  void require_compatible(const BoundaryTrace& o) const;
  GridPtr grid_;
  TimeGrid tg_;
  std::size_t nb_ = 0;
  std::vector<double> values_;
};

/// L^2([0,T] x boundary) with trapezoid weights in time and arc length h.
double trace_l2_norm(const BoundaryTrace& tr);
/// Discrete H^1 norm: L^2 plus forward-difference time and arc-length derivatives.
double trace_h1_norm(const BoundaryTrace& tr);
/// s in {0, 1}.
double trace_sobolev_norm(const BoundaryTrace& tr, int s);

/// Right-hand side F(t_k, x) of the wave equation, supported on a domain box.
struct SpacetimeSource {
  SupportBox box;
  /// Writes F(t_k, .) over `box`, row-major within the box.
  std::function<void(int k, std::span<double> out)> sample;
};

struct SolveOptions {
  /// Time steps at which to store [u, u_t] on the padded grid.
  std::vector<int> snapshot_steps;
  /// Record the leapfrog energy at every half step.
  bool record_energy = false;
  /// Store u on this domain box at every step.
  std::optional<SupportBox> cube_box;
  int threads = 1;
};

/// Snapshots and optional space-time cube of a free-space solve.
struct Wavefield {
  std::vector<int> steps;
  std::vector<CauchyPair> snapshots;  // padded extent
  SupportBox cube_box;
  std::vector<double> cube;  // (nt+1) x box nodes, u itself
  /// Conserved discrete energy sum c^-2 |D_t u|^2 + (grad u^{k+1}, grad u^k) per half step.
  std::vector<double> energy;

  std::span<const double> cube_slice(int k) const {
    const std::size_t sz = std::size_t(cube_box.i1 - cube_box.i0) * (cube_box.j1 - cube_box.j0);
    return {cube.data() + std::size_t(k) * sz, sz};
  }
};

struct FreeSolution {
  BoundaryTrace trace;
  Wavefield field;
};

/// Free-space Cauchy problem u_tt = c^2 Lap u + F by leapfrog on the padded grid,
/// u^1 = u^0 + dt f2 + dt^2/2 (c^2 Lap u^0 + F^0). Data may be domain or padded fields.
FreeSolution solve_free(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg,
                        const SolveOptions& opts = {}, const SpacetimeSource* source = nullptr);

/// Trace of the zero-data solution driven by F.
BoundaryTrace solve_duhamel(const SpacetimeSource& source, const SpeedModel& speed, const TimeGrid& tg,
                            int threads = 1);

/// Free-space evolution of Cauchy data by time s (rounded to the time grid). Padded result.
CauchyPair propagator_U(double s, const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg,
                        int threads = 1);

struct DirichletEvolution {
  CauchyPair final_state;
  std::vector<double> energy;
};

/// Dirichlet problem on the domain grid, forward from `initial` at t=0; boundary
/// nodes take boundary(k) (one value per boundary node) or zero. Returns [u(T), u_t(T)].
DirichletEvolution solve_dirichlet(const CauchyPair& initial, const SpeedModel& speed, const TimeGrid& tg,
                                   const BoundaryTrace* boundary = nullptr, bool record_energy = false);

/// Integrates the Dirichlet problem backward from `terminal` at t=T with boundary
/// data h; returns [v(0), v_t(0)].
CauchyPair solve_dirichlet_backward(const BoundaryTrace* h, const CauchyPair& terminal,
                                    const SpeedModel& speed, const TimeGrid& tg);

}  // namespace mwave
