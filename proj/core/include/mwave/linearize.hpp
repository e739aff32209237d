#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mwave/grid.hpp"
#include "mwave/wave.hpp"

namespace mwave {

/// Linearization point (c, f) with the background solution cached on a box K.
///
/// Immutable once prepared; concurrent delta_lambda1 calls may share it.
class BasePoint {
 public:
  /// Solves the free-space problem for [f, 0] once and caches c^2-free
  /// Laplacians Lap u(t_k) over `K` for every step.
  static BasePoint prepare(SpeedModel speed, ScalarField source, SupportBox K, const TimeGrid& tg, int threads = 1);
  /// Unprepared base point (no cached background); delta_lambda1 rejects it.
  static BasePoint unprepared(SpeedModel speed, ScalarField source, SupportBox K);

  const SpeedModel& speed() const { return speed_; }
  const ScalarField& source() const { return source_; }
  const SupportBox& K() const { return K_; }
  const TimeGrid& time_grid() const { return tg_; }
  bool prepared() const { return !lap_cache_.empty(); }
  /// Lap u(t_k) over K, row-major within the box.
  std::span<const double> background_laplacian(int k) const;
  const BoundaryTrace& base_trace() const { return base_trace_; }
  /// min |Lap f| / max |Lap f| over the nodes of K.
  double laplacian_contrast() const;

 private:
  BasePoint(SpeedModel speed, ScalarField source, SupportBox K)
      : speed_(std::move(speed)), source_(std::move(source)), K_(K) {}
  SpeedModel speed_;
  ScalarField source_;
  SupportBox K_;
  TimeGrid tg_;
  std::vector<double> lap_cache_;
  BoundaryTrace base_trace_;
};

/// (delta_f, delta_c2) with delta_c2 supported in K.
struct Perturbation {
  ScalarField delta_f;
  ScalarField delta_c2;
};

/// Checks the declared supports: delta_f vanishes on the boundary ring and
/// delta_c2 vanishes outside K.
void validate_perturbation(const Perturbation& p, const SupportBox& K);

/// Near-kernel pair delta_f = -Q_N h, delta_c2 = c^2 h.
struct KernelPair {
  Perturbation pert;
  int N = 0;
  double residual = 0;  // ||delta_f + Q_N h|| / ||Q_N h||, Q_N h re-evaluated in nested form
  std::vector<std::string> log;
};

/// Derivative of the discrete Lambda_1 at (c, f) in the direction (delta_f, delta_c2):
/// trace of the solve with data [delta_f, 0] and source delta_c2 * Lap u.
BoundaryTrace delta_lambda1(const BasePoint& base, const Perturbation& pert, int threads = 1);

/// Q_N h = sum_{k=1}^N (c^2 Lap_D)^{-k} (h (c^2 Lap)^k f).
/// Appends "high-order Laplacians under-resolved" to `warnings` when N >= 4.
ScalarField apply_QN(const BasePoint& base, const ScalarField& h, int N,
                     std::vector<std::string>* warnings = nullptr);

/// Builds the pair; records a degeneracy warning (Lap f vanishing on supp h)
/// in the log instead of failing.
KernelPair build_kernel_pair(const BasePoint& base, const ScalarField& h, int N);

/// delta_lambda1 on the kernel pair of h: the smoothing remainder R_N h.
BoundaryTrace rn_residual(const BasePoint& base, const ScalarField& h, int N, int threads = 1);

struct TaylorReport {
  std::vector<double> eps;
  std::vector<double> remainders;  // ||Lambda1(c^2 + e dc2, f + e df) - Lambda1(c^2, f) - e dLambda1||
  double order = 0;                // least-squares slope of log remainder vs log eps
  TimeGrid tg;
};

/// First-order consistency of delta_lambda1 against the nonlinear forward map.
/// One time grid, sized for the largest speed over all eps, serves every solve.
TaylorReport taylor_check(const SpeedModel& speed, const ScalarField& f, const SupportBox& K,
                          const Perturbation& pert, const std::vector<double>& eps, double T, int threads = 1);

/// Remainder of the N-term expansion between (c, f) and (c~, f~):
/// (L~1 f~ - L1 f) - L1(f~ - f) - sum_{k<=N} L1 (c^2 Lap_D)^{-k}(h (c^2 Lap)^k f~), h = c^-2 (c~^2 - c^2).
BoundaryTrace expansion_remainder(const SpeedModel& speed, const ScalarField& f, const SpeedModel& speed_t,
                                  const ScalarField& f_t, int N, const TimeGrid& tg, int threads = 1);

/// (c^2 Lap)^k f on the domain with a Dirichlet context.
ScalarField power_of_P(const ScalarField& f, const SpeedModel& speed, int k);

}  // namespace mwave
