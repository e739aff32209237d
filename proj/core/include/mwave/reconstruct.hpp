#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mwave/grid.hpp"
#include "mwave/wave.hpp"

namespace mwave {

/// Time-reversal pseudo-inverse: harmonic extension of h(T) as terminal state,
/// backward Dirichlet solve with boundary data h, returns [v(0), v_t(0)].
CauchyPair pseudo_inverse_A(const BoundaryTrace& h, const SpeedModel& speed, const TimeGrid& tg);

/// Error operator K = Id - A Lambda.
CauchyPair error_K(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads = 1);

/// Same operator through the zero-boundary Dirichlet system started from
/// [u(T) - phi, u_t(T)] at t = T, as in the contraction argument.
CauchyPair error_K_wsystem(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads = 1);

struct EnergyChain {
  double energy_f = 0;    // ||f||_H^2
  double energy_u_T = 0;  // E_Omega(u, T)
  double energy_w_T = 0;  // E_Omega(w, T) = ||u^T - phi||_HD^2 + ||u_t^T||^2
  double energy_w_0 = 0;  // ||K f||_H^2
  double projection_inner = 0;  // (u^T - phi, phi)_HD
  double projection_scale = 0;  // ||u^T - phi||_HD * ||phi||_HD
};

/// Terms of the energy inequality chain E(w,0) = E(w,T) <= E(u,T) <= ||f||^2.
EnergyChain energy_chain(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads = 1);

/// Random smooth Cauchy pair supported in [0.15, 0.85]^2 (a few Gaussian bumps
/// times a C-infinity cutoff).
CauchyPair random_smooth_pair(const GridPtr& grid, std::uint64_t seed);

struct KNormEstimate {
  double sampled = 0;      // max ||K f|| / ||f|| over random samples
  double power = 0;        // power-iteration ratio
  double estimate = 0;     // max of both
  std::vector<double> sample_ratios;
  std::vector<double> power_ratios;
};

KNormEstimate estimate_K_norm(const SpeedModel& speed, const TimeGrid& tg, int samples, std::uint64_t seed,
                              int power_iterations = 6, int threads = 1);

struct NeumannReport {
  std::vector<double> increment_norms;  // ||K^m A h||_H
  std::vector<double> errors;           // ||f_m - f||_H / ||f||_H when ground truth is given
  double rho_hat = 0;                   // exp(slope) of log increments vs m
  int iterations = 0;
  bool converged = false;
};

struct NeumannResult {
  CauchyPair f;
  NeumannReport report;
};

/// f = sum_m K^m A h, increments by the recurrence inc_{m+1} = K inc_m. Stops when
/// ||inc|| < tol * ||A h|| or after max_iter terms. Throws NumericalError("series
/// diverging (is T > T(Omega)?)") after 5 consecutive non-decreasing increments.
NeumannResult neumann_reconstruct(const BoundaryTrace& h, const SpeedModel& speed, const TimeGrid& tg,
                                  int max_iter, double tol, const CauchyPair* truth = nullptr, int threads = 1);

struct LeftInverseReport {
  double b1_l1 = 0;  // ||B1 Lambda1 f1 - f1|| / ||f1||
  double b2_l1 = 0;  // ||B2 Lambda1 f1|| / ||f1||
  double b1_l2 = 0;  // ||B1 Lambda2 f2|| / ||f2||
  double b2_l2 = 0;  // ||B2 Lambda2 f2 - f2|| / ||f2||
};

/// Residuals of B1 L1 = Id, B2 L1 = 0, B1 L2 = 0, B2 L2 = Id; norms taken in the
/// energy space, relative to ||[f1, 0]||_H and ||[0, f2]||_H.
LeftInverseReport left_inverse_identities(const ScalarField& f1, const ScalarField& f2, const SpeedModel& speed,
                                          const TimeGrid& tg, int max_iter = 15, double tol = 1e-6,
                                          int threads = 1);

/// Least-squares slope of log(values) against index.
double log_slope(const std::vector<double>& values);

}  // namespace mwave
