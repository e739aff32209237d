#pragma once

#include <array>
#include <string>

#include "mwave/grid.hpp"
#include "mwave/wave.hpp"

namespace mwave {

/// Boundary trace of the free-space solution with Cauchy data `data` on [0,T].
BoundaryTrace lambda(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads = 1);
/// lambda([f, 0]).
BoundaryTrace lambda1(const ScalarField& f, const SpeedModel& speed, const TimeGrid& tg, int threads = 1);
/// lambda([0, f]).
BoundaryTrace lambda2(const ScalarField& f, const SpeedModel& speed, const TimeGrid& tg, int threads = 1);

/// Cumulative trapezoid integral from t = 0; exact zero at t = 0.
BoundaryTrace dt_inv(const BoundaryTrace& h);
/// Time derivative: centered inside, second-order one-sided at both ends.
BoundaryTrace dt(const BoundaryTrace& h);

enum class IdentityId { P12a, P12b, P12c, P12d };
std::string to_string(IdentityId id);

struct OperatorResidualReport {
  IdentityId identity_id;
  double relative_residual = 0.0;
  int n = 0;
  int nt = 0;
  std::string f_description;
};

/// Both sides of each source/velocity trace identity, compared in trace L^2:
///   P12a  lambda2(c^2 Lap f)          vs  dt(lambda1 f)
///   P12b  dt(lambda2 f)               vs  lambda1 f
///   P12c  lambda2 f                   vs  dt_inv(lambda1 f)
///   P12d  dt_inv(lambda2 f)           vs  lambda1((c^2 Lap_D)^{-1} f)
/// f must vanish on the two outermost node rings.
std::array<OperatorResidualReport, 4> check_prop12(const ScalarField& f, const SpeedModel& speed,
                                                   const TimeGrid& tg, const std::string& description = {},
                                                   int threads = 1);

}  // namespace mwave
