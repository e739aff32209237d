#include "mwave/forward.hpp"

#include "mwave/operators.hpp"

namespace mwave {

BoundaryTrace lambda(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads) {
  SolveOptions opts;
  opts.threads = threads;
  return solve_free(data, speed, tg, opts).trace;
}

BoundaryTrace lambda1(const ScalarField& f, const SpeedModel& speed, const TimeGrid& tg, int threads) {
  return lambda({f, ScalarField(f.grid(), f.extent())}, speed, tg, threads);
}

BoundaryTrace lambda2(const ScalarField& f, const SpeedModel& speed, const TimeGrid& tg, int threads) {
  return lambda({ScalarField(f.grid(), f.extent()), f}, speed, tg, threads);
}

BoundaryTrace dt_inv(const BoundaryTrace& h) {
  BoundaryTrace out(h.grid(), h.time_grid());
  const double half_dt = 0.5 * h.time_grid().dt;
  for (int k = 1; k <= h.steps(); ++k) {
    auto prev = out.row(k - 1);
    auto row = out.row(k);
    auto a = h.row(k - 1), b = h.row(k);
    for (std::size_t q = 0; q < row.size(); ++q) row[q] = prev[q] + half_dt * (a[q] + b[q]);
  }
  return out;
}

BoundaryTrace dt(const BoundaryTrace& h) {
  const int nt = h.steps();
  if (nt < 2) throw std::invalid_argument("time derivative needs at least 3 samples");
  BoundaryTrace out(h.grid(), h.time_grid());
  const double inv = 1.0 / h.time_grid().dt;
  for (std::size_t q = 0; q < h.nodes(); ++q) {
    out.at(0, q) = (-3 * h.at(0, q) + 4 * h.at(1, q) - h.at(2, q)) * 0.5 * inv;
    for (int k = 1; k < nt; ++k) out.at(k, q) = (h.at(k + 1, q) - h.at(k - 1, q)) * 0.5 * inv;
    out.at(nt, q) = (3 * h.at(nt, q) - 4 * h.at(nt - 1, q) + h.at(nt - 2, q)) * 0.5 * inv;
  }
  return out;
}

std::string to_string(IdentityId id) {
  switch (id) {
    case IdentityId::P12a: return "P12a";
    case IdentityId::P12b: return "P12b";
    case IdentityId::P12c: return "P12c";
    case IdentityId::P12d: return "P12d";
  }
  return "?";
}

namespace {

double relative(const BoundaryTrace& lhs, const BoundaryTrace& rhs) {
  const double diff = trace_l2_norm(lhs - rhs);
  if (diff == 0.0) return 0.0;
  const double scale = trace_l2_norm(rhs);
  return scale > 0 ? diff / scale : diff / trace_l2_norm(lhs);
}

}  // namespace

std::array<OperatorResidualReport, 4> check_prop12(const ScalarField& f, const SpeedModel& speed,
                                                   const TimeGrid& tg, const std::string& description,
                                                   int threads) {
  require_same_layout(f, speed.c2());
  // Two-ring margin: the first interior ring must vanish too.
  ScalarField inner(f.grid());
  const int n = f.side();
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i)
      if (i == 1 || j == 1 || i == n - 2 || j == n - 2) inner(i, j) = f(i, j);
  if (f.boundary_ring_max() != 0.0 || inner.max_abs() != 0.0)
    throw std::invalid_argument("identity checks need f to vanish on the two outer node rings");

  const BoundaryTrace l1 = lambda1(f, speed, tg, threads);
  const BoundaryTrace l2 = lambda2(f, speed, tg, threads);
  const ScalarField pf = speed.c2() * apply_laplacian(f, StencilContext::None);
  const BoundaryTrace l2_pf = lambda2(pf, speed, tg, threads);
  const BoundaryTrace l1_inv = lambda1(dirichlet_solve(f, speed, 1), speed, tg, threads);

  std::array<OperatorResidualReport, 4> out;
  const std::array<std::pair<IdentityId, double>, 4> vals{{
      {IdentityId::P12a, relative(l2_pf, dt(l1))},
      {IdentityId::P12b, relative(dt(l2), l1)},
      {IdentityId::P12c, relative(l2, dt_inv(l1))},
      {IdentityId::P12d, relative(dt_inv(l2), l1_inv)},
  }};
  for (std::size_t k = 0; k < 4; ++k)
    out[k] = {vals[k].first, vals[k].second, f.grid()->n(), tg.nt, description};
  return out;
}

}  // namespace mwave
