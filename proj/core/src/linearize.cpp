#include "mwave/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mwave/forward.hpp"
#include "mwave/operators.hpp"

namespace mwave {

namespace {

std::size_t box_size(const SupportBox& b) { return std::size_t(b.i1 - b.i0) * (b.j1 - b.j0); }

}  // namespace

BasePoint BasePoint::unprepared(SpeedModel speed, ScalarField source, SupportBox K) {
  require_same_layout(source, speed.c2());
  const int n = speed.grid()->n();
  if (K.empty() || K.i0 < 2 || K.j0 < 2 || K.i1 > n - 2 || K.j1 > n - 2)
    throw std::invalid_argument("K must be a nonempty box compactly inside the domain");
  return BasePoint(std::move(speed), std::move(source), K);
}

BasePoint BasePoint::prepare(SpeedModel speed, ScalarField source, SupportBox K, const TimeGrid& tg,
                             int threads) {
  BasePoint bp = unprepared(std::move(speed), std::move(source), K);
  bp.tg_ = tg;
  SolveOptions opts;
  opts.cube_box = K.dilated(1);
  opts.threads = threads;
  auto sol = solve_free({bp.source_, ScalarField(bp.source_.grid())}, bp.speed_, tg, opts);
  const SupportBox cb = *opts.cube_box;
  const int cw = cb.i1 - cb.i0;
  const double inv_h2 = 1.0 / (bp.speed_.grid()->h() * bp.speed_.grid()->h());
  const std::size_t ksz = box_size(K);
  bp.lap_cache_.resize(std::size_t(tg.nt + 1) * ksz);
  for (int k = 0; k <= tg.nt; ++k) {
    const auto u = sol.field.cube_slice(k);
    double* dst = bp.lap_cache_.data() + std::size_t(k) * ksz;
    for (int j = K.j0; j < K.j1; ++j)
      for (int i = K.i0; i < K.i1; ++i) {
        const std::size_t q = std::size_t(j - cb.j0) * cw + (i - cb.i0);
        *dst++ = (u[q + 1] + u[q - 1] + u[q + cw] + u[q - cw] - 4 * u[q]) * inv_h2;
      }
  }
  bp.base_trace_ = std::move(sol.trace);
  return bp;
}

std::span<const double> BasePoint::background_laplacian(int k) const {
  const std::size_t sz = box_size(K_);
  return {lap_cache_.data() + std::size_t(k) * sz, sz};
}

double BasePoint::laplacian_contrast() const {
  const ScalarField lap = apply_laplacian(source_, StencilContext::Dirichlet);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int j = K_.j0; j < K_.j1; ++j)
    for (int i = K_.i0; i < K_.i1; ++i) {
      lo = std::min(lo, std::abs(lap(i, j)));
      hi = std::max(hi, std::abs(lap(i, j)));
    }
  return hi > 0 ? lo / hi : 0.0;
}

void validate_perturbation(const Perturbation& p, const SupportBox& K) {
  require_same_layout(p.delta_f, p.delta_c2);
  if (p.delta_f.boundary_ring_max() != 0.0)
    throw std::invalid_argument("delta_f must vanish on the boundary");
  const int n = p.delta_c2.side();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (p.delta_c2(i, j) != 0.0 && !K.contains(i, j))
        throw std::invalid_argument("delta_c2 has values outside K");
}

BoundaryTrace delta_lambda1(const BasePoint& base, const Perturbation& pert, int threads) {
  if (!base.prepared()) throw std::invalid_argument("base point not prepared");
  require_same_layout(pert.delta_f, base.source());
  validate_perturbation(pert, base.K());
  const TimeGrid& tg = base.time_grid();
  CauchyPair data{pert.delta_f, ScalarField(pert.delta_f.grid())};
  SolveOptions opts;
  opts.threads = threads;
  if (pert.delta_c2.is_zero()) return solve_free(data, base.speed(), tg, opts).trace;

  const SupportBox K = base.K();
  std::vector<double> dc2;
  dc2.reserve(box_size(K));
  for (int j = K.j0; j < K.j1; ++j)
    for (int i = K.i0; i < K.i1; ++i) dc2.push_back(pert.delta_c2(i, j));
  SpacetimeSource src{K, [&](int k, std::span<double> out) {
                        const auto lap = base.background_laplacian(k);
                        for (std::size_t q = 0; q < out.size(); ++q) out[q] = dc2[q] * lap[q];
                      }};
  return solve_free(data, base.speed(), tg, opts, &src).trace;
}

ScalarField power_of_P(const ScalarField& f, const SpeedModel& speed, int k) {
  ScalarField p = f;
  for (int m = 0; m < k; ++m) p = speed.c2() * apply_laplacian(p, StencilContext::Dirichlet);
  return p;
}

ScalarField apply_QN(const BasePoint& base, const ScalarField& h, int N, std::vector<std::string>* warnings) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  require_same_layout(h, base.source());
  if (N >= 4 && warnings) warnings->push_back("high-order Laplacians under-resolved");
  ScalarField q(h.grid());
  if (h.is_zero()) return q;
  ScalarField pkf = base.source();
  for (int k = 1; k <= N; ++k) {
    pkf = base.speed().c2() * apply_laplacian(pkf, StencilContext::Dirichlet);
    q += dirichlet_solve(h * pkf, base.speed(), k);
  }
  return q;
}

KernelPair build_kernel_pair(const BasePoint& base, const ScalarField& h, int N) {
  KernelPair kp;
  kp.N = N;
  const int n = h.side();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (h(i, j) != 0.0 && !base.K().contains(i, j)) throw std::invalid_argument("h has values outside K");

  // Ellipticity: Lap f must not vanish on supp h.
  const ScalarField lap = apply_laplacian(base.source(), StencilContext::Dirichlet);
  double lap_max = lap.max_abs(), lap_min_on_h = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < h.size(); ++q)
    if (h[q] != 0.0) lap_min_on_h = std::min(lap_min_on_h, std::abs(lap[q]));
  if (!h.is_zero() && !(lap_min_on_h > 1e-3 * lap_max))
    kp.log.push_back("degenerate base: Laplacian of f vanishes on supp h");

  ScalarField qn = apply_QN(base, h, N, &kp.log);
  kp.pert.delta_f = -1.0 * qn;
  kp.pert.delta_c2 = base.speed().c2() * h;
  kp.pert.delta_c2.declare_support(base.K());

  // Independent evaluation in nested form: P_D^-1(h P f + P_D^-1(h P^2 f + ...)).
  std::vector<ScalarField> pk{base.source()};
  for (int k = 1; k <= N; ++k) pk.push_back(base.speed().c2() * apply_laplacian(pk.back(), StencilContext::Dirichlet));
  ScalarField nested(h.grid());
  for (int k = N; k >= 1; --k) nested = dirichlet_solve(h * pk[std::size_t(k)] + nested, base.speed(), 1);
  const double scale = l2_norm(qn);
  const double diff = l2_norm(kp.pert.delta_f + nested);
  kp.residual = scale > 0 ? diff / scale : diff;
  char buf[64];
  std::snprintf(buf, sizeof buf, "N=%d residual=%.3e", N, kp.residual);
  kp.log.emplace_back(buf);
  return kp;
}

BoundaryTrace rn_residual(const BasePoint& base, const ScalarField& h, int N, int threads) {
  return delta_lambda1(base, build_kernel_pair(base, h, N).pert, threads);
}

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0, n = 0;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (y[k] > 0) { mx += std::log(x[k]); my += std::log(y[k]); n += 1; }
  if (n < 2) return 0.0;
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (y[k] > 0) {
      const double a = std::log(x[k]) - mx;
      sxx += a * a;
      sxy += a * (std::log(y[k]) - my);
    }
  return sxy / sxx;
}

}  // namespace

TaylorReport taylor_check(const SpeedModel& speed, const ScalarField& f, const SupportBox& K,
                          const Perturbation& pert, const std::vector<double>& eps, double T, int threads) {
  if (eps.size() < 2) throw std::invalid_argument("need at least two step sizes");
  validate_perturbation(pert, K);
  std::vector<SpeedModel> speeds;
  double c_max = speed.c_max();
  for (double e : eps) {
    speeds.emplace_back(speed.c2() + e * pert.delta_c2);
    c_max = std::max(c_max, speeds.back().c_max());
  }
  const auto& grid = speed.grid();
  if (!grid->satisfies_padding(c_max, T)) throw std::invalid_argument("padding too small for perturbed speed");
  TaylorReport rep;
  rep.tg = TimeGrid::for_speed(T, grid->h(), c_max);
  const BasePoint base = BasePoint::prepare(speed, f, K, rep.tg, threads);
  const BoundaryTrace lin = delta_lambda1(base, pert, threads);
  const BoundaryTrace& l0 = base.base_trace();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const BoundaryTrace le = lambda1(f + eps[k] * pert.delta_f, speeds[k], rep.tg, threads);
    rep.eps.push_back(eps[k]);
    rep.remainders.push_back(trace_l2_norm(le - l0 - eps[k] * lin));
  }
  rep.order = loglog_slope(rep.eps, rep.remainders);
  return rep;
}

BoundaryTrace expansion_remainder(const SpeedModel& speed, const ScalarField& f, const SpeedModel& speed_t,
                                  const ScalarField& f_t, int N, const TimeGrid& tg, int threads) {
  require_same_layout(f, f_t);
  ScalarField h(f.grid());
  for (std::size_t q = 0; q < h.size(); ++q) h[q] = (speed_t.c2()[q] - speed.c2()[q]) / speed.c2()[q];
  BoundaryTrace r = lambda1(f_t, speed_t, tg, threads) - lambda1(f, speed, tg, threads) -
                    lambda1(f_t - f, speed, tg, threads);
  ScalarField pk = f_t;
  ScalarField sum(f.grid());
  for (int k = 1; k <= N; ++k) {
    pk = speed.c2() * apply_laplacian(pk, StencilContext::Dirichlet);
    sum += dirichlet_solve(h * pk, speed, k);
  }
  return r - lambda1(sum, speed, tg, threads);
}

}  // namespace mwave
