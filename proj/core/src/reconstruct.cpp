#include "mwave/reconstruct.hpp"

#include <cmath>
#include <random>

#include "mwave/forward.hpp"
#include "mwave/operators.hpp"

namespace mwave {

CauchyPair pseudo_inverse_A(const BoundaryTrace& h, const SpeedModel& speed, const TimeGrid& tg) {
  if (!(*h.grid() == *speed.grid()) || !(h.time_grid() == tg)) throw std::invalid_argument("grid mismatch");
  double first = 0.0;
  for (double v : h.row(0)) first = std::max(first, std::abs(v));
  if (first > 1e-12 * std::max(1.0, h.max_abs()))
    throw std::invalid_argument("trace must vanish at t = 0");
  const ScalarField phi = harmonic_extension(h.grid(), h.row(tg.nt));
  return solve_dirichlet_backward(&h, {phi, ScalarField(h.grid())}, speed, tg);
}

CauchyPair error_K(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads) {
  return data - pseudo_inverse_A(lambda(data, speed, tg, threads), speed, tg);
}

namespace {

struct TerminalState {
  CauchyPair u_T;  // domain restriction of [u(T), u_t(T)]
  ScalarField phi;
};

TerminalState terminal_state(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads) {
  SolveOptions opts;
  opts.snapshot_steps = {tg.nt};
  opts.threads = threads;
  auto sol = solve_free(data, speed, tg, opts);
  CauchyPair uT = sol.field.snapshots.front().restricted();
  std::vector<double> bvals;
  bvals.reserve(uT.grid()->boundary_count());
  for (auto q : uT.grid()->boundary_idx()) bvals.push_back(uT.f1[q]);
  return {std::move(uT), harmonic_extension(data.grid(), bvals)};
}

}  // namespace

CauchyPair error_K_wsystem(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads) {
  auto ts = terminal_state(data, speed, tg, threads);
  CauchyPair w_T{ts.u_T.f1 - ts.phi, ts.u_T.f2};
  return solve_dirichlet_backward(nullptr, w_T, speed, tg);
}

EnergyChain energy_chain(const CauchyPair& data, const SpeedModel& speed, const TimeGrid& tg, int threads) {
  auto ts = terminal_state(data, speed, tg, threads);
  const ScalarField diff = ts.u_T.f1 - ts.phi;
  CauchyPair w_T{diff, ts.u_T.f2};
  const CauchyPair w_0 = solve_dirichlet_backward(nullptr, w_T, speed, tg);
  EnergyChain e;
  e.energy_f = energy(data, speed);
  e.energy_u_T = energy(ts.u_T, speed);
  e.energy_w_T = energy(w_T, speed);
  e.energy_w_0 = energy(w_0, speed);
  e.projection_inner = hd_inner(diff, ts.phi);
  e.projection_scale = hd_norm(diff) * hd_norm(ts.phi);
  return e;
}

namespace {

double smooth_step(double t) {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// 1 on [0.2, 0.8], 0 outside (0.15, 0.85), C-infinity in between.
double window(double x) { return smooth_step((x - 0.15) / 0.05) * smooth_step((0.85 - x) / 0.05); }

}  // namespace

CauchyPair random_smooth_pair(const GridPtr& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(0.3, 0.7), width(0.05, 0.12), amp(-1.0, 1.0);
  auto make = [&](double scale) {
    struct Bump { double x, y, w, a; };
    std::vector<Bump> bumps(3);
    for (auto& b : bumps) b = {center(rng), center(rng), width(rng), scale * amp(rng)};
    return ScalarField::from_function(grid, [&](double x, double y) {
      double v = 0.0;
      for (const auto& b : bumps) {
        const double r2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        v += b.a * std::exp(-r2 / (b.w * b.w));
      }
      return v * window(x) * window(y);
    });
  };
  ScalarField f1 = make(1.0);
  ScalarField f2 = make(10.0);
  return {std::move(f1), std::move(f2)};
}

KNormEstimate estimate_K_norm(const SpeedModel& speed, const TimeGrid& tg, int samples, std::uint64_t seed,
                              int power_iterations, int threads) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  KNormEstimate est;
  const auto& grid = speed.grid();
  for (int s = 0; s < samples; ++s) {
    const CauchyPair f = random_smooth_pair(grid, seed + std::uint64_t(s));
    const double nf = energy_norm(f, speed);
    const double r = energy_norm(error_K(f, speed, tg, threads), speed) / nf;
    est.sample_ratios.push_back(r);
    est.sampled = std::max(est.sampled, r);
  }
  CauchyPair x = random_smooth_pair(grid, seed + 0x9e3779b97f4a7c15ULL);
  x *= 1.0 / energy_norm(x, speed);
  for (int it = 0; it < power_iterations; ++it) {
    CauchyPair y = error_K(x, speed, tg, threads);
    const double ny = energy_norm(y, speed);
    est.power_ratios.push_back(ny);
    if (ny == 0.0) break;
    x = (1.0 / ny) * std::move(y);
  }
  est.power = est.power_ratios.empty() ? 0.0 : est.power_ratios.back();
  est.estimate = std::max(est.sampled, est.power);
  return est;
}

double log_slope(const std::vector<double>& values) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k] > 0) {
      xs.push_back(double(k));
      ys.push_back(std::log(values[k]));
    }
  if (xs.size() < 2) return 0.0;
  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) { mx += xs[k]; my += ys[k]; }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return sxy / sxx;
}

NeumannResult neumann_reconstruct(const BoundaryTrace& h, const SpeedModel& speed, const TimeGrid& tg,
                                  int max_iter, double tol, const CauchyPair* truth, int threads) {
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  NeumannResult res{pseudo_inverse_A(h, speed, tg), {}};
  auto& rep = res.report;
  const double truth_norm = truth ? energy_norm(*truth, speed) : 0.0;
  auto record_error = [&] {
    if (!truth) return;
    const double e = energy_norm(res.f - *truth, speed);
    rep.errors.push_back(truth_norm > 0 ? e / truth_norm : e);
  };
  CauchyPair inc = res.f;
  const double ah = energy_norm(inc, speed);
  rep.increment_norms.push_back(ah);
  rep.iterations = 1;
  record_error();
  int nondecreasing = 0;
  while (true) {
    if (rep.increment_norms.back() <= tol * ah) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= max_iter) break;
    inc = error_K(inc, speed, tg, threads);
    res.f += inc;
    const double nrm = energy_norm(inc, speed);
    nondecreasing = nrm >= rep.increment_norms.back() ? nondecreasing + 1 : 0;
    rep.increment_norms.push_back(nrm);
    ++rep.iterations;
    record_error();
    if (nondecreasing >= 5) throw NumericalError("series diverging (is T > T(Omega)?)");
  }
  rep.rho_hat = std::exp(log_slope(rep.increment_norms));
  return res;
}

LeftInverseReport left_inverse_identities(const ScalarField& f1, const ScalarField& f2, const SpeedModel& speed,
                                          const TimeGrid& tg, int max_iter, double tol, int threads) {
  const ScalarField zero(f1.grid());
  auto ratio = [](double a, double b) { return b > 0 ? a / b : a; };
  LeftInverseReport rep;
  const double n1 = hd_norm(f1), n2 = l2c_norm(f2, speed);
  {
    auto r = neumann_reconstruct(lambda1(f1, speed, tg, threads), speed, tg, max_iter, tol, nullptr, threads);
    rep.b1_l1 = ratio(hd_norm(r.f.f1 - f1), n1);
    rep.b2_l1 = ratio(l2c_norm(r.f.f2, speed), n1);
  }
  {
    auto r = neumann_reconstruct(lambda2(f2, speed, tg, threads), speed, tg, max_iter, tol, nullptr, threads);
    rep.b1_l2 = ratio(hd_norm(r.f.f1), n2);
    rep.b2_l2 = ratio(l2c_norm(r.f.f2 - f2, speed), n2);
  }
  return rep;
}

}  // namespace mwave
