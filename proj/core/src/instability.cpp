#include "mwave/instability.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "mwave/io.hpp"
#include "mwave/operators.hpp"

namespace mwave {

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::Kernel: return "kernel";
    case SweepKind::ControlC2: return "control_dc2";
    case SweepKind::GenericF: return "generic_df";
  }
  return "?";
}

std::vector<double> default_lambdas(double h, int count) {
  if (count < 2) throw std::invalid_argument("need at least two frequencies");
  const double lo = 4 * std::numbers::pi, hi = max_resolved_lambda(h);
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = lo * std::pow(hi / lo, double(k) / (count - 1));
  out.back() = hi;
  return out;
}

ScalarField oscillatory_h(const SweepConfig& cfg, double lambda) {
  const auto& grid = cfg.cutoff.grid();
  if (!grid) throw std::invalid_argument("sweep cutoff not set");
  if (lambda > max_resolved_lambda(grid->h()) * (1 + 1e-12)) throw std::invalid_argument("unresolved frequency");
  const double amp = std::pow(lambda, -cfg.s3);
  const double wx = cfg.omega[0], wy = cfg.omega[1];
  ScalarField h(grid);
  const int n = grid->n();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double phi = cfg.cutoff(i, j);
      if (phi != 0.0) h(i, j) = amp * std::cos(lambda * (wx * grid->x(i) + wy * grid->y(j))) * phi;
    }
  return h;
}

ScalarField bump(const GridPtr& grid, double x0, double y0, double radius) {
  return ScalarField::from_function(grid, [&](double x, double y) {
    const double r2 = ((x - x0) * (x - x0) + (y - y0) * (y - y0)) / (radius * radius);
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  });
}

SlopeFit fit_loglog_upper(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] > 0 && y[k] > 0 && std::isfinite(y[k])) pts.emplace_back(std::log(x[k]), std::log(y[k]));
  std::sort(pts.begin(), pts.end());
  const std::size_t total = x.size();
  const std::size_t take = std::max<std::size_t>(4, (total + 1) / 2);
  if (pts.size() < 4 || pts.size() < take) throw std::invalid_argument("insufficient sweep");
  pts.erase(pts.begin(), pts.end() - std::ptrdiff_t(take));

  const double n = double(pts.size());
  double mx = 0, my = 0;
  for (auto [a, b] : pts) { mx += a; my += b; }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (auto [a, b] : pts) {
    sxx += (a - mx) * (a - mx);
    sxy += (a - mx) * (b - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double rss = 0;
  for (auto [a, b] : pts) {
    const double r = b - my - fit.slope * (a - mx);
    rss += r * r;
  }
  fit.std_error = std::sqrt(rss / (n - 2) / sxx);
  fit.points = int(pts.size());
  return fit;
}

Perturbation sweep_perturbation(const BasePoint& base, const ScalarField& h, SweepKind kind, int N,
                                std::vector<std::string>* log) {
  const ScalarField zero(h.grid());
  switch (kind) {
    case SweepKind::Kernel: {
      KernelPair kp = build_kernel_pair(base, h, N);
      if (log) log->insert(log->end(), kp.log.begin(), kp.log.end());
      return std::move(kp.pert);
    }
    case SweepKind::ControlC2: return {zero, base.speed().c2() * h};
    case SweepKind::GenericF: return {h, zero};
  }
  throw std::invalid_argument("unknown sweep kind");
}

namespace {

/// Runs job(k) for k in [0, count) on up to `threads` workers; rethrows the first error.
template <class Job>
void run_jobs(std::size_t count, int threads, Job&& job) {
  const int workers = int(std::min<std::size_t>(std::max(1, threads), count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < count;) {
        try {
          job(k);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double pair_norm(const Perturbation& p, double s) {
  return (p.delta_f.is_zero() ? 0.0 : sobolev_norm(p.delta_f, s)) +
         (p.delta_c2.is_zero() ? 0.0 : sobolev_norm(p.delta_c2, s));
}

}  // namespace

DecayReport decay_sweep(const BasePoint& base, const SweepConfig& cfg, SweepKind kind, int threads) {
  if (!base.prepared()) throw std::invalid_argument("base point not prepared");
  if (cfg.lambdas.size() < 4) throw std::invalid_argument("insufficient sweep");
  if (cfg.s2 != 0 && cfg.s2 != 1) throw std::invalid_argument("trace norm index must be 0 or 1");
  DecayReport rep;
  rep.kind = kind;
  rep.N = cfg.N;
  std::vector<double> lambdas = cfg.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  for (double lam : lambdas) oscillatory_h(cfg, lam);  // validates resolution up front

  rep.rows.resize(lambdas.size());
  std::vector<std::vector<std::string>> logs(lambdas.size());
  run_jobs(lambdas.size(), threads, [&](std::size_t k) {
    const ScalarField h = oscillatory_h(cfg, lambdas[k]);
    const Perturbation p = sweep_perturbation(base, h, kind, cfg.N, &logs[k]);
    const BoundaryTrace tr = delta_lambda1(base, p, 1);
    DecayRow& row = rep.rows[k];
    row.lambda = lambdas[k];
    row.input_norm = pair_norm(p, cfg.s1);
    row.output_norm = trace_sobolev_norm(tr, int(cfg.s2));
    row.ratio = row.input_norm > 0 ? row.output_norm / row.input_norm : 0.0;
    row.constraint_norm = pair_norm(p, cfg.s3);
  });
  for (auto& l : logs)
    for (auto& s : l)
      if (std::find(rep.log.begin(), rep.log.end(), s) == rep.log.end() && s.rfind("N=", 0) != 0)
        rep.log.push_back(s);

  std::vector<double> lam, out, ratio;
  for (const auto& r : rep.rows) {
    lam.push_back(r.lambda);
    out.push_back(r.output_norm);
    ratio.push_back(r.ratio);
  }
  rep.output_slope = fit_loglog_upper(lam, out);
  rep.ratio_slope = fit_loglog_upper(lam, ratio);
  return rep;
}

SlopeFit holder_slope(const DecayReport& report, double mu) {
  std::vector<double> lam, val;
  for (const auto& r : report.rows) {
    lam.push_back(r.lambda);
    val.push_back(r.input_norm > 0 ? std::pow(r.output_norm, mu) / r.input_norm : 0.0);
  }
  return fit_loglog_upper(lam, val);
}

DefaultBase default_base(const GridPtr& grid) {
  // exp(-r^2/a^2 - r^4/b^4): Lap f < 0 for r < 0.226, below 1e-9 on the boundary.
  constexpr double a2 = 0.25, b4 = 3.17e-3;
  DefaultBase b;
  b.source = ScalarField::from_function(grid, [&](double x, double y) {
    const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
    return std::exp(-r2 / a2 - r2 * r2 / b4);
  });
  b.K = grid->box_from_coords(0.3, 0.7, 0.3, 0.7);
  b.cutoff = bump(grid, 0.5, 0.5, 0.18);
  return b;
}

Eigen::MatrixXd assemble_operator_matrix(const BasePoint& base, const std::vector<Perturbation>& basis,
                                         int threads) {
  const TimeGrid& tg = base.time_grid();
  const auto& grid = base.speed().grid();
  const std::size_t nb = grid->boundary_count();
  const std::size_t rows = std::size_t(tg.nt + 1) * nb;
  std::vector<double> weight(tg.nt + 1, std::sqrt(tg.dt * grid->h()));
  weight.front() = weight.back() = std::sqrt(0.5 * tg.dt * grid->h());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(rows), Eigen::Index(basis.size()));
  run_jobs(basis.size(), threads, [&](std::size_t j) {
    const auto& p = basis[j];
    if (p.delta_f.is_zero() && p.delta_c2.is_zero()) return;
    const BoundaryTrace tr = delta_lambda1(base, p, 1);
    double* col = A.col(Eigen::Index(j)).data();
    for (int k = 0; k <= tg.nt; ++k) {
      const auto row = tr.row(k);
      for (std::size_t b = 0; b < nb; ++b) col[std::size_t(k) * nb + b] = weight[k] * row[b];
    }
  });
  return A;
}

void normalize_basis(std::vector<Perturbation>& basis) {
  for (auto& p : basis) {
    const double s = l2_norm(p.delta_c2) + l2_norm(p.delta_f);
    if (s > 0) {
      p.delta_f *= 1.0 / s;
      p.delta_c2 *= 1.0 / s;
    }
  }
}

SpectrumReport svd_decay(const Eigen::MatrixXd& matrix, const std::string& subspace_id) {
  SpectrumReport rep;
  rep.subspace_id = subspace_id;
  rep.m = int(matrix.cols());
  if (matrix.cols() == 0) {
    rep.rank_note = "empty matrix";
    return rep;
  }
  Eigen::VectorXd s;
  if (matrix.rows() > matrix.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(matrix);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(matrix.cols()).triangularView<Eigen::Upper>();
    s = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
  } else {
    s = Eigen::JacobiSVD<Eigen::MatrixXd>(matrix).singularValues();
  }
  rep.sigma.assign(s.data(), s.data() + s.size());
  rep.sigma.resize(std::size_t(rep.m), 0.0);
  std::sort(rep.sigma.begin(), rep.sigma.end(), std::greater<>());
  const double s1 = rep.sigma.front();
  for (double v : rep.sigma) rep.sigma_normalized.push_back(s1 > 0 ? v / s1 : 0.0);
  if (s1 == 0.0) {
    rep.rank_note = "zero matrix";
  } else {
    const double tol = s1 * double(std::max(matrix.rows(), matrix.cols())) * 2.2e-16;
    const auto rank = std::count_if(rep.sigma.begin(), rep.sigma.end(), [&](double v) { return v > tol; });
    if (rank < rep.m) rep.rank_note = "numerical rank " + std::to_string(rank) + " of " + std::to_string(rep.m);
  }
  return rep;
}

std::vector<Perturbation> oscillatory_basis(const BasePoint& base, const SweepConfig& cfg, SweepKind kind,
                                            const std::vector<double>& lambdas) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double theta0 = std::atan2(cfg.omega[1], cfg.omega[0]);
  std::vector<Perturbation> basis;
  SweepConfig c = cfg;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double th = theta0 + golden * double(k);
    c.omega = {std::cos(th), std::sin(th)};
    basis.push_back(sweep_perturbation(base, oscillatory_h(c, lambdas[k]), kind, cfg.N));
  }
  return basis;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void emit_report(const ReportBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  fs::create_directories(dir);
  json files = json::array();
  for (std::size_t k = 0; k < bundle.decays.size(); ++k) {
    const std::string name = "decay_" + std::to_string(k) + ".csv";
    io::write_decay_csv((fs::path(dir) / name).string(), bundle.decays[k]);
    const auto& d = bundle.decays[k];
    files.push_back({{"file", name},
                     {"kind", to_string(d.kind)},
                     {"N", d.N},
                     {"slope", d.output_slope.slope},
                     {"slope_std_error", d.output_slope.std_error},
                     {"ratio_slope", d.ratio_slope.slope},
                     {"log", d.log}});
  }
  for (std::size_t k = 0; k < bundle.spectra.size(); ++k) {
    const std::string name = "spectrum_" + std::to_string(k) + ".csv";
    io::write_spectrum_csv((fs::path(dir) / name).string(), bundle.spectra[k]);
    files.push_back({{"file", name},
                     {"subspace_id", bundle.spectra[k].subspace_id},
                     {"m", bundle.spectra[k].m},
                     {"rank_note", bundle.spectra[k].rank_note}});
  }
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(bundle.config_text)));
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  const json manifest = {{"config_hash", hash},
                         {"grid", bundle.grid_text},
                         {"base_point", bundle.base_point},
                         {"timestamps", {{"written", stamp}}},
                         {"reports", files}};
  io::write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace mwave
