#include "mwave/operators.hpp"

#include <fftw3.h>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <complex>
#include <map>
#include <mutex>
#include <sstream>

namespace mwave {

ScalarField apply_laplacian(const ScalarField& u, StencilContext ctx) {
  if (ctx == StencilContext::None && u.boundary_ring_max() != 0.0)
    throw std::invalid_argument("laplacian at boundary without context");
  const int s = u.side();
  const double inv_h2 = 1.0 / (u.grid()->h() * u.grid()->h());
  ScalarField out(u.grid(), u.extent());
  auto at = [&](int i, int j) { return (i < 0 || j < 0 || i >= s || j >= s) ? 0.0 : u(i, j); };
  for (int j = 0; j < s; ++j) {
    const bool edge_row = j == 0 || j == s - 1;
    for (int i = 0; i < s; ++i) {
      if (edge_row || i == 0 || i == s - 1) {
        out(i, j) = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * u(i, j)) * inv_h2;
      } else {
        out(i, j) = (u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1) - 4 * u(i, j)) * inv_h2;
      }
    }
  }
  return out;
}

ScalarField apply_dirichlet_operator(const ScalarField& u, const SpeedModel& speed) {
  require_same_layout(u, speed.c2());
  ScalarField out = apply_laplacian(u, StencilContext::Dirichlet);
  const int n = u.side();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out(i, j) = (i == 0 || j == 0 || i == n - 1 || j == n - 1) ? 0.0 : out(i, j) * speed.c2()(i, j);
  return out;
}

// ---------------------------------------------------------------------------

struct DirichletLaplacian::Impl {
  using SpMat = Eigen::SparseMatrix<double>;
  SpMat A;  // -h^2 Lap on interior unknowns (SPD)
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt;
  std::unique_ptr<Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper>> cg;
};

DirichletLaplacian::~DirichletLaplacian() = default;

DirichletLaplacian::DirichletLaplacian(const GridPtr& grid)
    : impl_(std::make_unique<Impl>()), grid_(grid), n_(grid->n()) {
  const int m = n_ - 2;
  auto id = [m](int i, int j) { return (j - 1) * m + (i - 1); };
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(5) * m * m);
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= m; ++i) {
      t.emplace_back(id(i, j), id(i, j), 4.0);
      if (i > 1) t.emplace_back(id(i, j), id(i - 1, j), -1.0);
      if (i < m) t.emplace_back(id(i, j), id(i + 1, j), -1.0);
      if (j > 1) t.emplace_back(id(i, j), id(i, j - 1), -1.0);
      if (j < m) t.emplace_back(id(i, j), id(i, j + 1), -1.0);
    }
  impl_->A.resize(m * m, m * m);
  impl_->A.setFromTriplets(t.begin(), t.end());
  if (n_ <= 256) {
    impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<Impl::SpMat>>(impl_->A);
    if (impl_->ldlt->info() != Eigen::Success) throw NumericalError("elliptic solve failed: factorization");
  } else {
    impl_->cg = std::make_unique<Eigen::ConjugateGradient<Impl::SpMat, Eigen::Lower | Eigen::Upper>>();
    impl_->cg->setTolerance(1e-10);
    impl_->cg->setMaxIterations(20 * n_);
    impl_->cg->compute(impl_->A);
  }
}

bool DirichletLaplacian::direct() const { return impl_->ldlt != nullptr; }

std::shared_ptr<const DirichletLaplacian> DirichletLaplacian::for_grid(const GridPtr& grid) {
  static std::mutex mu;
  static std::map<int, std::weak_ptr<const DirichletLaplacian>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[grid->n()];
  if (auto p = slot.lock()) return p;
  std::shared_ptr<const DirichletLaplacian> p(new DirichletLaplacian(grid));
  slot = p;
  return p;
}

std::vector<double> DirichletLaplacian::solve(std::span<const double> rhs,
                                              std::span<const double> boundary) const {
  const int n = n_, m = n - 2;
  const double h2 = grid_->h() * grid_->h();
  const bool has_bc = !boundary.empty();
  if (rhs.size() != std::size_t(n) * n || (has_bc && boundary.size() != std::size_t(n) * n))
    throw std::invalid_argument("grid mismatch");
  auto bc = [&](int i, int j) { return has_bc ? boundary[std::size_t(j) * n + i] : 0.0; };

  Eigen::VectorXd b(m * m);
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= m; ++i) {
      double v = -h2 * rhs[std::size_t(j) * n + i];
      if (i == 1) v += bc(0, j);
      if (i == m) v += bc(n - 1, j);
      if (j == 1) v += bc(i, 0);
      if (j == m) v += bc(i, n - 1);
      b[(j - 1) * m + (i - 1)] = v;
    }
  Eigen::VectorXd x;
  if (impl_->ldlt) {
    x = impl_->ldlt->solve(b);
  } else {
    x = impl_->cg->solve(b);
    if (impl_->cg->info() != Eigen::Success) {
      std::ostringstream os;
      os << "elliptic solve failed: CG residual " << impl_->cg->error() << " after "
         << impl_->cg->iterations() << " iterations";
      throw NumericalError(os.str());
    }
  }
  const double bnorm = b.norm();
  if (bnorm > 0) {
    const double res = (impl_->A * x - b).norm() / bnorm;
    if (!(res < 1e-8)) {
      std::ostringstream os;
      os << "elliptic solve failed: relative residual " << res;
      throw NumericalError(os.str());
    }
  }
  std::vector<double> out(std::size_t(n) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out[std::size_t(j) * n + i] = (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                                        ? bc(i, j)
                                        : x[(j - 1) * m + (i - 1)];
  return out;
}

ScalarField dirichlet_solve(const ScalarField& rhs, const SpeedModel& speed, int power) {
  if (power < 1) throw std::invalid_argument("power must be >= 1");
  require_same_layout(rhs, speed.c2());
  auto solver = DirichletLaplacian::for_grid(rhs.grid());
  ScalarField v = rhs;
  for (int k = 0; k < power; ++k) {
    std::vector<double> scaled(v.values().begin(), v.values().end());
    for (std::size_t q = 0; q < scaled.size(); ++q) scaled[q] /= speed.c2()[q];
    v = ScalarField(rhs.grid(), Extent::Domain, solver->solve(scaled));
  }
  return v;
}

ScalarField harmonic_extension(const GridPtr& grid, std::span<const double> boundary_values) {
  const auto& idx = grid->boundary_idx();
  if (boundary_values.size() != idx.size())
    throw std::invalid_argument("one value per boundary node required");
  std::vector<double> bc(grid->domain_size(), 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) bc[idx[k]] = boundary_values[k];
  std::vector<double> zero(grid->domain_size(), 0.0);
  return ScalarField(grid, Extent::Domain, DirichletLaplacian::for_grid(grid)->solve(zero, bc));
}

// ---------------------------------------------------------------------------

double hd_inner(const ScalarField& f, const ScalarField& g) {
  require_same_layout(f, g);
  const int s = f.side();
  double acc = 0.0;
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i) {
      if (i + 1 < s) acc += (f(i + 1, j) - f(i, j)) * (g(i + 1, j) - g(i, j));
      if (j + 1 < s) acc += (f(i, j + 1) - f(i, j)) * (g(i, j + 1) - g(i, j));
    }
  return acc;
}

double hd_norm(const ScalarField& f) { return std::sqrt(hd_inner(f, f)); }

double l2_norm(const ScalarField& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v * v;
  const double h = f.grid()->h();
  return std::sqrt(acc) * h;
}

double l2c_norm(const ScalarField& f, const SpeedModel& speed) {
  if (!f.grid() || !(*f.grid() == *speed.grid())) throw std::invalid_argument("grid mismatch");
  const double h = f.grid()->h();
  double acc = 0.0;
  if (f.extent() == Extent::Domain) {
    for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * f[k] / speed.c2()[k];
  } else {
    const auto c2 = speed.padded_c2();
    for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * f[k] / c2[k];
  }
  return std::sqrt(acc) * h;
}

double energy(const CauchyPair& state, const SpeedModel& speed) {
  require_same_layout(state.f1, state.f2);
  const double a = hd_norm(state.f1), b = l2c_norm(state.f2, speed);
  return a * a + b * b;
}

// ---------------------------------------------------------------------------

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

void dft_inplace(std::vector<std::complex<double>>& buf, int M, int sign) {
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(M, M, data, data, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

/// Unnormalized forward DFT of the zero extension of f on an M x M square.
std::vector<std::complex<double>> zero_extended_dft(const ScalarField& f, int M) {
  const int n = f.side();
  std::vector<std::complex<double>> buf(std::size_t(M) * M);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) buf[std::size_t(j) * M + i] = f(i, j);
  dft_inplace(buf, M, FFTW_FORWARD);
  return buf;
}

double wavenumber(int k, int M, double L) {
  const int kk = k <= M / 2 ? k : k - M;
  return 2.0 * M_PI * kk / L;
}

}  // namespace

double sobolev_norm(const ScalarField& f, double s) {
  if (f.extent() != Extent::Domain) throw std::invalid_argument("sobolev_norm expects a domain field");
  if (f.boundary_ring_max() != 0.0) throw std::invalid_argument("not compactly supported");
  const int n = f.side(), M = 2 * n;
  const double h = f.grid()->h(), L = M * h;
  const auto F = zero_extended_dft(f, M);
  double acc = 0.0;
  for (int ky = 0; ky < M; ++ky) {
    const double xy = wavenumber(ky, M, L);
    for (int kx = 0; kx < M; ++kx) {
      const double xx = wavenumber(kx, M, L);
      const double w = s == 0.0 ? 1.0 : std::pow(1.0 + xx * xx + xy * xy, s);
      acc += w * std::norm(F[std::size_t(ky) * M + kx]);
    }
  }
  return std::sqrt(acc) * h / M;
}

ScalarField apply_fourier_multiplier(const ScalarField& f, const std::function<double(double)>& m) {
  if (f.extent() != Extent::Domain) throw std::invalid_argument("multiplier expects a domain field");
  const int n = f.side(), M = 2 * n;
  const double L = M * f.grid()->h();
  auto F = zero_extended_dft(f, M);
  for (int ky = 0; ky < M; ++ky) {
    const double xy = wavenumber(ky, M, L);
    for (int kx = 0; kx < M; ++kx) {
      const double xx = wavenumber(kx, M, L);
      F[std::size_t(ky) * M + kx] *= m(std::sqrt(xx * xx + xy * xy));
    }
  }
  dft_inplace(F, M, FFTW_BACKWARD);
  ScalarField out(f.grid());
  const double scale = 1.0 / (double(M) * M);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = F[std::size_t(j) * M + i].real() * scale;
  return out;
}

}  // namespace mwave
