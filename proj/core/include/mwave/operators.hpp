#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mwave/grid.hpp"

namespace mwave {

/// How the 5-point stencil treats the outermost node ring.
enum class StencilContext {
  /// Field must vanish on the ring; the zero extension supplies the ghosts.
  None,
  /// Caller declares homogeneous Dirichlet context: ghosts are zero.
  Dirichlet,
};

/// 5-point Laplacian (u_{i+1,j} + u_{i-1,j} + u_{i,j+1} + u_{i,j-1} - 4 u_{i,j}) / h^2.
///
/// Throws std::invalid_argument("laplacian at boundary without context") when the
/// context is None and u is nonzero on the boundary ring.
ScalarField apply_laplacian(const ScalarField& u, StencilContext ctx = StencilContext::None);

/// c^2 * Laplacian of u (domain extent), with the output zeroed on the boundary ring.
ScalarField apply_dirichlet_operator(const ScalarField& u, const SpeedModel& speed);

/// Factorized 5-point Dirichlet Laplacian on the interior nodes of an n x n grid.
///
/// Sparse LDL^T for n <= 256, conjugate gradients (relative tolerance 1e-10)
/// above that. Immutable after construction; solve() may run concurrently.
class DirichletLaplacian {
 public:
  static std::shared_ptr<const DirichletLaplacian> for_grid(const GridPtr& grid);
  ~DirichletLaplacian();

  /// Solves Lap v = rhs at interior nodes with v = boundary values on the ring
  /// (zero when `boundary` is empty). Only interior entries of rhs are read.
  std::vector<double> solve(std::span<const double> rhs, std::span<const double> boundary = {}) const;

  int n() const { return n_; }
  bool direct() const;

 private:
  explicit DirichletLaplacian(const GridPtr& grid);
  struct Impl;
  std::unique_ptr<Impl> impl_;
  GridPtr grid_;
  int n_;
};

/// v with (c^2 Lap)^k v = rhs and v = 0 on the boundary, by k nested Dirichlet solves.
ScalarField dirichlet_solve(const ScalarField& rhs, const SpeedModel& speed, int power = 1);

/// Discrete harmonic function with the given values on the boundary nodes (ordered
/// as Grid::boundary_idx()).
ScalarField harmonic_extension(const GridPtr& grid, std::span<const double> boundary_values);

// Norms. Sums run over all nodes (or edges) of the field's extent.

/// Dirichlet inner product sum over grid edges of the forward differences.
double hd_inner(const ScalarField& f, const ScalarField& g);
double hd_norm(const ScalarField& f);
/// L^2(c^-2 dx) norm; c = 1 on padded nodes outside the domain.
double l2c_norm(const ScalarField& f, const SpeedModel& speed);
double l2_norm(const ScalarField& f);
/// Squared energy-space norm hd_norm(f1)^2 + l2c_norm(f2)^2.
double energy(const CauchyPair& state, const SpeedModel& speed);
inline double energy_norm(const CauchyPair& s, const SpeedModel& c) { return std::sqrt(energy(s, c)); }

/// H^s norm of the zero extension via a 2D DFT on a square of side 2n:
/// ||f||^2 = sum (1 + |xi|^2)^s |f_hat(xi)|^2 with physical wavenumbers xi.
/// Throws std::invalid_argument("not compactly supported") if f touches the boundary.
double sobolev_norm(const ScalarField& f, double s);

/// Applies the radial Fourier multiplier m(|xi|) to the zero extension of f and
/// restricts back to the domain.
ScalarField apply_fourier_multiplier(const ScalarField& f, const std::function<double(double)>& m);

}  // namespace mwave
