#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwave {

/// Raised when a numerical routine cannot produce a trustworthy result
/// (solver non-convergence, CFL violation, diverging series).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node index range [i0, i1) x [j0, j1) in domain coordinates (i along x, j along y).
struct SupportBox {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

  bool empty() const { return i1 <= i0 || j1 <= j0; }
  bool contains(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
  SupportBox dilated(int k) const { return {i0 - k, i1 + k, j0 - k, j1 + k}; }
  friend bool operator==(const SupportBox&, const SupportBox&) = default;
};

/// Uniform Cartesian discretization of the unit square plus a free-space padding layer.
///
/// Domain nodes are (i, j), 0 <= i, j < n, at x = i*h, y = j*h. The padded grid has
/// side n + 2*pad and places the domain node (i, j) at (i + pad, j + pad).
class Grid {
 public:
  /// Pads so that pad*h >= c_max*T + 4h.
  static std::shared_ptr<const Grid> make(int n, double T, double c_max);
  static std::shared_ptr<const Grid> with_padding(int n, int pad);

  int n() const { return n_; }
  double h() const { return h_; }
  int pad() const { return pad_; }
  int padded_side() const { return n_ + 2 * pad_; }
  std::size_t domain_size() const { return std::size_t(n_) * n_; }
  std::size_t padded_size() const { return std::size_t(padded_side()) * padded_side(); }

  double x(int i) const { return i * h_; }
  double y(int j) const { return j * h_; }
  std::size_t index(int i, int j) const { return std::size_t(j) * n_ + i; }

  /// Boundary nodes of the unit square, counterclockwise from the origin; each once.
  const std::vector<std::size_t>& boundary_idx() const { return boundary_; }
  std::size_t boundary_count() const { return boundary_.size(); }

  /// Box of nodes whose coordinates lie in [x0, x1] x [y0, y1].
  SupportBox box_from_coords(double x0, double x1, double y0, double y1) const;

  bool satisfies_padding(double c_max, double T) const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.n_ == b.n_ && a.pad_ == b.pad_; }

 private:
  Grid(int n, int pad);
  int n_;
  double h_;
  int pad_;
  std::vector<std::size_t> boundary_;
};

using GridPtr = std::shared_ptr<const Grid>;

enum class Extent { Domain, Padded };

/// Real values over the nodes of a grid, row-major (j outer).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, Extent extent = Extent::Domain);
  ScalarField(GridPtr grid, Extent extent, std::vector<double> values);

  /// Samples fn(x, y) at every domain node.
  template <class Fn>
  static ScalarField from_function(GridPtr grid, Fn&& fn) {
    ScalarField f(grid);
    const int n = grid->n();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) f.values_[grid->index(i, j)] = fn(grid->x(i), grid->y(j));
    return f;
  }

  const GridPtr& grid() const { return grid_; }
  Extent extent() const { return extent_; }
  int side() const { return extent_ == Extent::Domain ? grid_->n() : grid_->padded_side(); }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[std::size_t(j) * side() + i]; }
  double operator()(int i, int j) const { return values_[std::size_t(j) * side() + i]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  const std::optional<SupportBox>& support() const { return support_; }
  /// Declares the field supported in `box`; throws if it has nonzero values outside.
  void declare_support(const SupportBox& box);

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double a);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double a, ScalarField f) { return f *= a; }
  /// Pointwise product.
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);

  double max_abs() const;
  bool is_zero() const { return max_abs() == 0.0; }
  /// Max |value| on the outermost node ring of this extent.
  double boundary_ring_max() const;
  /// Smallest box containing all nonzero entries (domain coordinates; may extend
  /// outside [0, n) for padded fields). Empty when the field is zero.
  SupportBox nonzero_box() const;

  /// Domain field embedded in the padded grid (zero outside).
  ScalarField padded() const;
  /// Padded field restricted to the domain nodes.
  ScalarField restricted() const;

  bool same_layout(const ScalarField& o) const {
    return grid_ && o.grid_ && *grid_ == *o.grid_ && extent_ == o.extent_;
  }

 private:
  GridPtr grid_;
  Extent extent_ = Extent::Domain;
  std::vector<double> values_;
  std::optional<SupportBox> support_;
};

/// Throws std::invalid_argument("grid mismatch") unless a and b share a layout.
void require_same_layout(const ScalarField& a, const ScalarField& b);

/// Element [f1, f2] of the energy space: position and velocity components.
struct CauchyPair {
  ScalarField f1;
  ScalarField f2;

  static CauchyPair zero(GridPtr grid, Extent extent = Extent::Domain) {
    return {ScalarField(grid, extent), ScalarField(grid, extent)};
  }
  const GridPtr& grid() const { return f1.grid(); }
  Extent extent() const { return f1.extent(); }

  CauchyPair& operator+=(const CauchyPair& o) { f1 += o.f1; f2 += o.f2; return *this; }
  CauchyPair& operator-=(const CauchyPair& o) { f1 -= o.f1; f2 -= o.f2; return *this; }
  CauchyPair& operator*=(double a) { f1 *= a; f2 *= a; return *this; }
  friend CauchyPair operator+(CauchyPair a, const CauchyPair& b) { return a += b; }
  friend CauchyPair operator-(CauchyPair a, const CauchyPair& b) { return a -= b; }
  friend CauchyPair operator*(double a, CauchyPair p) { return p *= a; }

  CauchyPair padded() const { return {f1.padded(), f2.padded()}; }
  CauchyPair restricted() const { return {f1.restricted(), f2.restricted()}; }
};

/// Squared sound speed c^2(x) on the domain; c^2 = 1 everywhere outside the domain.
class SpeedModel {
 public:
  explicit SpeedModel(ScalarField c2);
  static SpeedModel constant(GridPtr grid, double c2 = 1.0);

  const ScalarField& c2() const { return c2_; }
  const GridPtr& grid() const { return c2_.grid(); }
  double c_max() const;
  double c_min() const;
  /// c^2 sampled on the padded grid (1 outside the domain).
  std::vector<double> padded_c2() const;
  /// Conservative exit-time bound for the unit square: sqrt(2) / c_min.
  double exit_time_bound() const;

 private:
  ScalarField c2_;
};

}  // namespace mwave
