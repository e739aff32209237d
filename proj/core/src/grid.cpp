#include "mwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mwave {

Grid::Grid(int n, int pad) : n_(n), h_(1.0 / (n - 1)), pad_(pad) {
  boundary_.reserve(4 * std::size_t(n - 1));
  for (int i = 0; i < n - 1; ++i) boundary_.push_back(index(i, 0));
  for (int j = 0; j < n - 1; ++j) boundary_.push_back(index(n - 1, j));
  for (int i = n - 1; i > 0; --i) boundary_.push_back(index(i, n - 1));
  for (int j = n - 1; j > 0; --j) boundary_.push_back(index(0, j));
}

std::shared_ptr<const Grid> Grid::with_padding(int n, int pad) {
  if (n < 5) throw std::invalid_argument("grid needs at least 5 nodes per side");
  if (pad < 1) throw std::invalid_argument("padding must be at least one node");
  return std::shared_ptr<const Grid>(new Grid(n, pad));
}

std::shared_ptr<const Grid> Grid::make(int n, double T, double c_max) {
  if (n < 5) throw std::invalid_argument("grid needs at least 5 nodes per side");
  if (!(T > 0) || !(c_max > 0)) throw std::invalid_argument("T and c_max must be positive");
  const double h = 1.0 / (n - 1);
  const int pad = int(std::ceil(c_max * T / h - 1e-9)) + 4;
  return with_padding(n, pad);
}

SupportBox Grid::box_from_coords(double x0, double x1, double y0, double y1) const {
  const double eps = 1e-9 * h_;
  SupportBox b;
  b.i0 = std::max(0, int(std::ceil((x0 - eps) / h_)));
  b.i1 = std::min(n_, int(std::floor((x1 + eps) / h_)) + 1);
  b.j0 = std::max(0, int(std::ceil((y0 - eps) / h_)));
  b.j1 = std::min(n_, int(std::floor((y1 + eps) / h_)) + 1);
  return b;
}

bool Grid::satisfies_padding(double c_max, double T) const {
  return pad_ * h_ >= c_max * T + 4 * h_ - 1e-9 * h_;
}

ScalarField::ScalarField(GridPtr grid, Extent extent)
    : grid_(std::move(grid)), extent_(extent) {
  values_.assign(extent_ == Extent::Domain ? grid_->domain_size() : grid_->padded_size(), 0.0);
}

ScalarField::ScalarField(GridPtr grid, Extent extent, std::vector<double> values)
    : grid_(std::move(grid)), extent_(extent), values_(std::move(values)) {
  const std::size_t want = extent_ == Extent::Domain ? grid_->domain_size() : grid_->padded_size();
  if (values_.size() != want) throw std::invalid_argument("field size does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("field has non-finite entries");
}

void require_same_layout(const ScalarField& a, const ScalarField& b) {
  if (!a.same_layout(b)) throw std::invalid_argument("grid mismatch");
}

void ScalarField::declare_support(const SupportBox& box) {
  const int s = side();
  const int off = extent_ == Extent::Padded ? grid_->pad() : 0;
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i)
      if ((*this)(i, j) != 0.0 && !box.contains(i - off, j - off))
        throw std::invalid_argument("field has values outside its declared support");
  support_ = box;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_layout(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  support_.reset();
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_layout(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  support_.reset();
  return *this;
}

ScalarField& ScalarField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_layout(a, b);
  ScalarField r = a;
  for (std::size_t k = 0; k < r.values_.size(); ++k) r.values_[k] *= b.values_[k];
  return r;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::boundary_ring_max() const {
  const int s = side();
  double m = 0.0;
  for (int k = 0; k < s; ++k) {
    m = std::max({m, std::abs((*this)(k, 0)), std::abs((*this)(k, s - 1)),
                  std::abs((*this)(0, k)), std::abs((*this)(s - 1, k))});
  }
  return m;
}

SupportBox ScalarField::nonzero_box() const {
  const int s = side();
  const int off = extent_ == Extent::Padded ? grid_->pad() : 0;
  SupportBox b{std::numeric_limits<int>::max(), std::numeric_limits<int>::min(),
               std::numeric_limits<int>::max(), std::numeric_limits<int>::min()};
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i)
      if ((*this)(i, j) != 0.0) {
        b.i0 = std::min(b.i0, i - off);
        b.i1 = std::max(b.i1, i - off + 1);
        b.j0 = std::min(b.j0, j - off);
        b.j1 = std::max(b.j1, j - off + 1);
      }
  if (b.i1 < b.i0) return {};
  return b;
}

ScalarField ScalarField::padded() const {
  if (extent_ == Extent::Padded) return *this;
  ScalarField p(grid_, Extent::Padded);
  const int n = grid_->n(), pad = grid_->pad();
  for (int j = 0; j < n; ++j)
    std::copy_n(&values_[std::size_t(j) * n], n, &p(pad, j + pad));
  p.support_ = support_;
  return p;
}

ScalarField ScalarField::restricted() const {
  if (extent_ == Extent::Domain) return *this;
  ScalarField d(grid_, Extent::Domain);
  const int n = grid_->n(), pad = grid_->pad();
  for (int j = 0; j < n; ++j)
    std::copy_n(&values_[std::size_t(j + pad) * grid_->padded_side() + pad], n, &d.values_[std::size_t(j) * n]);
  return d;
}

SpeedModel::SpeedModel(ScalarField c2) : c2_(std::move(c2)) {
  if (c2_.extent() != Extent::Domain) throw std::invalid_argument("speed must live on the domain grid");
  for (double v : c2_.values())
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("c^2 must be positive and finite");
}

SpeedModel SpeedModel::constant(GridPtr grid, double c2) {
  ScalarField f(grid);
  for (double& v : f.values()) v = c2;
  return SpeedModel(std::move(f));
}

double SpeedModel::c_max() const {
  double m = 1.0;
  for (double v : c2_.values()) m = std::max(m, v);
  return std::sqrt(m);
}

double SpeedModel::c_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : c2_.values()) m = std::min(m, v);
  return std::sqrt(m);
}

std::vector<double> SpeedModel::padded_c2() const {
  const auto& g = *grid();
  std::vector<double> out(g.padded_size(), 1.0);
  const int n = g.n(), pad = g.pad(), M = g.padded_side();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out[std::size_t(j + pad) * M + i + pad] = c2_(i, j);
  return out;
}

double SpeedModel::exit_time_bound() const { return std::sqrt(2.0) / c_min(); }

}  // namespace mwave
