#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "mwave/grid.hpp"
#include "mwave/wave.hpp"

namespace mwave::test {

inline constexpr double kPi = 3.14159265358979323846;

/// exp(-r^2/s^2) about (x0, y0), cut to zero within `margin` of the boundary.
inline ScalarField gaussian(const GridPtr& g, double x0, double y0, double s, double margin = 0.0) {
  return ScalarField::from_function(g, [&](double x, double y) {
    if (x < margin || x > 1 - margin || y < margin || y > 1 - margin) return 0.0;
    const double r2 = (x - x0) * (x - x0) + (y - y0) * (y - y0);
    return std::exp(-r2 / (s * s));
  });
}

/// C-infinity bump of radius R about (x0, y0).
inline ScalarField smooth_bump(const GridPtr& g, double x0, double y0, double R) {
  return ScalarField::from_function(g, [&](double x, double y) {
    const double r2 = ((x - x0) * (x - x0) + (y - y0) * (y - y0)) / (R * R);
    return r2 < 1 ? std::exp(1 - 1 / (1 - r2)) : 0.0;
  });
}

/// Random field with uniform entries on the interior nodes.
inline ScalarField noise(const GridPtr& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  ScalarField f(g);
  const int n = g->n();
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i) f(i, j) = U(rng);
  return f;
}

inline double max_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

inline double rel_diff(const BoundaryTrace& a, const BoundaryTrace& b) {
  const double s = trace_l2_norm(b);
  return trace_l2_norm(a - b) / (s > 0 ? s : 1.0);
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mwave_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace mwave::test
