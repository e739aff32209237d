#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mwave/grid.hpp"
#include "mwave/linearize.hpp"
#include "mwave/wave.hpp"

namespace mwave {

/// Oscillatory family h_lambda = lambda^{-s3} cos(lambda omega.x) phi(x) and the
/// norms used to measure it.
struct SweepConfig {
  std::vector<double> lambdas;
  std::array<double, 2> omega{1.0, 0.0};
  double s1 = 0, s2 = 0, s3 = 0;
  int N = 1;
  ScalarField cutoff;
};

/// Which perturbation a sweep point uses.
enum class SweepKind {
  Kernel,     // (-Q_N h, c^2 h)
  ControlC2,  // (0, c^2 h)
  GenericF,   // (h, 0)
};
std::string to_string(SweepKind kind);

/// `count` log-spaced frequencies in [4 pi, pi/(3h)].
std::vector<double> default_lambdas(double h, int count = 8);

/// Largest resolved frequency: six nodes per period.
inline double max_resolved_lambda(double h) { return 3.14159265358979323846 / (3.0 * h); }

/// Throws std::invalid_argument("unresolved frequency") when lambda > pi/(3h).
ScalarField oscillatory_h(const SweepConfig& cfg, double lambda);

/// C-infinity radial bump exp(1 - 1/(1 - r^2/R^2)) centred at (x0, y0).
ScalarField bump(const GridPtr& grid, double x0, double y0, double radius);

struct DecayRow {
  double lambda = 0;
  double input_norm = 0;       // ||delta_f||_{H^s1} + ||delta_c2||_{H^s1}
  double output_norm = 0;      // ||delta Lambda_1||_{H^s2} on [0,T] x boundary
  double ratio = 0;
  double constraint_norm = 0;  // ||delta_f||_{H^s3} + ||delta_c2||_{H^s3}
};

struct SlopeFit {
  double slope = 0;
  double std_error = 0;
  int points = 0;
  double lower() const { return slope - 2 * std_error; }
  double upper() const { return slope + 2 * std_error; }
};

/// Least-squares slope of log(y) against log(x) over the upper half of x
/// (at least 4 points). Throws std::invalid_argument("insufficient sweep").
SlopeFit fit_loglog_upper(const std::vector<double>& x, const std::vector<double>& y);

struct DecayReport {
  SweepKind kind = SweepKind::Kernel;
  int N = 0;
  std::vector<DecayRow> rows;
  SlopeFit output_slope;  // log output_norm vs log lambda
  SlopeFit ratio_slope;   // log ratio vs log lambda
  std::vector<std::string> log;
};

/// Perturbation of the given kind generated by h.
Perturbation sweep_perturbation(const BasePoint& base, const ScalarField& h, SweepKind kind, int N,
                                std::vector<std::string>* log = nullptr);

/// One delta_lambda1 solve per frequency; points are distributed over `threads` workers.
DecayReport decay_sweep(const BasePoint& base, const SweepConfig& cfg, SweepKind kind = SweepKind::Kernel,
                        int threads = 1);

/// Slope of log(output^mu) - log(input) against log lambda, on the same upper half.
SlopeFit holder_slope(const DecayReport& report, double mu);

/// Default linearization point on `grid`: source exp(-r^2/a^2 - r^4/b^4) centred in
/// the square (Lap f < 0 on the cutoff support), K = [0.3, 0.7]^2, bump cutoff of radius 0.18.
struct DefaultBase {
  ScalarField source;
  SupportBox K;
  ScalarField cutoff;
};
DefaultBase default_base(const GridPtr& grid);

/// Column j: flattened delta_lambda1(basis[j]) weighted so that its Euclidean norm
/// is the trace L^2 norm. Columns are computed on `threads` workers.
Eigen::MatrixXd assemble_operator_matrix(const BasePoint& base, const std::vector<Perturbation>& basis,
                                         int threads = 1);

/// Scales each element to unit ||delta_c2||_{L^2} + ||delta_f||_{L^2}; zero stays zero.
void normalize_basis(std::vector<Perturbation>& basis);

struct SpectrumReport {
  std::string subspace_id;  // VN, generic_df, generic_dc2
  int m = 0;
  std::vector<double> sigma;  // descending
  std::vector<double> sigma_normalized;
  std::string rank_note;
};

/// Singular values of `matrix` (thin QR, then Jacobi SVD of R).
SpectrumReport svd_decay(const Eigen::MatrixXd& matrix, const std::string& subspace_id);

/// Basis generated by h_lambda for `lambdas`, rotating the direction omega by the
/// golden angle between consecutive elements.
std::vector<Perturbation> oscillatory_basis(const BasePoint& base, const SweepConfig& cfg, SweepKind kind,
                                            const std::vector<double>& lambdas);

/// Files written by emit_report.
struct ReportBundle {
  std::vector<DecayReport> decays;
  std::vector<SpectrumReport> spectra;
  std::string config_text;  // canonical config, hashed into the manifest
  std::string grid_text;
  std::string base_point;
};

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(const std::string& text);

/// Writes decay_<k>.csv and spectrum_<k>.csv plus manifest.json into `dir`.
void emit_report(const ReportBundle& bundle, const std::string& dir);

}  // namespace mwave
