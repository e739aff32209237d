#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "mwave/instability.hpp"
#include "mwave/operators.hpp"
#include "support.hpp"

using namespace mwave;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  GridPtr g;
  DefaultBase db;
  BasePoint base;
};

Fixture fixture(int n, double T) {
  auto g = Grid::make(n, T, 1.0);
  auto sp = SpeedModel::constant(g);
  auto db = default_base(g);
  auto base = BasePoint::prepare(sp, db.source, db.K, TimeGrid::for_speed(T, g->h(), 1.0));
  return {g, db, std::move(base)};
}

}  // namespace

TEST_CASE("frequency grid") {
  const double h = 1.0 / 149;
  const auto l = default_lambdas(h);
  REQUIRE(l.size() == 8);
  CHECK(l.front() == doctest::Approx(4 * test::kPi));
  CHECK(l.back() == doctest::Approx(test::kPi / (3 * h)));
  for (std::size_t k = 2; k < l.size(); ++k) CHECK(l[k] / l[k - 1] == doctest::Approx(l[1] / l[0]));
}

TEST_CASE("oscillatory family") {
  auto g = Grid::with_padding(121, 4);
  SweepConfig cfg;
  CHECK_THROWS_AS(oscillatory_h(cfg, 10.0), std::invalid_argument);
  cfg.cutoff = ScalarField(g);
  CHECK(oscillatory_h(cfg, 30.0).is_zero());

  cfg.cutoff = bump(g, 0.5, 0.5, 0.2);
  const double lmax = max_resolved_lambda(g->h());
  CHECK_THROWS_WITH_AS(oscillatory_h(cfg, 1.01 * lmax), "unresolved frequency", std::invalid_argument);
  cfg.omega = {0.6, 0.8};
  const ScalarField h = oscillatory_h(cfg, lmax);
  CHECK(l2_norm(h) == doctest::Approx(l2_norm(cfg.cutoff) / std::sqrt(2.0)).epsilon(0.05));
  for (std::size_t q = 0; q < h.size(); ++q)
    if (cfg.cutoff[q] == 0.0) CHECK(h[q] == 0.0);

  cfg.s3 = 1.0;
  CHECK(l2_norm(oscillatory_h(cfg, 50.0)) == doctest::Approx(l2_norm(cfg.cutoff) / std::sqrt(2.0) / 50).epsilon(0.05));
}

TEST_CASE("log-log slope fit") {
  std::vector<double> x, y;
  for (int k = 0; k < 8; ++k) {
    x.push_back(10.0 * std::pow(1.5, k));
    y.push_back(3.0 * std::pow(x.back(), -2.5));
  }
  const SlopeFit fit = fit_loglog_upper(x, y);
  CHECK(fit.slope == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK(fit.std_error < 1e-10);
  CHECK(fit.points == 4);
  // Only the upper half is fitted.
  y[0] = 1e5;
  y[1] = 1e-9;
  CHECK(fit_loglog_upper(x, y).slope == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(fit_loglog_upper({1, 2, 3}, {1, 2, 3}), "insufficient sweep", std::invalid_argument);
}

TEST_CASE("decay sweep rows and parallel determinism") {
  auto fx = fixture(61, 1.0);
  SweepConfig cfg;
  cfg.cutoff = fx.db.cutoff;
  cfg.lambdas = default_lambdas(fx.g->h(), 6);
  const DecayReport one = decay_sweep(fx.base, cfg, SweepKind::Kernel, 1);
  const DecayReport four = decay_sweep(fx.base, cfg, SweepKind::Kernel, 4);
  REQUIRE(one.rows.size() == 6);
  for (std::size_t k = 0; k < one.rows.size(); ++k) {
    CHECK(one.rows[k].lambda == cfg.lambdas[k]);
    CHECK(one.rows[k].output_norm == four.rows[k].output_norm);
    CHECK(one.rows[k].ratio == doctest::Approx(one.rows[k].output_norm / one.rows[k].input_norm));
    if (k) CHECK(one.rows[k].lambda > one.rows[k - 1].lambda);
  }
  CHECK(one.output_slope.points == 4);
  CHECK(std::isfinite(holder_slope(one, 0.5).slope));

  cfg.lambdas.resize(3);
  CHECK_THROWS_WITH_AS(decay_sweep(fx.base, cfg), "insufficient sweep", std::invalid_argument);
}

TEST_CASE("sweep perturbation kinds") {
  auto fx = fixture(41, 0.5);
  SweepConfig cfg;
  cfg.cutoff = fx.db.cutoff;
  const ScalarField h = oscillatory_h(cfg, 20.0);
  const auto k = sweep_perturbation(fx.base, h, SweepKind::Kernel, 1);
  CHECK(test::max_diff(k.delta_f, -1.0 * apply_QN(fx.base, h, 1)) == 0.0);
  const auto c = sweep_perturbation(fx.base, h, SweepKind::ControlC2, 1);
  CHECK(c.delta_f.is_zero());
  CHECK(test::max_diff(c.delta_c2, h) == 0.0);
  const auto f = sweep_perturbation(fx.base, h, SweepKind::GenericF, 1);
  CHECK(test::max_diff(f.delta_f, h) == 0.0);
  CHECK(f.delta_c2.is_zero());
  CHECK(to_string(SweepKind::ControlC2) == "control_dc2");
}

TEST_CASE("operator matrix assembly") {
  auto fx = fixture(41, 0.8);
  SweepConfig cfg;
  cfg.cutoff = fx.db.cutoff;
  auto basis = oscillatory_basis(fx.base, cfg, SweepKind::Kernel, {15.0, 25.0});
  const ScalarField z(fx.g);
  basis.push_back({z, z});
  basis.push_back({basis[0].delta_f + basis[1].delta_f, basis[0].delta_c2 + basis[1].delta_c2});
  const Eigen::MatrixXd A = assemble_operator_matrix(fx.base, basis, 3);
  REQUIRE(A.cols() == 4);
  CHECK(A.col(2).norm() == 0.0);
  CHECK((A.col(3) - A.col(0) - A.col(1)).norm() < 1e-12 * A.col(3).norm());
  // Column norms are trace L2 norms.
  CHECK(A.col(0).norm() == doctest::Approx(trace_l2_norm(delta_lambda1(fx.base, basis[0]))).epsilon(1e-12));

  normalize_basis(basis);
  CHECK(l2_norm(basis[0].delta_f) + l2_norm(basis[0].delta_c2) == doctest::Approx(1.0));
  CHECK(basis[2].delta_f.is_zero());
}

TEST_CASE("singular values") {
  const SpectrumReport z = svd_decay(Eigen::MatrixXd::Zero(30, 5), "VN");
  REQUIRE(z.sigma.size() == 5);
  for (double s : z.sigma) CHECK(s == 0.0);
  CHECK_FALSE(z.rank_note.empty());

  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  Eigen::MatrixXd A(200, 12);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = N(rng) * std::pow(0.3, double(i / 200));
  const SpectrumReport r = svd_decay(A, "generic_df");
  Eigen::JacobiSVD<Eigen::MatrixXd> ref(A);
  for (int k = 0; k < 12; ++k) {
    CHECK(r.sigma[std::size_t(k)] == doctest::Approx(ref.singularValues()(k)).epsilon(1e-12));
    CHECK(r.sigma_normalized[std::size_t(k)] == doctest::Approx(r.sigma[std::size_t(k)] / r.sigma[0]));
    if (k) CHECK(r.sigma[std::size_t(k)] <= r.sigma[std::size_t(k - 1)]);
  }
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd P(200, 12);
  for (int k = 0; k < 12; ++k) P.col(k) = A.col(perm[std::size_t(k)]);
  const SpectrumReport rp = svd_decay(P, "generic_df");
  for (int k = 0; k < 12; ++k)
    CHECK(std::abs(rp.sigma[std::size_t(k)] - r.sigma[std::size_t(k)]) < 1e-12 * r.sigma[0]);
}

TEST_CASE("report emission") {
  ReportBundle empty;
  empty.config_text = "{}";
  const fs::path d0 = test::scratch_dir("report_empty");
  emit_report(empty, d0.string());
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(d0)) files.push_back(e.path().filename().string());
  CHECK(files == std::vector<std::string>{"manifest.json"});

  DecayReport d;
  d.N = 1;
  for (int k = 0; k < 5; ++k) d.rows.push_back({10.0 + k, 1.0, 1.0 / (k + 1), 1.0 / (k + 1), 1.0});
  SpectrumReport s = svd_decay(Eigen::MatrixXd::Identity(4, 3), "VN");
  ReportBundle b{{d}, {s}, R"({"seed":1})", "n=41", "default"};
  const fs::path d1 = test::scratch_dir("report_a"), d2 = test::scratch_dir("report_b");
  emit_report(b, d1.string());
  emit_report(b, d2.string());
  for (const char* name : {"decay_0.csv", "spectrum_0.csv"}) {
    const std::string a = test::read_bytes(d1 / name);
    CHECK_FALSE(a.empty());
    CHECK(a == test::read_bytes(d2 / name));
  }
  CHECK(test::read_bytes(d1 / "decay_0.csv").rfind("lambda,input_norm,output_norm,ratio\n", 0) == 0);
  CHECK(test::read_bytes(d1 / "spectrum_0.csv").rfind("k,sigma,sigma_normalized,subspace_id\n", 0) == 0);

  auto hash_of = [](const fs::path& dir) {
    return nlohmann::json::parse(test::read_bytes(dir / "manifest.json")).at("config_hash").get<std::string>();
  };
  CHECK(hash_of(d1) == hash_of(d2));
  b.config_text = R"({"seed":2})";
  emit_report(b, d2.string());
  CHECK(hash_of(d1) != hash_of(d2));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
