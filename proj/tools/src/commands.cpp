#include "mwave_cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>

#include "mwave/forward.hpp"
#include "mwave/instability.hpp"
#include "mwave/io.hpp"
#include "mwave/linearize.hpp"
#include "mwave/operators.hpp"
#include "mwave/reconstruct.hpp"

namespace mwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

bool Check::pass() const {
  if (relation == "<") return value < threshold;
  if (relation == "<=") return value <= threshold;
  if (relation == ">") return value > threshold;
  if (relation == ">=") return value >= threshold;
  return false;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"forward", "reconstruct", "identities", "linearize", "sweep", "svd"};
  return names;
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Shared state of one command invocation.
struct Run {
  const ExperimentConfig& cfg;
  std::ostream& out;
  fs::path dir;
  std::vector<Check> checks;
  json outputs = json::array();
  json extra = json::object();
  std::string started = utc_now();

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (dir / name).string();
  }
  /// Stem for a raw + JSON pair.
  std::string stem(const std::string& name) {
    outputs.push_back(name + ".f64");
    outputs.push_back(name + ".json");
    return (dir / name).string();
  }
  void check(std::string name, double value, std::string rel, double threshold) {
    checks.push_back({std::move(name), value, std::move(rel), threshold});
    const auto& c = checks.back();
    out << (c.pass() ? "PASS " : "FAIL ") << c.name << ": " << io::format_double(c.value) << ' ' << c.relation << ' '
        << io::format_double(c.threshold) << '\n';
  }
  void info(const std::string& line) { out << "  " << line << '\n'; }

  void write_manifest(const std::string& command, const Setup* setup, const std::string& file = "manifest.json") {
    json m;
    m["command"] = command;
    m["config_hash"] = cfg.hash_hex();
    m["config"] = cfg.tree();
    m["seed"] = cfg.seed();
    if (setup) {
      m["grid"] = {{"n", setup->grid->n()}, {"h", setup->grid->h()}, {"pad", setup->grid->pad()}};
      m["time"] = {{"T", setup->tg.T}, {"nt", setup->tg.nt}, {"dt", setup->tg.dt}};
    }
    m["timestamps"] = {{"started", started}, {"finished", utc_now()}};
    m["outputs"] = outputs;
    json cs = json::array();
    for (const auto& c : checks)
      cs.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold},
                    {"pass", c.pass()}});
    m["checks"] = cs;
    if (!extra.empty()) m["results"] = extra;
    io::write_text((dir / file).string(), m.dump(2) + "\n");
  }

  int exit_code() const {
    for (const auto& c : checks)
      if (!c.pass()) return kAssertionFailed;
    return kPass;
  }
};

int cmd_forward(Run& run) {
  const Setup s = make_setup(run.cfg, false);
  const CauchyPair data = make_source(run.cfg, s.grid);
  const BoundaryTrace tr = lambda(data, s.speed, s.tg, run.cfg.threads());
  io::write_field(run.stem("f1"), data.f1, "f1");
  io::write_field(run.stem("f2"), data.f2, "f2");
  io::write_trace(run.stem("trace"), tr);
  run.info("n=" + std::to_string(s.grid->n()) + " nt=" + std::to_string(s.tg.nt) +
           " trace_l2=" + io::format_double(trace_l2_norm(tr)));
  run.extra["trace_l2"] = trace_l2_norm(tr);
  run.write_manifest("forward", &s);
  return run.exit_code();
}

int cmd_reconstruct(Run& run) {
  const Setup s = make_setup(run.cfg, true);
  const int max_iter = run.cfg.get<int>("reconstruct.max_iter");
  const double tol = run.cfg.get<double>("reconstruct.tol");
  const bool from_file = run.cfg.has("reconstruct.trace");
  CauchyPair truth;
  BoundaryTrace h;
  if (from_file) {
    h = io::read_trace(run.cfg.get<std::string>("reconstruct.trace"));
    if (!(*h.grid() == *s.grid) || !(h.time_grid() == s.tg)) throw ConfigError("trace file does not match grid/time");
    h = [&] {  // rebind to this run's grid object
      BoundaryTrace t(s.grid, s.tg);
      std::copy(h.values().begin(), h.values().end(), t.values().begin());
      return t;
    }();
  } else {
    truth = make_source(run.cfg, s.grid);
    h = lambda(truth, s.speed, s.tg, run.cfg.threads());
  }
  const NeumannResult r =
      neumann_reconstruct(h, s.speed, s.tg, max_iter, tol, from_file ? nullptr : &truth, run.cfg.threads());
  io::write_field(run.stem("f1"), r.f.f1, "reconstructed_f1");
  io::write_field(run.stem("f2"), r.f.f2, "reconstructed_f2");
  io::write_neumann_csv(run.path("neumann.csv"), r.report);
  run.info("iterations=" + std::to_string(r.report.iterations) + " rho_hat=" + io::format_double(r.report.rho_hat) +
           (r.report.converged ? " converged" : " max_iter reached"));
  run.extra = {{"iterations", r.report.iterations}, {"rho_hat", r.report.rho_hat}, {"converged", r.report.converged}};
  if (!from_file) {
    const double err = r.report.errors.back();
    run.extra["relative_error"] = err;
    run.check("reconstruction error", err, "<", 0.05);
  }
  if (r.report.increment_norms.size() >= 2 && r.report.increment_norms.front() > 0)
    run.check("rho_hat", r.report.rho_hat, "<", 1.0);
  run.write_manifest("reconstruct", &s);
  return run.exit_code();
}

int cmd_identities(Run& run) {
  const Setup s = make_setup(run.cfg, true);
  const CauchyPair f = make_source(run.cfg, s.grid);
  const auto reps = check_prop12(f.f1, s.speed, s.tg, run.cfg.get<std::string>("source.type"), run.cfg.threads());
  const LeftInverseReport left = left_inverse_identities(f.f1, f.f2, s.speed, s.tg, run.cfg.get<int>("reconstruct.max_iter"),
                                                         run.cfg.get<double>("reconstruct.tol"), run.cfg.threads());
  io::write_identities_json(run.path("identities.json"), reps, &left);
  for (const auto& r : reps) run.check(to_string(r.identity_id) + " relative residual", r.relative_residual, "<", 5e-2);
  run.check("B1 L1 - Id", left.b1_l1, "<", 7e-2);
  run.check("B2 L1", left.b2_l1, "<", 7e-2);
  run.check("B1 L2", left.b1_l2, "<", 7e-2);
  run.check("B2 L2 - Id", left.b2_l2, "<", 7e-2);
  run.write_manifest("identities", &s);
  return run.exit_code();
}

/// Mixed perturbation: smooth delta_f bump plus c^2 h_lambda on K.
Perturbation mixed_perturbation(const ExperimentConfig& cfg, const SpeedModel& speed, const DefaultBase& db) {
  SweepConfig sc;
  sc.cutoff = db.cutoff;
  const double lam = cfg.get<double>("perturbation.lambda");
  return {bump(speed.grid(), 0.5, 0.5, 0.3), 0.5 * (speed.c2() * oscillatory_h(sc, lam))};
}

int cmd_linearize(Run& run) {
  // Room for the perturbed speeds: |delta_c2| <= 0.5 c^2.
  double eps_max = 0;
  for (double e : run.cfg.get<std::vector<double>>("perturbation.eps")) eps_max = std::max(eps_max, std::abs(e));
  const Setup s = make_setup(run.cfg, false, std::sqrt(1 + 0.5 * eps_max));
  const DefaultBase db = default_base(s.grid);
  const Perturbation pert = mixed_perturbation(run.cfg, s.speed, db);
  const auto eps = run.cfg.get<std::vector<double>>("perturbation.eps");
  const TaylorReport tr = taylor_check(s.speed, db.source, db.K, pert, eps, s.tg.T, run.cfg.threads());
  for (std::size_t k = 0; k < tr.eps.size(); ++k)
    run.info("eps=" + io::format_double(tr.eps[k]) + " remainder=" + io::format_double(tr.remainders[k]));
  run.extra["taylor"] = {{"eps", tr.eps}, {"remainder", tr.remainders}, {"order", tr.order}};
  run.check("Taylor remainder order", tr.order, ">=", 1.8);

  const int N = run.cfg.get<int>("perturbation.N");
  const BasePoint base = BasePoint::unprepared(s.speed, db.source, db.K);
  SweepConfig sc;
  sc.cutoff = db.cutoff;
  const KernelPair kp = build_kernel_pair(base, oscillatory_h(sc, run.cfg.get<double>("perturbation.lambda")), N);
  io::write_kernel_pair((run.dir / "kernel_pair").string(), kp, "default_base");
  run.outputs.push_back("kernel_pair.json");
  run.outputs.push_back("kernel_pair_delta_f.f64");
  run.outputs.push_back("kernel_pair_delta_c2.f64");
  for (const auto& line : kp.log) run.info(line);
  run.check("kernel pair residual", kp.residual, "<", 1e-8);
  run.write_manifest("linearize", &s);
  return run.exit_code();
}

SweepKind parse_kind(const std::string& k) {
  if (k == "kernel" || k == "VN") return SweepKind::Kernel;
  if (k == "control_dc2" || k == "generic_dc2") return SweepKind::ControlC2;
  if (k == "generic_df") return SweepKind::GenericF;
  throw ConfigError("unknown sweep kind " + k);
}

SweepConfig sweep_config(const ExperimentConfig& cfg, const GridPtr& grid, const DefaultBase& db) {
  SweepConfig sc;
  sc.cutoff = db.cutoff;
  const json& lam = cfg.tree()["sweep"].value("lambdas", json());
  sc.lambdas = lam.is_array() ? lam.get<std::vector<double>>() : default_lambdas(grid->h(), cfg.get<int>("sweep.count"));
  const auto w = cfg.get<std::vector<double>>("sweep.omega");
  if (w.size() != 2 || std::hypot(w[0], w[1]) == 0) throw ConfigError("sweep.omega must be a nonzero 2-vector");
  const double nw = std::hypot(w[0], w[1]);
  sc.omega = {w[0] / nw, w[1] / nw};
  sc.s1 = cfg.get<double>("sweep.s1");
  sc.s2 = cfg.get<double>("sweep.s2");
  sc.s3 = cfg.get<double>("sweep.s3");
  return sc;
}

std::string grid_text(const Setup& s) {
  return "n=" + std::to_string(s.grid->n()) + " pad=" + std::to_string(s.grid->pad()) +
         " T=" + io::format_double(s.tg.T) + " nt=" + std::to_string(s.tg.nt);
}

int cmd_sweep(Run& run) {
  const Setup s = make_setup(run.cfg, false);
  const DefaultBase db = default_base(s.grid);
  const BasePoint base = BasePoint::prepare(s.speed, db.source, db.K, s.tg, run.cfg.threads());
  SweepConfig sc = sweep_config(run.cfg, s.grid, db);
  const auto Ns = run.cfg.get<std::vector<int>>("sweep.N");
  const auto kinds = run.cfg.get<std::vector<std::string>>("sweep.kinds");
  ReportBundle bundle;
  bundle.config_text = run.cfg.canonical();
  bundle.grid_text = grid_text(s);
  bundle.base_point = "default_base";
  std::map<int, double> kernel_slope;
  for (const auto& kname : kinds) {
    const SweepKind kind = parse_kind(kname);
    const std::vector<int> orders = kind == SweepKind::Kernel ? Ns : std::vector<int>{Ns.empty() ? 1 : Ns.front()};
    for (int N : orders) {
      sc.N = N;
      DecayReport rep = decay_sweep(base, sc, kind, run.cfg.threads());
      for (const auto& l : rep.log) run.info(l);
      const double slope = rep.output_slope.slope;
      if (kind == SweepKind::Kernel) {
        kernel_slope[N] = slope;
        run.check("kernel N=" + std::to_string(N) + " output slope", slope, "<=", -(2.0 * N + 1) + (sc.s2 - sc.s3));
      } else {
        run.check(to_string(kind) + " output slope", slope, ">=", -1.5);
      }
      bundle.decays.push_back(std::move(rep));
    }
  }
  for (auto it = kernel_slope.begin(); it != kernel_slope.end(); ++it) {
    const auto next = std::next(it);
    if (next != kernel_slope.end() && next->first == it->first + 1)
      run.check("kernel N=" + std::to_string(next->first) + " slope minus N=" + std::to_string(it->first) + " slope",
                next->second - it->second, "<=", -1.5);
  }
  json slopes = json::array();
  for (const auto& d : bundle.decays)
    slopes.push_back({{"kind", to_string(d.kind)}, {"N", d.N}, {"slope", d.output_slope.slope},
                      {"std_error", d.output_slope.std_error}});
  run.extra["slopes"] = slopes;
  // emit_report owns manifest.json here; the command summary goes alongside.
  run.write_manifest("sweep", &s, "command.json");
  emit_report(bundle, run.dir.string());
  return run.exit_code();
}

int cmd_svd(Run& run) {
  const Setup s = make_setup(run.cfg, false);
  const DefaultBase db = default_base(s.grid);
  const BasePoint base = BasePoint::prepare(s.speed, db.source, db.K, s.tg, run.cfg.threads());
  SweepConfig sc = sweep_config(run.cfg, s.grid, db);
  sc.N = run.cfg.get<int>("svd.N");
  const int m = run.cfg.get<int>("svd.m");
  const auto lambdas = default_lambdas(s.grid->h(), m);
  ReportBundle bundle;
  bundle.config_text = run.cfg.canonical();
  bundle.grid_text = grid_text(s);
  bundle.base_point = "default_base";
  for (const auto& id : run.cfg.get<std::vector<std::string>>("svd.subspaces")) {
    auto basis = oscillatory_basis(base, sc, parse_kind(id), lambdas);
    normalize_basis(basis);
    SpectrumReport rep = svd_decay(assemble_operator_matrix(base, basis, run.cfg.threads()), id);
    if (!rep.rank_note.empty()) run.info(id + ": " + rep.rank_note);
    if (id == "VN") {
      double worst = 0;
      for (std::size_t k = 12; k < rep.sigma_normalized.size(); ++k) worst = std::max(worst, rep.sigma_normalized[k]);
      run.check("VN max sigma_k/sigma_1 for k > 12", worst, "<", 1e-4);
    } else if (id == "generic_df") {
      double least = 1;
      for (std::size_t k = 0; k < rep.sigma_normalized.size() && k < 20; ++k)
        least = std::min(least, rep.sigma_normalized[k]);
      run.check("generic_df min sigma_k/sigma_1", least, ">", 1e-2);
    }
    bundle.spectra.push_back(std::move(rep));
  }
  run.write_manifest("svd", &s, "command.json");
  emit_report(bundle, run.dir.string());
  return run.exit_code();
}

}  // namespace

int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::function<int(Run&)>> table{
      {"forward", cmd_forward},     {"reconstruct", cmd_reconstruct}, {"identities", cmd_identities},
      {"linearize", cmd_linearize}, {"sweep", cmd_sweep},             {"svd", cmd_svd},
  };
  const auto it = table.find(name);
  if (it == table.end()) {
    err << "unknown command " << name << '\n';
    return kConfigError;
  }
  try {
    Run run{cfg, out, fs::path(cfg.output_dir()), {}, json::array(), json::object(), utc_now()};
    fs::create_directories(run.dir);
    return it->second(run);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace mwave::cli
