#include "mwave_cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mwave/instability.hpp"
#include "mwave/io.hpp"
#include "mwave/reconstruct.hpp"

namespace mwave::cli {

using nlohmann::json;

namespace {

void merge(json& dst, const json& src) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    if (it->is_object() && dst.contains(it.key()) && dst[it.key()].is_object())
      merge(dst[it.key()], *it);
    else
      dst[it.key()] = *it;
  }
}

std::vector<std::string> split(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.empty()) throw ConfigError("empty config key");
  return parts;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.tree_ = {
      {"grid", {{"n", 150}, {"pad", "auto"}}},
      {"time", {{"T", 3.0}, {"cfl", 0.4}}},
      {"speed", {{"type", "constant"}, {"c2", 1.0}}},
      {"source", {{"type", "random_pair"}}},
      {"perturbation", {{"lambda", 40.0}, {"N", 1}, {"eps", {1e-1, 3e-2, 1e-2}}}},
      {"sweep",
       {{"count", 8}, {"omega", {1.0, 0.0}}, {"s1", 0.0}, {"s2", 0.0}, {"s3", 0.0}, {"N", {1, 2}},
        {"kinds", {"kernel", "control_dc2"}}}},
      {"svd", {{"m", 20}, {"N", 2}, {"subspaces", {"VN", "generic_df"}}}},
      {"reconstruct", {{"max_iter", 15}, {"tol", 1e-6}}},
      {"seed", 1},
      {"threads", 1},
      {"output_dir", "out"},
      {"allow_short_time", false},
  };
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c = defaults();
  merge(c.tree_, j);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

void ExperimentConfig::set(const std::string& dotted_key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  json* cur = &tree_;
  const auto parts = split(dotted_key);
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    if (!cur->contains(parts[k]) || !(*cur)[parts[k]].is_object()) (*cur)[parts[k]] = json::object();
    cur = &(*cur)[parts[k]];
  }
  (*cur)[parts.back()] = v;
  validate();
}

const json& ExperimentConfig::node(const std::string& dotted_key) const {
  const json* cur = &tree_;
  for (const auto& p : split(dotted_key)) {
    if (!cur->is_object() || !cur->contains(p)) throw ConfigError("missing config key '" + dotted_key + "'");
    cur = &(*cur)[p];
  }
  return *cur;
}

bool ExperimentConfig::has(const std::string& dotted_key) const {
  const json* cur = &tree_;
  for (const auto& p : split(dotted_key)) {
    if (!cur->is_object() || !cur->contains(p)) return false;
    cur = &(*cur)[p];
  }
  return true;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void ExperimentConfig::validate() const {
  if (n() < 8) throw ConfigError("grid.n must be >= 8");
  if (!(T() > 0)) throw ConfigError("time.T must be positive");
  if (!(cfl() > 0) || cfl() > kCfl) throw ConfigError("time.cfl must be in (0, 0.4]");
  if (threads() < 1) throw ConfigError("threads must be >= 1");
  const json& pad = node("grid.pad");
  if (!(pad.is_string() && pad.get<std::string>() == "auto") && !pad.is_number_integer())
    throw ConfigError("grid.pad must be \"auto\" or an integer");
  const auto st = get<std::string>("speed.type");
  if (st != "constant" && st != "radial_bump" && st != "file") throw ConfigError("unknown speed.type " + st);
  const auto so = get<std::string>("source.type");
  if (so != "random_pair" && so != "bumps" && so != "default_base" && so != "zero" && so != "file")
    throw ConfigError("unknown source.type " + so);
}

namespace {

SpeedModel make_speed(const ExperimentConfig& cfg, const GridPtr& grid, const ScalarField* file_c2) {
  const auto type = cfg.get<std::string>("speed.type");
  if (type == "constant") return SpeedModel::constant(grid, cfg.get<double>("speed.c2"));
  if (type == "radial_bump") {
    const double a = cfg.get<double>("speed.amplitude");
    const auto c = cfg.get<std::vector<double>>("speed.center");
    const double r = cfg.get<double>("speed.radius");
    if (c.size() != 2) throw ConfigError("speed.center must have two entries");
    const ScalarField b = bump(grid, c[0], c[1], r);
    ScalarField c2(grid);
    for (std::size_t q = 0; q < c2.size(); ++q) c2[q] = (1 + a * b[q]) * (1 + a * b[q]);
    return SpeedModel(std::move(c2));
  }
  if (file_c2->grid()->n() != grid->n()) throw ConfigError("speed file grid does not match grid.n");
  return SpeedModel(ScalarField(grid, Extent::Domain, std::vector<double>(file_c2->values().begin(),
                                                                          file_c2->values().end())));
}

}  // namespace

Setup make_setup(const ExperimentConfig& cfg, bool reconstruction, double c_scale) {
  const int n = cfg.n();
  const double T = cfg.T();
  double c_max = 1.0;
  ScalarField file_c2;
  const auto type = cfg.get<std::string>("speed.type");
  try {
    if (type == "constant") {
      const double c2 = cfg.get<double>("speed.c2");
      if (!(c2 > 0)) throw ConfigError("speed.c2 must be positive");
      c_max = std::max(1.0, std::sqrt(c2));
    } else if (type == "radial_bump") {
      const double a = cfg.get<double>("speed.amplitude");
      if (!(a > -1)) throw ConfigError("speed.amplitude must exceed -1");
      c_max = 1.0 + std::max(0.0, a);
    } else {
      file_c2 = io::read_field(cfg.get<std::string>("speed.path"));
      for (double v : file_c2.values()) c_max = std::max(c_max, std::sqrt(v));
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(e.what());
  }
  c_max *= c_scale;
  const auto& pad = cfg.tree()["grid"]["pad"];
  GridPtr grid = pad.is_string() ? Grid::make(n, T, c_max) : Grid::with_padding(n, pad.get<int>());
  if (!grid->satisfies_padding(c_max, T)) throw ConfigError("grid.pad too small for T");
  SpeedModel speed = [&] {
    try {
      return make_speed(cfg, grid, &file_c2);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const TimeGrid tg = TimeGrid::for_speed(T, grid->h(), speed.c_max(), cfg.cfl());
  if (reconstruction && !cfg.allow_short_time() && !(T > speed.exit_time_bound()))
    throw ConfigError("T must exceed T(Omega) = " + std::to_string(speed.exit_time_bound()) +
                      " (use --allow-short-time to override)");
  return {grid, std::move(speed), tg};
}

CauchyPair make_source(const ExperimentConfig& cfg, const GridPtr& grid) {
  const auto type = cfg.get<std::string>("source.type");
  if (type == "zero") return CauchyPair::zero(grid);
  if (type == "random_pair") return random_smooth_pair(grid, cfg.seed());
  if (type == "default_base") return {default_base(grid).source, ScalarField(grid)};
  if (type == "file") {
    try {
      ScalarField f1 = io::read_field(cfg.get<std::string>("source.f1"));
      ScalarField f2 = cfg.has("source.f2") ? io::read_field(cfg.get<std::string>("source.f2")) : ScalarField(f1.grid());
      if (f1.grid()->n() != grid->n() || f2.grid()->n() != grid->n())
        throw ConfigError("source file grid does not match grid.n");
      auto rebind = [&](const ScalarField& f) {
        return ScalarField(grid, Extent::Domain, std::vector<double>(f.values().begin(), f.values().end()));
      };
      return {rebind(f1), rebind(f2)};
    } catch (const std::runtime_error& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      throw ConfigError(e.what());
    }
  }
  // bumps: lists of {x, y, w, a} for f1 and f2, C-infinity bumps of radius w.
  auto make = [&](const char* key) {
    ScalarField f(grid);
    if (!cfg.has(std::string("source.") + key)) return f;
    for (const auto& b : cfg.tree()["source"][key]) {
      const double x = b.at("x").get<double>(), y = b.at("y").get<double>();
      const double w = b.at("w").get<double>(), a = b.at("a").get<double>();
      if (x - w <= 0 || x + w >= 1 || y - w <= 0 || y + w >= 1)
        throw ConfigError("source bump must lie inside the domain");
      f += a * bump(grid, x, y, w);
    }
    return f;
  };
  try {
    return {make("f1"), make("f2")};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad source.bumps entry: ") + e.what());
  }
}

}  // namespace mwave::cli
