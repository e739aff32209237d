#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwave/grid.hpp"
#include "mwave/linearize.hpp"
#include "mwave/wave.hpp"

namespace mwave::cli {

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment description: a JSON key tree with defaults filled in.
///
/// Keys: grid.{n, pad}, time.{T, cfl}, speed.{type, ...}, source.{type, ...},
/// perturbation.{...}, sweep.{...}, svd.{...}, reconstruct.{...}, seed, threads,
/// output_dir, allow_short_time.
class ExperimentConfig {
 public:
  static ExperimentConfig defaults();
  /// Defaults overlaid with the file contents.
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json(const nlohmann::json& j);

  /// Sets a dotted key ("time.T") from text; the text is parsed as JSON when possible.
  void set(const std::string& dotted_key, const std::string& value);

  const nlohmann::json& tree() const { return tree_; }
  /// Compact, key-sorted serialization (the hashed form).
  std::string canonical() const { return tree_.dump(); }
  std::uint64_t hash() const;
  std::string hash_hex() const;

  template <class T>
  T get(const std::string& dotted_key) const {
    try {
      return node(dotted_key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for '" + dotted_key + "': " + e.what());
    }
  }
  bool has(const std::string& dotted_key) const;

  int n() const { return get<int>("grid.n"); }
  double T() const { return get<double>("time.T"); }
  double cfl() const { return get<double>("time.cfl"); }
  std::uint64_t seed() const { return get<std::uint64_t>("seed"); }
  int threads() const { return get<int>("threads"); }
  std::string output_dir() const { return get<std::string>("output_dir"); }
  bool allow_short_time() const { return get<bool>("allow_short_time"); }

 private:
  const nlohmann::json& node(const std::string& dotted_key) const;
  void validate() const;
  nlohmann::json tree_;
};

/// Grid, speed and time grid assembled from a config.
struct Setup {
  GridPtr grid;
  SpeedModel speed;
  TimeGrid tg;
};

/// Builds the discretization; enforces T > T(Omega) when `reconstruction` is set
/// unless allow_short_time. Padding allows for speeds up to `c_scale` times the
/// configured maximum.
Setup make_setup(const ExperimentConfig& cfg, bool reconstruction, double c_scale = 1.0);

/// Cauchy data described by the `source` key.
CauchyPair make_source(const ExperimentConfig& cfg, const GridPtr& grid);

}  // namespace mwave::cli
