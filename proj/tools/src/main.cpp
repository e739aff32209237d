#include <iostream>

#include "CLI11.hpp"
#include "mwave_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace mwave::cli;
  CLI::App app{"Multiwave tomography experiments: forward traces, time-reversal reconstruction, "
               "linearization and instability studies."};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool allow_short = false;
  std::vector<std::string> overrides;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--output", output_dir, "Output directory");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--threads", threads, "Thread budget")->check(CLI::PositiveNumber);
    sub->add_flag("--allow-short-time", allow_short, "Permit T <= T(Omega) for reconstruction commands");
    sub->add_option("--set", overrides, "Override a config key: key.path=value");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig::defaults() : ExperimentConfig::from_file(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + o);
      cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (!output_dir.empty()) cfg.set("output_dir", nlohmann::json(output_dir).dump());
    if (app.get_subcommands().front()->count("--seed")) cfg.set("seed", std::to_string(seed));
    if (threads > 0) cfg.set("threads", std::to_string(threads));
    if (allow_short) cfg.set("allow_short_time", "true");
    return run_command(command, cfg, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}
