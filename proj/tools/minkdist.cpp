#include "minkdist/app/commands.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <iostream>

int main(int argc, char** argv) {
  using namespace minkdist::app;
  CLI::App app{"Minkowski distance fields, cut loci, ray quadrature and transport densities"};
  app.set_help_flag("-h,--help");
  std::string command;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "field | cutlocus | curvature | integrate | transport | render")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("--config", config, "run configuration (JSON)")->required();
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--seed", seed, "seed for Monte-Carlo estimates (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg = load_config(config);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output = out;
    run_command(command, cfg, cfg.output, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "minkdist: " << e.what() << "\n";
    return 2;
  } catch (const minkdist::Error& e) {
    std::cerr << "minkdist: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "minkdist: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
