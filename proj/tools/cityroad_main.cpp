#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "cityroad/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"City-road lattice invasion: spreading speeds, simulations and checks"};
  std::string command, config_path;
  std::vector<std::string> overrides;
  bool parallel = false;
  app.add_option("command", command, "speed | simulate | asymptotic | sweep | verify")
      ->required()
      ->check(CLI::IsMember(cityroad::kCommands));
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override one key, e.g. --set params.d=10")->take_all();
  app.add_flag("--parallel", parallel, "run sweep entries concurrently");
  app.footer(std::string("Environment: ") + cityroad::kOutputDirEnv + " overrides output.dir.");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = cityroad::load_config(config_path, overrides);
    cfg.parallel = parallel;
    return cityroad::run_command(command, cfg, std::cout);
  } catch (const cityroad::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
