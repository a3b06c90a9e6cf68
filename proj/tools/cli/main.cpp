// denserew: command-line runner for the shaping, credit and transfer experiments.
//
// Exit codes: 0 success, 2 bad usage or invalid parameters, 1 runtime failure.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "denserew/error.hpp"
#include "settings.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace denserew;
  CLI::App app{"Dense reward experiments: graph-shaped hierarchical RL, Shapley credit, spectral transfer",
               "denserew"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  cli::Settings settings;
  std::string config_path;
  const std::vector<cli::Command> commands{
      cli::g4rl_run_command(app, settings, config_path),
      cli::scar_credit_command(app, settings, config_path),
      cli::scar_invariance_command(app, settings, config_path),
      cli::transfer_run_command(app, settings, config_path),
      cli::calibrate_command(app, settings, config_path),
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "denserew: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const cli::Command* chosen = nullptr;
  for (const auto& c : commands)
    if (c.app->parsed()) chosen = &c;

  cli::Runner run;
  cli::RunContext ctx;
  try {
    const auto cfg = settings.resolve(config_path);
    ctx = cli::run_context(cfg, settings);
    run = chosen->prepare(cfg);
  } catch (const Error& e) {
    std::cerr << "denserew " << chosen->app->get_name() << ": " << e.what() << '\n';
    return e.code() == Errc::IoError ? kExitRuntime : kExitUsage;
  }

  try {
    run(ctx);
  } catch (const std::exception& e) {
    std::cerr << "denserew " << chosen->app->get_name() << ": " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
