#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "denserew/harness/config.hpp"

namespace denserew::cli {

/// Maps command-line flags onto config keys so a flag given on the command
/// line overrides the same key from the config file.
class Settings {
 public:
  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help);
  void bind_switch(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help);
  /// A key accepted in config files without a flag of its own on `app`.
  void allow(const std::string& key) { keys_.insert(key); }

  /// Loads `path` (if non-empty), rejects unknown keys, then applies the
  /// flags that were given.
  harness::Config resolve(const std::string& path) const;
  bool given(const std::string& key) const;

 private:
  std::map<std::string, std::string> text_;
  std::map<std::string, bool> switches_;
  std::vector<std::pair<CLI::Option*, std::string>> options_;
  std::set<std::string> keys_;
};

struct RunContext {
  std::filesystem::path out;
  std::size_t jobs = 1;
  bool svg = false;
};

/// Adds --config, --out, --jobs and --svg to a subcommand.
void bind_common(CLI::App* app, Settings& settings, std::string& config_path);

/// Output directory: --out, else $DENSEREW_OUT, else run.out, else "denserew_out".
RunContext run_context(const harness::Config& cfg, const Settings& settings);

/// Writes `path` through `body`; IoError if it cannot be written.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

/// Runs fn(0..n-1) on up to `jobs` threads and rethrows the first failure.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

using Runner = std::function<void(const RunContext&)>;

/// A subcommand validates everything in `prepare` and returns the work to run.
struct Command {
  CLI::App* app = nullptr;
  std::function<Runner(const harness::Config&)> prepare;
};

Command g4rl_run_command(CLI::App& root, Settings& settings, std::string& config_path);
Command scar_credit_command(CLI::App& root, Settings& settings, std::string& config_path);
Command scar_invariance_command(CLI::App& root, Settings& settings, std::string& config_path);
Command transfer_run_command(CLI::App& root, Settings& settings, std::string& config_path);
Command calibrate_command(CLI::App& root, Settings& settings, std::string& config_path);

}  // namespace denserew::cli
