#include "settings.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "denserew/error.hpp"

namespace denserew::cli {

void Settings::bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
  options_.emplace_back(app->add_option(flag, text_[key], help), key);
  keys_.insert(key);
}

void Settings::bind_switch(CLI::App* app, const std::string& flag, const std::string& key,
                           const std::string& help) {
  options_.emplace_back(app->add_flag(flag, switches_[key], help), key);
  keys_.insert(key);
}

harness::Config Settings::resolve(const std::string& path) const {
  harness::Config cfg = path.empty() ? harness::Config{} : harness::Config::load_file(path);
  cfg.require_known(keys_);
  for (const auto& [opt, key] : options_) {
    if (opt->count() == 0) continue;
    if (const auto it = switches_.find(key); it != switches_.end())
      cfg.set(key, it->second ? "true" : "false");
    else
      cfg.set(key, text_.at(key));
  }
  return cfg;
}

bool Settings::given(const std::string& key) const {
  return std::any_of(options_.begin(), options_.end(),
                     [&](const auto& o) { return o.second == key && o.first->count() > 0; });
}

void bind_common(CLI::App* app, Settings& settings, std::string& config_path) {
  app->add_option("--config", config_path, "Config file of key = value lines");
  settings.bind(app, "--out", "run.out", "Output directory (overrides $DENSEREW_OUT)");
  settings.bind(app, "--jobs", "run.jobs", "Worker threads; 0 uses every core");
  settings.bind_switch(app, "--svg", "run.svg", "Also write SVG learning-curve plots");
}

RunContext run_context(const harness::Config& cfg, const Settings& settings) {
  RunContext ctx;
  const char* env = std::getenv("DENSEREW_OUT");
  if (!settings.given("run.out") && env != nullptr && *env != '\0')
    ctx.out = env;
  else
    ctx.out = cfg.get_string("run.out", "denserew_out");
  if (ctx.out.empty()) throw Error(Errc::InvalidArgument, "output directory is empty");
  const auto jobs = cfg.get_uint("run.jobs", 0);
  ctx.jobs = jobs > 0 ? jobs : std::max(1u, std::thread::hardware_concurrency());
  ctx.svg = cfg.get_bool("run.svg", false);
  return ctx;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
  std::cout << "wrote " << path.string() << '\n';
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace denserew::cli
