#include <iostream>
#include <memory>
#include <string>

#include "denserew/harness/svg_plot.hpp"
#include "plans.hpp"
#include "settings.hpp"

namespace denserew::cli {

namespace {

void run_g4rl(const G4rlPlan& p, const RunContext& ctx) {
  const std::size_t S = p.seeds.size(), V = p.variants.size();
  std::vector<g4rl::MetricsTable> tables(V * S);
  parallel_for(V * S, ctx.jobs, [&](std::size_t i) {
    tables[i] = g4rl::run_experiment(p.env, p.shaping, p.variants[i / S], p.episodes, p.seeds[i % S], p.agent);
  });

  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t k = 0; k < S; ++k) {
      const auto name = "g4rl_" + std::string(g4rl::variant_name(p.variants[v])) + "_seed" +
                        std::to_string(p.seeds[k]) + ".csv";
      write_file(ctx.out / name, [&](std::ostream& out) { tables[v * S + k].write_csv(out); });
    }

  write_file(ctx.out / "g4rl_summary.csv", [&](std::ostream& out) {
    out.precision(12);
    out << "variant,seed,final_success,success_auc,training_phases\n";
    for (std::size_t v = 0; v < V; ++v)
      for (std::size_t k = 0; k < S; ++k) {
        const auto& t = tables[v * S + k];
        out << g4rl::variant_name(p.variants[v]) << ',' << p.seeds[k] << ',' << t.final_success(p.window) << ','
            << t.success_auc() << ',' << t.training_phases << '\n';
      }
  });

  std::vector<harness::Series> curves;
  write_file(ctx.out / "g4rl_curve.csv", [&](std::ostream& out) {
    out.precision(12);
    out << "variant,episode,mean_success,mean_return\n";
    for (std::size_t v = 0; v < V; ++v) {
      harness::Series s{std::string(g4rl::variant_name(p.variants[v])), {}};
      for (std::size_t e = 0; e < p.episodes; ++e) {
        double success = 0.0, ret = 0.0;
        for (std::size_t k = 0; k < S; ++k) {
          const auto& row = tables[v * S + k].rows[e];
          success += row.success ? 1.0 : 0.0;
          ret += row.ret;
        }
        success /= static_cast<double>(S);
        ret /= static_cast<double>(S);
        out << s.name << ',' << e << ',' << success << ',' << ret << '\n';
        s.y.push_back(success);
      }
      s.y = harness::moving_average(s.y, p.window);
      curves.push_back(std::move(s));
    }
  });
  if (ctx.svg)
    write_file(ctx.out / "g4rl_curve.svg", [&](std::ostream& out) {
      harness::write_svg_plot(out, "Success rate, mean over " + std::to_string(S) + " seeds", "episode",
                              "success (moving average)", curves);
    });

  for (std::size_t v = 0; v < V; ++v) {
    double final_success = 0.0, auc = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
      final_success += tables[v * S + k].final_success(p.window) / static_cast<double>(S);
      auc += tables[v * S + k].success_auc() / static_cast<double>(S);
    }
    std::cout << g4rl::variant_name(p.variants[v]) << ": final success " << final_success << " (last "
              << p.window << " episodes), mean successes " << auc << " of " << p.episodes << '\n';
  }
}

}  // namespace

Command g4rl_run_command(CLI::App& root, Settings& settings, std::string& config_path) {
  auto* app = root.add_subcommand("g4rl-run", "Hierarchical gridworld runs with graph-encoder shaping");
  bind_common(app, settings, config_path);
  bind_g4rl_options(app, settings);
  return {app, [](const harness::Config& cfg) -> Runner {
            auto plan = std::make_shared<G4rlPlan>(make_g4rl_plan(cfg));
            return [plan](const RunContext& ctx) { run_g4rl(*plan, ctx); };
          }};
}

}  // namespace denserew::cli
