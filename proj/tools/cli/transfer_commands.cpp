#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <variant>

#include "denserew/error.hpp"
#include "denserew/harness/svg_plot.hpp"
#include "denserew/spectral_transfer.hpp"
#include "denserew/transfer_experiment.hpp"
#include "plans.hpp"
#include "settings.hpp"

namespace denserew::cli {

namespace {

struct MazeSpectra {
  spectral::SpectralSummary s1;
  spectral::SpectralSummary s2;
  double distance = std::numeric_limits<double>::infinity();
  bool same_size = false;
};

MazeSpectra maze_spectra(const TransferPlan& p) {
  MazeSpectra m;
  m.s1 = spectral::graph_spectrum(spectral::survey_graph(p.maze1, p.config.epsilon_d));
  m.s2 = spectral::graph_spectrum(spectral::survey_graph(p.maze2, p.config.epsilon_d));
  m.same_size = m.s1.size() == m.s2.size();
  if (m.same_size) m.distance = spectral::spectrum_distance(m.s1, m.s2);
  return m;
}

spectral::MatchResult match_of(const MazeSpectra& m, const spectral::MatchTolerances& tol) {
  if (!m.same_size) return spectral::SpectraMismatch{m.distance};
  return spectral::match_nodes(m.s1, m.s2, tol);
}

std::vector<double> mean_curve(const std::vector<spectral::TransferOutcome>& outcomes, bool shaped) {
  std::vector<double> y;
  for (const auto& o : outcomes) {
    const auto& s = shaped ? o.shaped_success : o.baseline_success;
    y.resize(std::max(y.size(), s.size()), 0.0);
    for (std::size_t e = 0; e < s.size(); ++e) y[e] += s[e] ? 1.0 / static_cast<double>(outcomes.size()) : 0.0;
  }
  return y;
}

void run_transfer(const TransferPlan& p, const RunContext& ctx) {
  const auto spectra = maze_spectra(p);
  write_file(ctx.out / "eigenvalues_maze1.csv", [&](std::ostream& o) { spectral::write_eigenvalues_csv(o, spectra.s1); });
  write_file(ctx.out / "eigenvalues_maze2.csv", [&](std::ostream& o) { spectral::write_eigenvalues_csv(o, spectra.s2); });
  write_file(ctx.out / "eigenvectors_maze1.csv", [&](std::ostream& o) { spectral::write_eigenvectors_csv(o, spectra.s1); });
  write_file(ctx.out / "eigenvectors_maze2.csv", [&](std::ostream& o) { spectral::write_eigenvectors_csv(o, spectra.s2); });
  const auto match = match_of(spectra, p.config.tolerances);
  if (const auto* m = std::get_if<spectral::Matched>(&match))
    write_file(ctx.out / "match.csv", [&](std::ostream& o) { spectral::write_match_csv(o, *m); });

  std::vector<spectral::TransferOutcome> outcomes(p.seeds.size());
  parallel_for(outcomes.size(), ctx.jobs, [&](std::size_t k) {
    outcomes[k] = spectral::run_transfer(p.maze1, p.maze2, p.config, p.seeds[k]);
  });
  write_file(ctx.out / "transfer.csv", [&](std::ostream& out) {
    spectral::write_transfer_csv_header(out);
    for (std::size_t k = 0; k < outcomes.size(); ++k) spectral::write_transfer_csv_row(out, p.seeds[k], outcomes[k]);
  });

  const auto shaped = mean_curve(outcomes, true), baseline = mean_curve(outcomes, false);
  write_file(ctx.out / "transfer_curve.csv", [&](std::ostream& out) {
    out.precision(12);
    out << "episode,shaped_success,baseline_success\n";
    for (std::size_t e = 0; e < shaped.size(); ++e) out << e << ',' << shaped[e] << ',' << baseline[e] << '\n';
  });
  if (ctx.svg)
    write_file(ctx.out / "transfer_curve.svg", [&](std::ostream& out) {
      harness::write_svg_plot(out, "Target maze success, mean over " + std::to_string(outcomes.size()) + " seeds",
                              "episode", "success (moving average)",
                              {{"transfer", harness::moving_average(shaped, p.config.window)},
                               {"no transfer", harness::moving_average(baseline, p.config.window)}});
    });

  std::size_t faster = 0;
  double shaped_mean = 0.0, baseline_mean = 0.0;
  for (const auto& o : outcomes) {
    faster += o.shaped_episodes < o.baseline_episodes;
    shaped_mean += static_cast<double>(o.shaped_episodes) / static_cast<double>(outcomes.size());
    baseline_mean += static_cast<double>(o.baseline_episodes) / static_cast<double>(outcomes.size());
  }
  std::cout << "spectrum distance " << spectra.distance << ", node matching: " << spectral::match_kind(match)
            << "\nepisodes to threshold: transfer " << shaped_mean << ", no transfer " << baseline_mean
            << "; transfer faster in " << faster << '/' << outcomes.size() << " seeds\n";
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibratePlan {
  CalibratePlan(G4rlPlan g, TransferPlan t) : g4rl(std::move(g)), transfer(std::move(t)) {}

  G4rlPlan g4rl;
  TransferPlan transfer;
  bool do_beta = true;
  bool do_match = true;
  bool do_transfer = true;
  std::vector<std::uint64_t> seeds;
  std::vector<double> betas;
  std::vector<double> eps_lambdas;
  std::vector<double> eps_vs;
  std::vector<double> beta_transfers;
};

CalibratePlan make_calibrate_plan(const harness::Config& c) {
  CalibratePlan p(make_g4rl_plan(c), make_transfer_plan(c));
  p.do_beta = p.do_match = p.do_transfer = false;
  std::stringstream what(c.get_string("calibrate.what", "beta,match,transfer"));
  for (std::string part; std::getline(what, part, ',');) {
    if (part == "beta") p.do_beta = true;
    else if (part == "match") p.do_match = true;
    else if (part == "transfer") p.do_transfer = true;
    else throw Error(Errc::InvalidArgument, "calibrate --what takes a comma list of beta, match and transfer");
  }
  p.seeds = sorted_seeds(c.get_string("calibrate.seeds", "5"));
  p.g4rl.episodes = c.get_uint("calibrate.episodes", 300);
  if (p.g4rl.episodes == 0) throw Error(Errc::InvalidArgument, "calibrate.episodes must be positive");
  p.betas = c.get_doubles("calibrate.betas", {0.25, 0.5, 1.0, 2.0});
  p.eps_lambdas = c.get_doubles("calibrate.eps_lambdas", {1e-9, 1e-6, 1e-3});
  p.eps_vs = c.get_doubles("calibrate.eps_vs", {1e-9, 1e-6, 1e-3});
  p.beta_transfers = c.get_doubles("calibrate.beta_transfers", {0.0, 0.003, 0.01, 0.03});
  for (double b : p.betas) {
    auto s = p.g4rl.shaping;
    s.beta = b;
    s.validate();
  }
  for (double l : p.eps_lambdas)
    for (double v : p.eps_vs) {
      auto t = p.transfer.config;
      t.tolerances = {l, v};
      t.validate();
    }
  for (double b : p.beta_transfers) {
    auto t = p.transfer.config;
    t.beta_transfer = b;
    t.validate();
  }
  return p;
}

void run_calibrate(const CalibratePlan& p, const RunContext& ctx) {
  const std::size_t S = p.seeds.size();
  const double inv_s = 1.0 / static_cast<double>(S);

  if (p.do_beta) {
    std::vector<g4rl::MetricsTable> tables(p.betas.size() * S);
    parallel_for(tables.size(), ctx.jobs, [&](std::size_t i) {
      auto shaping = p.g4rl.shaping;
      shaping.beta = p.betas[i / S];
      tables[i] = g4rl::run_experiment(p.g4rl.env, shaping, g4rl::Variant::Both, p.g4rl.episodes, p.seeds[i % S],
                                       p.g4rl.agent);
    });
    write_file(ctx.out / "calibrate_beta.csv", [&](std::ostream& out) {
      out.precision(12);
      out << "beta,mean_final_success,mean_success_auc,mean_training_phases\n";
      for (std::size_t b = 0; b < p.betas.size(); ++b) {
        double fin = 0.0, auc = 0.0, phases = 0.0;
        for (std::size_t k = 0; k < S; ++k) {
          const auto& t = tables[b * S + k];
          fin += t.final_success(p.g4rl.window) * inv_s;
          auc += t.success_auc() * inv_s;
          phases += static_cast<double>(t.training_phases) * inv_s;
        }
        out << p.betas[b] << ',' << fin << ',' << auc << ',' << phases << '\n';
      }
    });
  }

  if (p.do_match) {
    const auto spectra = maze_spectra(p.transfer);
    write_file(ctx.out / "calibrate_match.csv", [&](std::ostream& out) {
      out.precision(12);
      out << "eps_lambda,eps_v,spectrum_distance,spectra_match,match\n";
      for (double l : p.eps_lambdas)
        for (double v : p.eps_vs) {
          const bool spectra_ok = spectra.same_size && spectral::spectra_match(spectra.s1, spectra.s2, l);
          out << l << ',' << v << ',' << spectra.distance << ',' << spectra_ok << ','
              << spectral::match_kind(match_of(spectra, {l, v})) << '\n';
        }
    });
  }

  if (p.do_transfer) {
    std::vector<spectral::TransferOutcome> outcomes(p.beta_transfers.size() * S);
    parallel_for(outcomes.size(), ctx.jobs, [&](std::size_t i) {
      auto cfg = p.transfer.config;
      cfg.beta_transfer = p.beta_transfers[i / S];
      outcomes[i] = spectral::run_transfer(p.transfer.maze1, p.transfer.maze2, cfg, p.seeds[i % S]);
    });
    write_file(ctx.out / "calibrate_transfer.csv", [&](std::ostream& out) {
      out.precision(12);
      out << "beta_transfer,mean_shaped_episodes,mean_baseline_episodes,shaped_faster\n";
      for (std::size_t b = 0; b < p.beta_transfers.size(); ++b) {
        double shaped = 0.0, baseline = 0.0;
        std::size_t faster = 0;
        for (std::size_t k = 0; k < S; ++k) {
          const auto& o = outcomes[b * S + k];
          shaped += static_cast<double>(o.shaped_episodes) * inv_s;
          baseline += static_cast<double>(o.baseline_episodes) * inv_s;
          faster += o.shaped_episodes < o.baseline_episodes;
        }
        out << p.beta_transfers[b] << ',' << shaped << ',' << baseline << ',' << faster << '\n';
      }
    });
  }
}

}  // namespace

Command transfer_run_command(CLI::App& root, Settings& s, std::string& config_path) {
  auto* app = root.add_subcommand("transfer-run", "Spectral node matching and value transfer between two mazes");
  bind_common(app, s, config_path);
  bind_transfer_options(app, s);
  return {app, [](const harness::Config& cfg) -> Runner {
            auto plan = std::make_shared<TransferPlan>(make_transfer_plan(cfg));
            return [plan](const RunContext& ctx) { run_transfer(*plan, ctx); };
          }};
}

Command calibrate_command(CLI::App& root, Settings& s, std::string& config_path) {
  auto* app = root.add_subcommand("calibrate", "Sweeps of beta, eps_lambda/eps_v and beta_transfer");
  bind_common(app, s, config_path);
  s.bind(app, "--what", "calibrate.what", "Comma list of beta, match, transfer");
  s.bind(app, "--seeds", "calibrate.seeds", "Seed count N (0..N-1), range a..b or list a,b,c");
  s.bind(app, "--episodes", "calibrate.episodes", "Episodes per hierarchical run");
  s.bind(app, "--betas", "calibrate.betas", "Comma list of encoder training tolerances");
  s.bind(app, "--eps-lambdas", "calibrate.eps_lambdas", "Comma list of spectrum tolerances");
  s.bind(app, "--eps-vs", "calibrate.eps_vs", "Comma list of row tolerances");
  s.bind(app, "--beta-transfers", "calibrate.beta_transfers", "Comma list of transfer coefficients");
  return {app, [](const harness::Config& cfg) -> Runner {
            auto plan = std::make_shared<CalibratePlan>(make_calibrate_plan(cfg));
            return [plan](const RunContext& ctx) { run_calibrate(*plan, ctx); };
          }};
}

}  // namespace denserew::cli
