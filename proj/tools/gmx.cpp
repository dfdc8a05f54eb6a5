#include <CLI11.hpp>

#include "gmx/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generic-domain mixup experiments: data generation, source-free adaptation, metrics, theorem checks"};
  app.require_subcommand(1);

  gmx::CliOptions opts;
  std::uint64_t seed = 0;
  std::size_t seeds = 0;
  std::string grid;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const gmx::CliOptions&);
  };
  const Command commands[] = {
      {"gen-data", "write source/target datasets and the target eval-label sidecar", gmx::cmd_gen_data},
      {"pipeline", "vendor training, client adaptation and evaluation", gmx::cmd_pipeline},
      {"sweep", "trade-off metrics and accuracies over a lambda grid", gmx::cmd_sweep},
      {"metrics", "vendor-only d_H, kappa and gamma metrics on mixup and original domains", gmx::cmd_metrics},
      {"theorem", "Monte-Carlo theorem verification (and optional d_H + kappa check)", gmx::cmd_theorem},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opts.config, "config file (key = value)")->required();
    sub->add_option("--out", opts.out, "output directory")->required();
    sub->add_option("--seed", seed, "override the base seed");
    sub->add_option("--seeds", seeds, "override the number of seeds");
    sub->add_option("--lambda-grid", grid, "override the lambda grid (comma list)");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gmx::kExitOk : gmx::kExitConfig;
  }

  return gmx::run_guarded([&] {
    for (const auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) opts.seed = seed;
      if (sub->count("--seeds")) opts.seeds = seeds;
      if (sub->count("--lambda-grid")) opts.lambda_grid = gmx::cfgparse::to_doubles(grid);
      return cmd->run(opts);
    }
    return static_cast<int>(gmx::kExitFailure);
  });
}
