#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lrising/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"long-range Ising desk-scale simulation and bound verification"};
  app.require_subcommand(1);

  lrising::RunOptions opts;
  std::string bound;

  auto* config_opt = app.add_option("--config", opts.config_path,
                                    "JSON experiment config (omit for the built-in desk config)");
  config_opt->check(CLI::ExistingFile);
  app.add_option("--out", opts.out_dir, "output directory (default: $LRISING_OUT, then ./out)");
  auto* seed_opt = app.add_option("--seed", opts.seed, "override run.seed from the config");
  app.add_option("--workers", opts.workers, "worker pool size (default: logical cores)");
  app.add_flag("--strict", opts.strict, "exit 4 when a verified bound is violated");
  app.add_flag("--override-scale-guard", opts.override_scale_guard,
               "push past the soft enumeration limits (hard caps stay)");

  auto* enumerate = app.add_subcommand("enumerate", "exact-engine tables over the (beta, epsilon) grid");
  auto* contours = app.add_subcommand("contours", "origin-contour census and cube-cover tables");
  auto* sample = app.add_subcommand("sample", "Metropolis chain estimates over the grid");
  auto* verify = app.add_subcommand("verify", "run one bound-verification harness");
  verify->add_option("bound", bound, "flip-energy | concentration | counting | dudley | peierls")->required();
  auto* sweep = app.add_subcommand("sweep", "plus/minus boundary sweep table");
  for (auto* sub : {enumerate, contours, sample, verify, sweep}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  opts.has_seed = seed_opt->count() > 0;
  std::string command = app.get_subcommands().front()->get_name();
  return lrising::run_command(command, bound, opts, std::cout, std::cerr);
}
