#include "app.hpp"

#include "wxreg/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  using namespace wxreg::app;

  CLI::App cli{"Closed-curve registration on a moving Wu-Xu finite element mesh"};
  cli.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> momentum;
  Options options;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "ensemble seed (overrides seed)");
    sub->add_option("--jobs", options.jobs, "prediction threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_flag("-q,--quiet", options.quiet, "suppress progress output");
  };

  auto* mesh_gen = cli.add_subcommand("mesh-gen", "generate the template mesh and curve");
  auto* make_target = cli.add_subcommand("make-target", "forward a synthetic momentum to a target");
  auto* forward = cli.add_subcommand("forward", "integrate the flow for a momentum CSV");
  auto* invert = cli.add_subcommand("invert", "ensemble Kalman inversion against a target");
  auto* report = cli.add_subcommand("report", "summarize a run directory");
  for (auto* sub : {mesh_gen, make_target, forward, invert, report}) add_common(sub);
  forward->add_option("--momentum", momentum, "momentum CSV (overrides momentum_file)")->check(CLI::ExistingFile);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? parse_config("{}") : load_config(config_path);
    if (out_dir) config.output_dir = *out_dir;
    if (seed) config.seed = *seed;
    if (momentum) config.momentum_file = *momentum;
    config.validate();

    if (mesh_gen->parsed()) cmd_mesh_gen(config, options, std::cout);
    if (make_target->parsed()) cmd_make_target(config, options, std::cout);
    if (forward->parsed()) cmd_forward(config, options, std::cout);
    if (invert->parsed()) cmd_invert(config, options, std::cout);
    if (report->parsed()) cmd_report(config, options, std::cout);
  } catch (const wxreg::Error& e) {
    std::cerr << "error: " << e.describe() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}
