#include "nlsaddle/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

nlsaddle::RunConfig load(std::string const &config, std::vector<std::string> const &overrides, std::string const &out)
{
  nlsaddle::RunConfig cfg = config.empty() ? nlsaddle::RunConfig{} : nlsaddle::RunConfig::load(config);
  cfg.apply_overrides(overrides);
  if (!out.empty()) { cfg.out_dir = out; }
  cfg.validate();
  return cfg;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Non-linear primal-dual reconstruction experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("-c,--config", config, "configuration file (key = value lines)");
    cmd->add_option("-o,--out", out, "output directory (overrides out_dir)");
    cmd->add_option("overrides", overrides, "key=value overrides");
  };

  int n = 64;
  auto *phantom = app.add_subcommand("phantom", "write the velocity phantom as r.pgm, phi.pgm");
  phantom->add_option("-n", n, "grid size")->check(CLI::Range(8, 1 << 14));
  phantom->add_option("-o,--out", out, "output directory");

  auto *mask = app.add_subcommand("mask", "write the Gaussian sampling mask (mask.pbm)");
  add_common(mask);
  auto *simulate = app.add_subcommand("simulate", "write mask, noisy k-space data and ground truth");
  add_common(simulate);
  auto *solve = app.add_subcommand("solve", "reconstruct velocity data with the configured solver");
  add_common(solve);
  std::vector<double> alphas;
  auto *sweep = app.add_subcommand("sweep", "discrepancy-principle sweep over alpha_r");
  add_common(sweep);
  sweep->add_option("-a,--alphas", alphas, "alpha values (comma separated)")->delimiter(',')->required();
  auto *compare = app.add_subcommand("compare", "backprojection, NL-PDHGM variants and Gauss-Newton on one data set");
  add_common(compare);
  auto *dti = app.add_subcommand("dti-demo", "synthetic diffusion-tensor denoising");
  add_common(dti);

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom->parsed()) { return nlsaddle::cmd_phantom(n, out.empty() ? "." : out); }
    auto const cfg = load(config, overrides, out);
    if (mask->parsed()) { return nlsaddle::cmd_mask(cfg); }
    if (simulate->parsed()) { return nlsaddle::cmd_simulate(cfg); }
    if (solve->parsed()) { return nlsaddle::cmd_solve(cfg); }
    if (sweep->parsed()) { return nlsaddle::cmd_sweep(cfg, alphas); }
    if (compare->parsed()) { return nlsaddle::cmd_compare(cfg); }
    if (dti->parsed()) { return nlsaddle::cmd_dti_demo(cfg); }
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
