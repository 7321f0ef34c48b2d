#include <iostream>

#include <CLI11.hpp>

#include "sfgsta/cli.hpp"
#include "sfgsta/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Shortcut-to-adiabaticity design and simulation of sum-frequency generation"};
  app.set_version_flag("--version", std::string(sfg::kVersion));
  app.require_subcommand(1);

  sfg::cli::CommonOptions common;
  std::string out_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", common.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides the scenario)");
    sub->add_option("--workers", common.workers, "Worker threads for sweeps (0 = all cores)");
    sub->add_option("--rel-tol", common.rel_tol, "Relative ODE tolerance");
    sub->add_option("--abs-tol", common.abs_tol, "Absolute ODE tolerance");
  };

  sfg::cli::MaterialQuery mq;
  std::string material_file, material_scenario;
  auto* material = app.add_subcommand("material", "Refractive indices and primary mismatch for a wavelength triple");
  material->add_option("--material", material_file, "Material JSON file");
  material->add_option("--scenario", material_scenario, "Take material and setup from a scenario");
  material->add_option("--lambda1", mq.lambda1_um, "Signal wavelength (um)");
  material->add_option("--lambda2", mq.lambda2_um, "Pump wavelength (um)");
  material->add_option("--temperature", mq.temperature_c, "Crystal temperature (C)");

  auto* design = app.add_subcommand("design", "Emit the designed drive profile and diagnostics");
  auto* propagate = app.add_subcommand("propagate", "Propagate the designed drive and summarise the transfer");
  auto* sweep = app.add_subcommand("sweep", "Run the scenario's efficiency sweeps");
  for (auto* sub : {design, propagate, sweep}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (!out_dir.empty()) common.out = out_dir;

  if (material->parsed()) {
    if (!material_file.empty()) mq.material_file = material_file;
    if (!material_scenario.empty()) mq.scenario = material_scenario;
    return sfg::cli::cmd_material(mq, std::cout, std::cerr);
  }
  if (design->parsed()) return sfg::cli::cmd_design(common, std::cout, std::cerr);
  if (propagate->parsed()) return sfg::cli::cmd_propagate(common, std::cout, std::cerr);
  return sfg::cli::cmd_sweep(common, std::cout, std::cerr);
}
