// colddipole command line front end: ensemble / dimer / theory runs driven
// by a config file, writing CSV tables plus a manifest into --out.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <colddipole/harness.hpp>

namespace {

struct CommonOpts {
  std::string config;
  std::string from_manifest;
  std::string out = ".";
  long seed = -1;
  int realizations = 0;
  int workers = 0;
};

void add_common(CLI::App* app, CommonOpts& o, bool need_config = true) {
  auto* cfg = app->add_option("--config,-c", o.config, "config file");
  auto* man = app->add_option("--from-manifest", o.from_manifest,
                              "re-run the scenario embedded in a manifest.json");
  if (need_config) {
    cfg->check(CLI::ExistingFile);
    man->check(CLI::ExistingFile)->excludes(cfg);
  }
  app->add_option("--out,-o", o.out, "output directory");
  app->add_option("--seed", o.seed, "override the ensemble seed");
  app->add_option("--realizations", o.realizations, "override the realization count");
  app->add_option("--workers", o.workers, "override the worker thread count");
}

// `strict = false` for the derived tables (modes, theory): they only read a
// parameter subset, so running them off an ensemble or fly-by config is fine.
colddipole::Scenario load_scenario(const CommonOpts& o, colddipole::ScenarioKind expect,
                                   bool strict = true) {
  colddipole::Scenario sc;
  if (!o.from_manifest.empty()) {
    std::ifstream in(o.from_manifest);
    if (!in) throw std::runtime_error("cannot open " + o.from_manifest);
    nlohmann::json j;
    in >> j;
    sc = colddipole::scenario_from_config(
        colddipole::parse_config_text(j.at("config_text").get<std::string>()));
  } else if (!o.config.empty()) {
    sc = colddipole::scenario_from_config(colddipole::load_config_file(o.config));
  } else {
    throw std::runtime_error("either --config or --from-manifest is required");
  }
  if (strict && sc.kind != expect)
    throw std::runtime_error("config scenario kind does not match the subcommand");
  sc.kind = expect;
  if (o.seed >= 0) sc.ensemble.seed = static_cast<std::uint64_t>(o.seed);
  if (o.realizations > 0) sc.ensemble.realizations = o.realizations;
  if (o.workers > 0) sc.workers = o.workers;
  sc.ensemble.validate();
  return sc;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled-dipole fluorescence simulator"};
  app.require_subcommand(1);

  CommonOpts eo;
  auto* ens = app.add_subcommand("ensemble", "decay of a driven random ensemble");
  add_common(ens, eo);

  auto* dim = app.add_subcommand("dimer", "two-atom scenarios");
  dim->require_subcommand(1);
  CommonOpts fo;
  auto* fly = dim->add_subcommand("flyby", "close fly-by of a moving pair");
  add_common(fly, fo);
  CommonOpts mo;
  auto* modes = dim->add_subcommand("modes", "collective mode table over separation");
  add_common(modes, mo);

  CommonOpts to;
  double v0_max = 0.5;
  int v0_points = 21;
  auto* theory = app.add_subcommand("theory", "radiation trapping estimates");
  add_common(theory, to);
  theory->add_option("--v0-max", v0_max, "top of the k0*v0 grid");
  theory->add_option("--points", v0_points, "grid size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ens) {
      const auto sc = load_scenario(eo, colddipole::ScenarioKind::Ensemble);
      const auto res = colddipole::run_ensemble_to_files(sc, eo.out);
      std::printf("wrote %s/intensity.csv (%d realizations, %d excluded, %.1f s)\n",
                  eo.out.c_str(), sc.ensemble.realizations, res.n_excluded, res.wall_clock_s);
    } else if (*fly) {
      const auto sc = load_scenario(fo, colddipole::ScenarioKind::DimerFlyby);
      colddipole::run_dimer_flyby_to_files(sc, fo.out);
      std::printf("wrote fly-by tables to %s\n", fo.out.c_str());
    } else if (*modes) {
      const auto sc = load_scenario(mo, colddipole::ScenarioKind::DimerModes, false);
      colddipole::run_dimer_modes_to_files(sc, mo.out);
      std::printf("wrote %s/dimer_modes.csv\n", mo.out.c_str());
    } else if (*theory) {
      const auto sc = load_scenario(to, colddipole::ScenarioKind::Theory, false);
      colddipole::run_theory_to_files(sc, to.out, v0_max, v0_points);
      std::printf("wrote %s/theory.csv\n", to.out.c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
