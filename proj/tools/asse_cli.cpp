#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asse/app/config.hpp"
#include "asse/app/pipeline.hpp"
#include "asse/errors.hpp"
#include "asse/grid/case.hpp"

namespace {

using namespace asse;

app::ExperimentConfig load_with_overrides(const std::string& path, const std::string& out, std::size_t workers,
                                          const std::string& methods) {
  auto cfg = app::load_config(path);
  if (!out.empty()) cfg.output_dir = out;
  if (workers > 0) cfg.workers = workers;
  if (!methods.empty()) cfg.methods = app::parse_method_list(methods);
  return cfg;
}

void log_line(std::string_view s) { std::cerr << s << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Adaptive stochastic spectral embedding for probabilistic optimal power flow"};
  cli.require_subcommand(1);

  std::string config_path, out_dir, methods;
  std::size_t workers = 0;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (JSON, comments allowed)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides config output_dir)");
    sub->add_option("--workers", workers, "OPF worker threads (overrides config)")->check(CLI::PositiveNumber);
    sub->add_option("--methods", methods, "Comma-separated subset of MC,ASSE,SPCE");
    sub->add_flag("--quiet", quiet, "No progress output");
  };

  auto* run = cli.add_subcommand("run", "Design, OPF batch, surrogate fit, validation and reports");
  add_common(run);

  auto* sweep = cli.add_subcommand("sweep", "Validation error against training-set size");
  add_common(sweep);
  std::vector<std::size_t> n_list;
  sweep->add_option("--n-ed", n_list, "N_ED values (default: config sweep list)");

  auto* eval = cli.add_subcommand("eval", "Evaluate a saved surrogate on a points CSV");
  std::string doc_path, points_path, pred_path, space = "auto";
  eval->add_option("--surrogate", doc_path, "Surrogate document")->required()->check(CLI::ExistingFile);
  eval->add_option("--points", points_path, "Points CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", pred_path, "Predictions CSV")->required();
  eval->add_option("--space", space, "Coordinates of the points")->check(CLI::IsMember({"auto", "unit", "physical"}));

  auto* parse = cli.add_subcommand("parse-case", "Parse and validate a MATPOWER case file");
  std::string case_path;
  parse->add_option("case", case_path, "Case file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(cli, argc, argv);

  const app::ProgressFn progress = [&](std::string_view s) {
    if (!quiet) log_line(s);
  };
  try {
    if (*run) {
      const auto cfg = load_with_overrides(config_path, out_dir, workers, methods);
      const auto res = app::cmd_run(cfg, cfg.output_dir, progress);
      for (const auto& [key, e] : res.e_val)
        std::cout << "e_val " << key.first << ' ' << key.second << ' ' << app::format_number(e) << '\n';
      std::cout << "excluded design " << res.excluded_design << ", validation " << res.excluded_validation << '\n';
      std::cout << "artifacts in " << cfg.output_dir.string() << " (" << res.total_seconds << " s)\n";
    } else if (*sweep) {
      const auto cfg = load_with_overrides(config_path, out_dir, workers, methods);
      const auto res = app::cmd_sweep(cfg, cfg.output_dir, n_list, progress);
      std::cout << res.rows.size() << " sweep rows written to " << (cfg.output_dir / "sweep.csv").string() << " ("
                << res.total_seconds << " s)\n";
    } else if (*eval) {
      const auto sp = space == "unit" ? app::PointSpace::Unit
                      : space == "physical" ? app::PointSpace::Physical
                                            : app::PointSpace::Auto;
      const auto v = app::cmd_eval(doc_path, points_path, pred_path, sp);
      std::cout << v.size() << " predictions written to " << pred_path << '\n';
    } else if (*parse) {
      std::vector<std::string> warnings;
      const auto c = grid::load_matpower_case(case_path, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      std::cout << c.name << ": " << c.buses.size() << " buses, " << c.generators.size() << " generators, "
                << c.branches.size() << " branches, baseMVA " << c.base_mva << '\n';
    }
  } catch (const app::StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
