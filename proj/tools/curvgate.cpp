// curvgate: run inequality checks and radius scans from a key=value config.
//
//   curvgate check --config run.cfg [--out dir]
//   curvgate scan --config scan.cfg [--out dir]
//   curvgate catalog --list
//
// Exit status: 0 verdicts as expected, 1 unexpected verdict, 2 bad config.

#include <iostream>

#include <CLI11.hpp>

#include "curvgate/bundle.hpp"
#include "curvgate/cli_report.hpp"
#include "curvgate/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sampled curvature checks for connection metrics on vector bundles"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* check = app.add_subcommand("check", "evaluate the configured inequalities, write report.csv and summary.txt");
  check->add_option("--config", config_path, "config file")->required();
  check->add_option("--out", out_dir, "output directory (overrides the config's output key)");

  auto* scan = app.add_subcommand("scan", "sectional curvature extremes over a radius grid, write scan.csv");
  scan->add_option("--config", config_path, "config file")->required();
  scan->add_option("--out", out_dir, "output directory (overrides the config's output key)");

  bool list = false;
  auto* catalog = app.add_subcommand("catalog", "catalog bundles");
  catalog->add_flag("--list", list, "print every catalog id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (catalog->parsed()) {
    for (const auto& line : curvgate::catalog_descriptions()) std::cout << line << "\n";
    return 0;
  }

  try {
    curvgate::RunConfig cfg = curvgate::load_config(config_path);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (check->parsed()) return curvgate::run_check_command(cfg, std::cout);
    return curvgate::run_scan_command(cfg, std::cout);
  } catch (const curvgate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    // Domain and structural errors come from parameters the config chose.
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
