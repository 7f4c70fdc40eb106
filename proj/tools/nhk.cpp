// nhk: spectra, bound tables and verification reports for Neumann heat kernels
// on warped-product caps.

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nhk/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Neumann heat-kernel bounds: spectra, bound tables and verification reports"};
  app.set_version_flag("--version", "nhk 0.1.0");

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string checks;
  bool quiet = false;
  app.add_option("command", command, "spectrum | trace | bounds | verify | report")
      ->required()
      ->check(CLI::IsMember(nhk::cli::commands()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.path)");
  app.add_option("--checks", checks, "comma-separated check ids, e.g. C1,C4 (overrides checks)");
  app.add_flag("--quiet", quiet, "suppress progress messages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nhk::cli::kConfigError;
  }

  nhk::cli::Context ctx;
  try {
    ctx.config = nhk::parse_config(std::string_view(nhk::io::read_file(config_path)));
    if (!checks.empty()) {
      ctx.config.checks.clear();
      std::stringstream ss(checks);
      for (std::string item; std::getline(ss, item, ',');) {
        const auto id = nhk::parse_check_id(item);
        if (!id) throw nhk::ConfigError("--checks: unknown check id '" + item + "'");
        if (!ctx.config.enabled(*id)) ctx.config.checks.push_back(*id);
      }
      std::sort(ctx.config.checks.begin(), ctx.config.checks.end());
    }
    if (!out_dir.empty()) ctx.config.output.path = out_dir;
  } catch (const nhk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return nhk::cli::kConfigError;
  }
  ctx.out_dir = ctx.config.output.path;
  ctx.out = &std::cout;
  ctx.log = quiet ? nullptr : &std::cerr;
  return nhk::cli::execute(command, ctx, std::cerr);
}
