#include "dscaler/commands.hpp"
#include "dscaler/config.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace dscaler;

int main(int argc, char** argv) {
  CLI::App app{"Distortion scaling bounds for Gaussian sensor networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  int jobs = -1;
  std::string out_dir;
  app.add_option("-c,--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  app.add_option("--set", sets, "Override a key, section.key=value (repeatable)");
  app.add_option("-j,--jobs", jobs, "Worker threads (0 = all cores)");
  app.add_option("-o,--out", out_dir, "Output directory");

  auto* spectrum = app.add_subcommand("spectrum", "Write the eigenvalue CSV");
  auto* bounds = app.add_subcommand("bounds", "Print one bounds row as JSON");
  Index N = 0;
  auto* n_opt = bounds->add_option("-N,--sensors", N, "Number of sensors");
  auto* sweep = app.add_subcommand("sweep", "Write the sweep CSV and JSON summary");
  auto* check = app.add_subcommand("check-class-a", "Check the declared class parameters");
  bool print_config = false;
  auto* show = app.add_subcommand("config", "Print the resolved config");
  show->add_flag("--hash", print_config, "Print only the config hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  RunConfig cfg;
  const int loaded = run_command(
      [&] {
        std::vector<Override> overrides;
        for (const auto& s : sets) overrides.push_back(parse_override(s));
        if (jobs >= 0) overrides.emplace_back("run.jobs", std::to_string(jobs));
        if (!out_dir.empty()) overrides.emplace_back("output.dir", out_dir);
        cfg = load_config(config_path, overrides);
      },
      std::cerr);
  if (loaded != kExitOk) return loaded;

  return run_command(
      [&] {
        if (*spectrum) cmd_spectrum(cfg, std::cout, std::cerr);
        if (*bounds) cmd_bounds(cfg, *n_opt ? std::optional<Index>(N) : std::nullopt, std::cout, std::cerr);
        if (*sweep) cmd_sweep(cfg, std::cout, std::cerr);
        if (*check) cmd_check_class_a(cfg, std::cout, std::cerr);
        if (*show) std::cout << (print_config ? config_hash(cfg) + "\n" : serialize_config(cfg));
      },
      std::cerr);
}
