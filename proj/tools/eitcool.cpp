#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eitcool/constants.hpp"
#include "eitcool/harness.hpp"

namespace {

int print_constants() {
  std::cout << "# constants " << eitcool::constants::kTableVersion << '\n' << "name,value,unit\n";
  for (const auto& e : eitcool::constants::kTable)
    std::cout << e.name << ',' << eitcool::format_double(e.value) << ',' << e.unit << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EIT ground-state cooling simulator for a trapped 40Ca+ ion"};
  app.set_version_flag("--version", std::string(eitcool::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  unsigned threads = 1;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "run the task a configuration selects");
  run->add_option("config", config, "configuration file")->required();
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--threads", threads, "worker threads for sweep points")->check(CLI::Range(1u, 256u));
  run->add_flag("--verbose", verbose, "progress on stderr");

  auto* validate = app.add_subcommand("validate", "parse and check a configuration");
  validate->add_option("config", config, "configuration file")->required();

  app.add_subcommand("constants", "print the frozen constant table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("constants")) return print_constants();
    const eitcool::ConfigFile cfg = eitcool::load_config(config);
    if (app.got_subcommand("validate")) {
      for (const auto& e : cfg.provenance())
        std::cout << e.key << " = " << e.value << " ; " << eitcool::to_string(e.source) << '\n';
      std::cout << config << ": ok\n";
      return 0;
    }
    const auto output = eitcool::run_task(cfg, threads, verbose ? &std::cerr : nullptr);
    const int status = eitcool::write_run(output, out_dir);
    for (const auto& f : output.failures) std::cerr << "FAILED " << f << '\n';
    if (verbose) std::cerr << "wrote " << out_dir << "/" << output.stem << ".csv\n";
    return status;
  } catch (const eitcool::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
