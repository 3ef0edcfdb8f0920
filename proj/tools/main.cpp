#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "deskrl/runner.hpp"

namespace {

std::string read_file_or_exit(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << path << "\n";
    std::exit(1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deskrl - desk-scale RL benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, records_dir, out_override;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "path to the JSON experiment config")
      ->required();
  run->add_option("--jobs,-j", jobs, "parallel trial workers");
  run->add_option("--out,-o", out_override, "output directory (overrides config)");

  auto* report = app.add_subcommand(
      "report", "rebuild CSV/SVG reports from recorded JSONL episode logs");
  report->add_option("records-dir", records_dir, "experiment output directory")
      ->required();

  auto* validate = app.add_subcommand("validate", "validate a config file");
  validate->add_option("config", config_path, "path to the JSON experiment config")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) {
      deskrl::parse_config(read_file_or_exit(config_path));
      std::cout << "config ok\n";
      return 0;
    }
    if (app.got_subcommand(report)) {
      return deskrl::regenerate_reports(records_dir, std::cout);
    }
    deskrl::ExperimentConfig cfg = deskrl::parse_config(read_file_or_exit(config_path));
    if (!out_override.empty()) {
      cfg.output_dir = out_override;
    } else if (cfg.output_dir == "out") {
      if (const char* env_out = std::getenv("DESKRL_OUT")) cfg.output_dir = env_out;
    }
    return deskrl::run_experiment(cfg, jobs, std::cout);
  } catch (const deskrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
