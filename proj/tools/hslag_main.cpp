#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "hslag/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"HSLAG experiment driver"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment config");
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out-dir", out_dir, "report/CSV output directory");

  CLI11_PARSE(app, argc, argv);

  if (const char* threads = std::getenv("HSLAG_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  return hslag::run_file(config_path, out_dir);
}
