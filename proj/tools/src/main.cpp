#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "experiments.hpp"

namespace {

std::size_t default_jobs() {
  if (const char* env = std::getenv("PAULTRAP_JOBS"); env && *env) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    spdlog::warn("ignoring PAULTRAP_JOBS='{}': expected a positive integer", env);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_logger_mt("paultrap");
  logger->set_pattern("[%H:%M:%S] [%l] %v");
  spdlog::set_default_logger(logger);

  paultrap::cli::RunOptions options;
  long jobs = 0;

  CLI::App app{"Two-electron Paul-trap simulations"};
  app.add_option("experiment", options.experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(paultrap::cli::kExperiments),
                                                     std::end(paultrap::cli::kExperiments))));
  app.add_option("--config", options.config, "YAML config file")->required();
  app.add_option("--out", options.out, "Output directory")->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads (default: PAULTRAP_JOBS, else all cores)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--long-runs", options.long_runs, "Allow runs above 5e9 integration steps");
  app.add_option("--heartbeat", options.heartbeat_s, "Seconds between progress lines on stderr (0: off)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.set_version_flag("--version", std::string(PAULTRAP_VERSION));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : paultrap::cli::kExitConfig;
  }

  options.jobs = jobs > 0 ? static_cast<std::size_t>(jobs) : default_jobs();
  return paultrap::cli::run_command(options, std::cout);
}
