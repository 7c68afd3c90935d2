#include "experiment.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace qthermo;
using namespace qthermo::cli;

nlohmann::json read_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config: cannot read " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-system phase-space thermodynamics and state-transfer grading"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  Index stride = 0;

  auto* run = app.add_subcommand("run", "Execute the pipeline described by a config file");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->add_option("--output-dir", output_dir, "Override output.directory");
  run->add_option("--threads", threads, "Parallel protocol runs")->check(CLI::PositiveNumber);
  run->add_option("--stride", stride, "Override integrator.stride")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
  validate->add_option("config", config_path, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalidConfig;
  }

  ExperimentConfig config;
  try {
    nlohmann::json doc = read_document(config_path);
    if (!doc.is_object()) {
      throw ConfigError("config: top level must be an object");
    }
    if (!output_dir.empty()) {
      doc["output"]["directory"] = output_dir;
    }
    if (stride > 0) {
      doc["integrator"]["stride"] = stride;
    }
    config = parse_config(doc);
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  }

  if (*validate) {
    std::cout << "valid\n";
    return kExitOk;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    const PipelineResult result = run_pipeline(config, threads);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(config, result, wall);
    for (const auto& w : result.warnings) {
      std::cerr << "warning: " << w << "\n";
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const OutputError& e) {
    std::cerr << "output failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
