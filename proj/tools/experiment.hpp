#pragma once

// Config parsing, pipelines and artifact emission behind the qthermo CLI.

#include "qthermo/grading.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qthermo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 1;
inline constexpr int kExitFailure = 2;

/// Invalid configuration; the message starts with the offending field.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Output directory or file could not be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pipeline { thermodynamics, protocol_comparison };

struct InitialState {
  std::string kind = "ground";  ///< ground | gibbs | steady_state | coherent | random
  double theta = 0.0;
  double phi = 0.0;
};

struct ProtocolEntry {
  std::string label;
  ProtocolSpec spec;
  Index steps = 0;
  Index stride = 1;
};

struct ExperimentConfig {
  int version = 1;
  std::string preset = "desk";
  Pipeline pipeline = Pipeline::thermodynamics;
  PhysicalParams physical;
  Index dimension = 25;
  PotentialSchedule schedule;
  InitialState initial;
  std::vector<ProtocolEntry> protocols;
  EvolveOptions integrator;
  double protocol_dt = 0.02;
  Index n_theta = 0;  ///< 0: twice the minimum
  Index n_phi = 0;
  std::filesystem::path output_dir = "qthermo_out";
  std::uint64_t seed = 0;
  nlohmann::json effective;  ///< the config with every default filled in
};

/// Physical defaults of a named preset ("desk" or "bath_1k").
PhysicalParams preset_params(const std::string& preset);

/// Parses and validates a config document. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Decimal text with 17 significant digits.
std::string format_number(double value);

/// `t,S_Q,dS_U_dt,Pi_lc,Pi_th,Phi_th,residual` rows.
std::string format_timeseries(const std::vector<EntropyRecord>& records);
std::vector<EntropyRecord> parse_timeseries(std::string_view text);

/// `t,Sigma_ir` with the running trapezoid integral of Pi^lc + Pi^th.
std::string format_sigma_ir(const std::vector<EntropyRecord>& records);

std::string sha256_hex(std::string_view data);

/// Writes through a temporary sibling and a rename. Throws OutputError.
void write_atomic(const std::filesystem::path& path, std::string_view content);

struct Artifact {
  std::string name;
  std::string content;
};

struct PipelineResult {
  std::vector<Artifact> artifacts;
  std::vector<std::string> warnings;
};

/// Runs the configured pipeline in memory. Protocol runs use up to `threads` workers.
PipelineResult run_pipeline(const ExperimentConfig& config, unsigned threads);

/// Writes every artifact plus manifest.json into the output directory.
void emit(const ExperimentConfig& config, const PipelineResult& result, double wall_seconds);

}  // namespace qthermo::cli
