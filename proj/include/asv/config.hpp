#pragma once

// Run configuration: one JSON document whose sections mirror the module
// parameter structs. Every key is optional (defaults fill the gaps) and
// unknown keys are rejected. Command-line flags are applied on top by the
// caller, giving the precedence flags > file > defaults.

#include <cstdint>
#include <filesystem>
#include <string>

#include "asv/env.hpp"
#include "asv/ppo.hpp"

namespace asv {

inline constexpr int kRunConfigVersion = 1;

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";
  // Empty selects the built-in vessel parameters.
  std::string vessel_params_file;
  EnvConfig env;
  PPOConfig ppo;
  int checkpoint_every = 10;         // iterations
  double cross_track_scale = 100.0;  // m, observation divisor for e
  int eval_threads = 0;              // 0 = hardware concurrency

  // Loads the vessel parameter file (if any) into env.vessel and validates
  // every section.
  void finalize();
};

RunConfig parse_run_config(const std::string& text, const std::string& source = "<memory>");
RunConfig load_run_config(const std::filesystem::path& file);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace asv
