#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motiontk/imusynth.hpp"
#include "motiontk/physopt.hpp"
#include "motiontk/skeleton.hpp"
#include "motiontk/vae.hpp"

namespace mtk {

inline constexpr const char* kToolVersion = "0.1.0";

// One JSON file configures every stage; all sections are optional except the
// seed.  Command-line flags override file values.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string skeleton_path;  // empty: built-in 24-joint humanoid
  std::string out_dir = ".";
  VaeConfig vae;
  TrainConfig train;
  AugmentConfig augment;
  int n_augment = 4;
  PhysParams phys;
  PdGains gains;
  ImuConfig imu;
};

// Parse and validate a config file.  Referenced paths must exist; the seed
// is mandatory.  Throws ParseError on any problem.
PipelineConfig load_config(const std::string& path);

// The effective configuration, all defaults materialized, as canonical JSON
// (sorted keys).  Hashing this ties a manifest to the exact run settings.
std::string config_canonical(const PipelineConfig& cfg);
std::string config_hash(const PipelineConfig& cfg);  // 16 hex chars, fnv1a

Skeleton pipeline_skeleton(const PipelineConfig& cfg);

// Run metadata written next to every produced artifact set.
void write_manifest(const std::string& path, const std::string& command,
                    const PipelineConfig& cfg,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::pair<std::string, double>>& timings);

// Full command-line interface.  Returns the process exit code: 0 success,
// 1 usage or validation error, 2 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace mtk
