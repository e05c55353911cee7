#pragma once

#include <array>
#include <string>
#include <vector>

#include "motiontk/motion.hpp"
#include "motiontk/skeleton.hpp"

namespace mtk {

// Fidelity (error against ground truth) and diversity (spread across
// samples) of a set of augmented sequences, all on global joint poses.
struct FidelityReport {
  double e_pos = 0.0;  // mean positional error, cm
  double e_rot = 0.0;  // mean geodesic rotation error, deg
  double e_sip = 0.0;  // e_rot restricted to hips and upper arms, deg
  double d_pos = 0.0;  // mean positional spread across samples, cm
  double d_rot = 0.0;  // mean rotational spread across samples, deg
  std::array<double, kNumJoints> e_pos_joint{};
  std::array<double, kNumJoints> e_rot_joint{};
  std::array<double, kNumJoints> d_pos_joint{};
  std::array<double, kNumJoints> d_rot_joint{};
};

// hips and shoulder-to-elbow bones of the 24-joint humanoid
inline constexpr std::array<int, 4> kSipJoints{1, 2, 16, 17};

// e_* average the per-frame distance between each sample and the ground
// truth.  d_pos is the per-frame per-joint standard deviation of positions
// across samples; d_rot measures geodesic scatter around the per-frame
// chordal-mean rotation.  A single sample therefore has zero diversity.
// All sequences must share length and frame rate; at least one sample.
FidelityReport fidelity(const Skeleton& skel, const PoseSequence& gt,
                        const std::vector<PoseSequence>& augmented,
                        const std::array<int, 4>& sip = kSipJoints);

// Mean norm of the discrete third derivative of global joint positions,
// reported in units of 100 m/s^3.  Needs at least 4 frames.
double jitter(const Skeleton& skel, const PoseSequence& seq);

void save_report_json(const FidelityReport& rep, const std::string& path);
void save_report_csv(const FidelityReport& rep, const std::string& path);

}  // namespace mtk
