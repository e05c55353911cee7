#pragma once

#include <array>
#include <string>
#include <vector>

#include "motiontk/motion.hpp"
#include "motiontk/skeleton.hpp"

namespace mtk {

// Virtual inertial measurements derived from a pose sequence: global
// accelerations by finite differencing of joint positions, orientations
// taken straight from forward kinematics.

struct ImuConfig {
  // pelvis, head, left/right wrist, left/right knee
  std::array<int, 6> sites{0, 15, 20, 21, 4, 5};
  // 0 means "not stated here"; synthesis always differentiates at the
  // sequence's own rate.
  double fps = 0.0;
  // Add +9.81 * up to every sample, mimicking an accelerometer that
  // measures specific force instead of kinematic acceleration.
  bool with_gravity = false;

  void validate() const;  // six distinct in-range joint indices
};

struct ImuFrame {
  std::array<Vec3, 6> acc;  // m/s^2, global frame
  std::array<Rot3, 6> ori;  // global bone rotation
};

struct ImuSequence {
  double fps = 60.0;
  std::array<std::string, 6> sites;  // joint names, same order as the config
  std::vector<ImuFrame> frames;
};

// Accelerations use the central second difference at interior frames and the
// nearest-three-points one-sided second difference at the two endpoints, so
// the output has the same length as the input.  Both stencils reproduce
// quadratic trajectories exactly.  Needs at least 3 frames.
ImuSequence synthesize_imu(const Skeleton& skel, const PoseSequence& seq,
                           const ImuConfig& cfg = ImuConfig());

// JSON: {"fps": .., "sites": [names x6],
//        "frames": [{"acc": [[3] x6], "ori": [[6] x6]}, ...]}
// with orientations in the 6-dof encoding.  Doubles round-trip exactly.
void save_imu(const ImuSequence& imu, const std::string& path);
ImuSequence load_imu(const std::string& path);

}  // namespace mtk
