#pragma once

#include <array>
#include <string>
#include <vector>

#include "motiontk/rotmath.hpp"
#include "motiontk/skeleton.hpp"

namespace mtk {

// One articulated pose: global root transform plus local joint rotations for
// joints 1..23 (r_joint[j-1] is the rotation of joint j relative to its
// parent).  End-effector leaves stay identity by convention.
struct Pose {
  Vec3 p_root = Vec3::Zero();
  Rot3 r_root = Rot3::Identity();
  std::array<Rot3, kNumJoints - 1> r_joint;

  Pose() { r_joint.fill(Rot3::Identity()); }
};

struct PoseSequence {
  double fps = 60.0;
  std::string skeleton = "humanoid24";
  std::vector<Pose> poses;
};

struct FkResult {
  std::array<Vec3, kNumJoints> pos;   // joint origins, world frame
  std::array<Rot3, kNumJoints> rot;   // body orientations, world frame
};

FkResult forward_kinematics(const Skeleton& skel, const Pose& pose);

// ---------------------------------------------------------------------------
// Dense per-frame encoding used by the learned model: 240 doubles per frame.
//
//   [0:3)    root position, world frame
//   [3:6)    root linear velocity, world frame
//   [6:12)   root orientation, 6-dof encoding
//   then 12 values for each of the 19 encoded joints (see encoded_joints()):
//   [0:3)    joint position relative to the root, expressed in the root frame
//   [3:6)    velocity of that root-relative position
//   [6:12)   joint world orientation expressed in the root frame, 6-dof
//
// Velocities are forward differences scaled by fps; frame 0 copies frame 1's
// velocities so every frame is fully populated.
// ---------------------------------------------------------------------------
inline constexpr int kFrameDim = 240;
using MotionFrame = Eigen::Matrix<double, kFrameDim, 1>;

namespace frame_layout {
inline constexpr int kRootPos = 0;
inline constexpr int kRootVel = 3;
inline constexpr int kRootRot = 6;
constexpr int joint_pos(int k) { return 12 + 12 * k; }
constexpr int joint_vel(int k) { return 12 + 12 * k + 3; }
constexpr int joint_rot(int k) { return 12 + 12 * k + 6; }
}  // namespace frame_layout

std::vector<MotionFrame> build_frames(const Skeleton& skel,
                                      const PoseSequence& seq);

// Inverse of build_frames up to the information the encoding carries:
// velocities are ignored, leaf joints come back as identity, and every
// decoded rotation is re-orthonormalized.
PoseSequence frames_to_poses(const Skeleton& skel,
                             const std::vector<MotionFrame>& frames,
                             double fps);

// Throws std::invalid_argument when a sequence names a different skeleton
// than the one it is being used with.
void ensure_matches(const Skeleton& skel, const PoseSequence& seq);

}  // namespace mtk
