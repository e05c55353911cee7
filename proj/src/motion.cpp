#include "motiontk/motion.hpp"

#include <stdexcept>

namespace mtk {

FkResult forward_kinematics(const Skeleton& skel, const Pose& pose) {
  if (skel.joints.size() != kNumJoints) {
    throw std::invalid_argument("forward_kinematics: skeleton must have 24 joints");
  }
  FkResult out;
  out.pos[0] = pose.p_root;
  out.rot[0] = pose.r_root;
  for (int j = 1; j < kNumJoints; ++j) {
    const int p = skel.joints[j].parent;
    out.pos[j] = out.pos[p] + out.rot[p] * skel.joints[j].offset;
    out.rot[j] = out.rot[p] * pose.r_joint[j - 1];
  }
  return out;
}

std::vector<MotionFrame> build_frames(const Skeleton& skel,
                                      const PoseSequence& seq) {
  ensure_matches(skel, seq);
  namespace fl = frame_layout;
  const auto& enc = encoded_joints();
  const std::size_t T = seq.poses.size();
  std::vector<MotionFrame> frames(T, MotionFrame::Zero());

  for (std::size_t t = 0; t < T; ++t) {
    const Pose& pose = seq.poses[t];
    const FkResult fk = forward_kinematics(skel, pose);
    MotionFrame& f = frames[t];
    f.segment<3>(fl::kRootPos) = pose.p_root;
    f.segment<6>(fl::kRootRot) = rot_to_sixd(pose.r_root);
    const Rot3 root_inv = pose.r_root.transpose();
    for (int k = 0; k < int(enc.size()); ++k) {
      const int j = enc[k];
      f.segment<3>(fl::joint_pos(k)) = root_inv * (fk.pos[j] - pose.p_root);
      f.segment<6>(fl::joint_rot(k)) = rot_to_sixd(Rot3(root_inv * fk.rot[j]));
    }
  }

  // Forward-difference velocities; frame 0 copies frame 1.
  for (std::size_t t = 1; t < T; ++t) {
    MotionFrame& f = frames[t];
    const MotionFrame& g = frames[t - 1];
    f.segment<3>(fl::kRootVel) =
        (f.segment<3>(fl::kRootPos) - g.segment<3>(fl::kRootPos)) * seq.fps;
    for (int k = 0; k < int(enc.size()); ++k) {
      f.segment<3>(fl::joint_vel(k)) =
          (f.segment<3>(fl::joint_pos(k)) - g.segment<3>(fl::joint_pos(k))) *
          seq.fps;
    }
  }
  if (T > 1) {
    frames[0].segment<3>(fl::kRootVel) = frames[1].segment<3>(fl::kRootVel);
    for (int k = 0; k < int(enc.size()); ++k) {
      frames[0].segment<3>(fl::joint_vel(k)) =
          frames[1].segment<3>(fl::joint_vel(k));
    }
  }
  return frames;
}

PoseSequence frames_to_poses(const Skeleton& skel,
                             const std::vector<MotionFrame>& frames,
                             double fps) {
  if (skel.joints.size() != kNumJoints) {
    throw std::invalid_argument("frames_to_poses: skeleton must have 24 joints");
  }
  namespace fl = frame_layout;
  const auto& enc = encoded_joints();
  PoseSequence seq;
  seq.fps = fps;
  seq.skeleton = skel.name;
  seq.poses.reserve(frames.size());

  for (const MotionFrame& f : frames) {
    Pose pose;
    pose.p_root = f.segment<3>(fl::kRootPos);
    pose.r_root = sixd_to_rot(f.segment<6>(fl::kRootRot));

    // World orientation per encoded joint, then peel back to local rotations.
    // Parents of encoded joints are either the root or earlier encoded
    // joints, so a single ascending pass suffices.
    std::array<Rot3, kNumJoints> world;
    world[0] = pose.r_root;
    for (int k = 0; k < int(enc.size()); ++k) {
      const int j = enc[k];
      world[j] = pose.r_root * sixd_to_rot(f.segment<6>(fl::joint_rot(k)));
      pose.r_joint[j - 1] = world[skel.joints[j].parent].transpose() * world[j];
    }
    for (int j : kLeafJoints) pose.r_joint[j - 1] = Rot3::Identity();
    seq.poses.push_back(std::move(pose));
  }
  return seq;
}

void ensure_matches(const Skeleton& skel, const PoseSequence& seq) {
  if (seq.skeleton != skel.name) {
    throw std::invalid_argument("motion references skeleton '" + seq.skeleton +
                                "' but '" + skel.name + "' was provided");
  }
}

}  // namespace mtk
