#pragma once

#include <cstdint>
#include <string>

#include "motiontk/motion.hpp"

namespace mtk {

// Procedural motion clips for testing and demos.  Kinds: "walk", "wave",
// "squat", "mixed" (the three in sequence with crossfades).  Everything is
// driven by smooth low-frequency sinusoids with small seeded jitter, so the
// clips are deterministic, physically mild (joint speeds well under 10 rad/s)
// and keep at least one foot near the ground.
PoseSequence gen_synthetic(const Skeleton& skel, const std::string& kind,
                           double seconds, double fps, std::uint64_t seed);

// Relaxed standing pose: arms hanging down, optional slight knee bend.
Pose standing_pose(const Skeleton& skel, double knee_bend = 0.05);

PoseSequence hold_pose(const Skeleton& skel, const Pose& pose, double seconds,
                       double fps);

// Slow stair-climb style clip: feet lift alternately while the pelvis rises.
// Used to exercise contact handling when one foot is off the ground.
PoseSequence gen_stepping(const Skeleton& skel, double seconds, double fps,
                          std::uint64_t seed);

}  // namespace mtk
