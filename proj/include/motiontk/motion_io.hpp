#pragma once

#include <string>

#include "motiontk/motion.hpp"

namespace mtk {

// Motion files are JSON:
//   {"fps": 60, "skeleton": "<name>",
//    "frames": [{"p_root": [3], "r_root": [6], "r_joints": [[6] x 23]}, ...]}
// Rotations are stored in the 6-dof encoding; serialization round-trips
// doubles exactly, so save/load is lossless and reruns are byte-identical.
PoseSequence load_motion(const std::string& path);
void save_motion(const PoseSequence& seq, const std::string& path);

}  // namespace mtk
