#pragma once

#include <array>
#include <string>
#include <vector>

#include "motiontk/rotmath.hpp"

namespace mtk {

// One bone segment.  The joint connecting it to its parent sits at `offset`
// in the parent's frame; mass properties are expressed in the segment's own
// frame with the joint at the origin.
struct Joint {
  std::string name;
  int parent = -1;                       // -1 only for the root
  Vec3 offset = Vec3::Zero();            // rest position in parent frame [m]
  double mass = 0.0;                     // [kg]
  Vec3 com = Vec3::Zero();               // center of mass, body frame [m]
  std::array<double, 6> inertia{};       // xx, yy, zz, xy, xz, yz about com
};

struct Skeleton {
  std::string name = "humanoid24";
  std::vector<Joint> joints;
  Vec3 up_axis = Vec3(0, 1, 0);

  double total_mass() const;
  // Throws std::invalid_argument on structural problems: joints not in
  // topological order, root not at index 0, non-positive masses, bad sizes.
  void validate() const;

  // Built-in 24-joint humanoid: pelvis root, two 4-segment legs, 4-segment
  // spine/head chain, two 4-segment arms.  Offsets are millimetre-rounded
  // segment lengths for a ~1.7 m adult; masses follow standard anthropometric
  // segment fractions scaled to 70 kg; inertia comes from a solid-box
  // approximation of each segment.
  static Skeleton default_humanoid();
};

// Fixed joint indexing of the 24-joint humanoid.  The toolkit does not
// require this skeleton, but the frame encoding below assumes 24 joints with
// these four end-effector leaves.
inline constexpr int kNumJoints = 24;
inline constexpr std::array<int, 4> kLeafJoints = {10, 11, 22, 23};

// The 19 non-root, non-leaf joints carried by the learned representation,
// ascending.
const std::array<int, 19>& encoded_joints();
bool is_leaf_joint(int j);

Skeleton load_skeleton(const std::string& path);
void save_skeleton(const Skeleton& s, const std::string& path);

}  // namespace mtk
