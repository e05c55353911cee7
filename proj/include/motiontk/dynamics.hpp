#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "motiontk/motion.hpp"
#include "motiontk/rotmath.hpp"
#include "motiontk/skeleton.hpp"

namespace mtk {

// Articulated rigid-body tree.  The humanoid uses a floating base (3
// translational + 3 Euler rotational DoFs) and spherical joints everywhere
// else, which gives 3 + 3*24 = 75 generalized coordinates.  Revolute and
// fixed joints exist so that small fixtures (pendulums, welded markers) can
// exercise the same recursions against closed-form mechanics.
enum class JointKind { floating, spherical, revolute, fixed };

struct BodyDef {
  std::string name;
  int parent = -1;            // -1 only for body 0
  JointKind kind = JointKind::spherical;
  Vec3 offset = Vec3::Zero(); // joint origin in the parent frame
  Vec3 axis = Vec3::UnitZ();  // revolute joints only, parent frame
  double mass = 0.0;
  Vec3 com = Vec3::Zero();    // body frame
  Mat3 inertia = Mat3::Zero();// about the com, body frame
};

// Generalized state.  Translations in meters, angles in radians wrapped to
// (-pi, pi].  `gimbal_lock` records that at least one Euler extraction during
// pose conversion was degenerate, so the angles are one of many valid charts.
struct DynState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  bool gimbal_lock = false;
};

class RigidBodyModel {
 public:
  // `joint_order` maps dynamics joint index -> body index; entry 0 must be 0.
  // An empty vector means identity.  Generalized coordinates and Jacobian row
  // blocks follow dynamics order.
  RigidBodyModel(std::vector<BodyDef> bodies, Vec3 up = Vec3(0, 1, 0),
                 std::vector<int> joint_order = {});

  static RigidBodyModel from_skeleton(const Skeleton& skel);

  int dof() const { return dof_; }
  int num_bodies() const { return int(bodies_.size()); }
  const BodyDef& body(int b) const { return bodies_[b]; }
  int dof_offset(int body) const { return dof_offset_[body]; }
  int dof_count(int body) const;
  int dyn_to_body(int d) const { return order_[d]; }
  int body_to_dyn(int b) const { return inv_order_[b]; }
  double total_mass() const { return total_mass_; }

  const Vec3& up() const { return up_; }
  const Vec3& gravity() const { return gravity_; }
  void set_gravity(const Vec3& g) { gravity_ = g; }

  // World-frame kinematics of every body: joint origin p and its velocity v,
  // orientation R, angular velocity w, and the same for the center of mass.
  struct KinState {
    std::vector<Vec3> p, v;
    std::vector<Mat3> R;
    std::vector<Vec3> w;
    std::vector<Vec3> com, vcom;
  };
  KinState kinematics(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const;

  // Joint-space inertia via composite rigid bodies; symmetric positive
  // definite.
  Eigen::MatrixXd mass_matrix(const Eigen::VectorXd& q) const;

  // Gravity + Coriolis/centrifugal vector: h = inverse_dynamics(q, qd, 0).
  Eigen::VectorXd nonlinear_effects(const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& qd) const;

  // Recursive Newton-Euler: generalized forces realizing qdd, so that
  // inverse_dynamics(q, qd, qdd) = M(q) qdd + h(q, qd).
  Eigen::VectorXd inverse_dynamics(const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& qd,
                                   const Eigen::VectorXd& qdd) const;

  // Stacked 3 x dof positional Jacobians of every non-root joint origin,
  // ordered by dynamics joint index: pdot = J qd.
  Eigen::MatrixXd joint_jacobians(const Eigen::VectorXd& q) const;

  // Bias accelerations of the same points (pddot when qdd = 0), from a
  // velocity-product forward pass rather than differentiating J.
  Eigen::VectorXd jdot_qdot(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qd) const;

  double kinetic_energy(const Eigen::VectorXd& q,
                        const Eigen::VectorXd& qd) const;
  double potential_energy(const Eigen::VectorXd& q) const;

  // Humanoid state conversion.  Velocities are wrapped finite differences
  // scaled by fps; pass pose_prev = pose_t for a zero-velocity state.
  DynState pose_to_state(const Pose& pose_t, const Pose& pose_prev,
                         double fps) const;
  Pose state_to_pose(const DynState& state) const;

 private:
  struct BodyKin;  // per-body frame, velocity, acceleration, axes
  void forward(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
               const Eigen::VectorXd* qdd, std::vector<BodyKin>& out) const;
  Eigen::VectorXd rnea(const std::vector<BodyKin>& kin, bool with_gravity) const;

  std::vector<BodyDef> bodies_;
  std::vector<int> order_;       // dynamics joint index -> body index
  std::vector<int> inv_order_;   // body index -> dynamics joint index
  std::vector<int> dof_offset_;  // per body, into q
  std::vector<std::vector<int>> children_;
  int dof_ = 0;
  double total_mass_ = 0.0;
  Vec3 up_;
  Vec3 gravity_;
};

}  // namespace mtk
