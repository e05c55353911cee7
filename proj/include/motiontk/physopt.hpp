#pragma once

#include <string>
#include <utility>
#include <vector>

#include "motiontk/dynamics.hpp"
#include "motiontk/qp.hpp"

namespace mtk {

// Per-frame physical optimization: track a reference motion with a dual PD
// controller while staying on the equation-of-motion manifold, distributing
// the required effort between joint torques and external reaction forces at
// the non-root joints.  No contact labels anywhere: the reaction forces are
// shaped only by the root-distance weighting, the stationary-support power
// bound and the friction cone.

struct PdGains {
  double k_p_rot = 1800.0;  // 1/s^2 on Euler tracking error
  double k_d_rot = 60.0;    // 1/s
  double k_p_pos = 2400.0;  // 1/s^2 on joint position tracking
  double k_d_pos = 60.0;    // 1/s
};

struct PhysParams {
  double k_lambda = 0.02;   // reaction-force penalty, scaled by 1/d_i^2
  double k_root = 0.05;     // torque penalty on the six root coordinates
  double k_joint = 0.02;    // torque penalty on articulated coordinates
  double delta = 10.0;      // stationary support: |p_i' lambda_i| <= delta [W]
  double mu = 0.6;          // friction coefficient
  double dt = 1.0 / 60.0;   // integration step
  double d_min = 0.01;      // floor on the root-to-joint distance [m]
  double ridge = 1e-9;      // curvature floor on the decision vector
};

// Desired accelerations of the dual PD controller.  Rotation differences are
// wrapped per component; `th` vectors cover the 72 rotational coordinates,
// `pdot` vectors the 69 stacked joint-point velocities.
Eigen::VectorXd desired_rot_acc(const PdGains& gains, const Eigen::VectorXd& th_ref,
                                const Eigen::VectorXd& th_cur,
                                const Eigen::VectorXd& thd_cur);
Eigen::VectorXd desired_pos_acc(const PdGains& gains, const Eigen::VectorXd& pdot_ref,
                                const Eigen::VectorXd& pdot_cur, double dt);

// Builds the per-frame QP over x = [qdd(75); lambda(69); tau(75)]:
// tracking + regularization objective, equation of motion as equality, and
// per-joint stationary-support and friction rows (6 each, 138 total).
QpProblem assemble(const RigidBodyModel& model, const DynState& state,
                   const Eigen::VectorXd& th_ref, const Eigen::VectorXd& pdot_ref,
                   const PhysParams& params, const PdGains& gains);

// Solver settings tuned for the per-frame problems: the penalty loop stops
// at 1e-6 and the polish step then sharpens the active set to machine
// precision, which is both faster and more reliable than driving the penalty
// loop to 1e-8 at newton scale.
QpSettings phys_qp_settings();

struct OptFrame {
  Eigen::VectorXd qdd;     // 75
  Eigen::VectorXd lambda;  // 69, newtons
  Eigen::VectorXd tau;     // 75
  QpStatus status = QpStatus::optimal;
  QpResiduals kkt;
  double eom_residual = 0.0;  // ||M qdd - tau - J' lambda + h||_inf
  bool fallback = false;      // solver failed; frame copied from the reference
  bool gimbal = false;        // reference Euler extraction was degenerate
};

struct OptTrace {
  std::vector<OptFrame> frames;
  int fallback_count() const;
};

// Stateful per-sequence optimizer: reuses the QP solver's symbolic
// factorization and warm-starts each frame from the previous solution.
class PhysOptimizer {
 public:
  PhysOptimizer(const RigidBodyModel& model, PhysParams params = PhysParams(),
                PdGains gains = PdGains(), QpSettings qp = phys_qp_settings());

  // Advances `sim` one step toward the next reference pose (solve QP,
  // semi-implicit Euler, wrap angles).  On solver failure the state snaps to
  // the reference kinematically and the frame is flagged.
  OptFrame step(DynState& sim, const Pose& ref_next);

  const RigidBodyModel& model() const { return model_; }

 private:
  const RigidBodyModel& model_;
  PhysParams params_;
  PdGains gains_;
  QpSettings qp_;
  QpSolver solver_;
  Eigen::VectorXd warm_x_, warm_y_, warm_z_;
};

// One-shot convenience wrapper around PhysOptimizer::step.
OptFrame step(const RigidBodyModel& model, DynState& sim, const Pose& ref_next,
              const PhysParams& params, const PdGains& gains);

// Optimizes a whole sequence.  Frame 0 is copied from the reference; frames
// 1..T-1 are simulated.  The integration step follows the sequence frame
// rate.  The trace has one entry per output frame (entry 0 is a placeholder).
std::pair<PoseSequence, OptTrace> optimize_sequence(
    const RigidBodyModel& model, const PoseSequence& ref,
    const PhysParams& params = PhysParams(), const PdGains& gains = PdGains(),
    const QpSettings& qp = phys_qp_settings());

// Trace exports: "frame,joint,fx,fy,fz" and "frame,dof,tau".
void save_forces_csv(const OptTrace& trace, const std::string& path);
void save_torques_csv(const OptTrace& trace, const std::string& path);

}  // namespace mtk
