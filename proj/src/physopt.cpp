#include "motiontk/physopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mtk {

namespace {

constexpr double kPi = std::numbers::pi;

// Composition axes of the intrinsic X-Y-Z chart, expressed in the parent
// frame: w_parent = E(th) * thd.
Mat3 euler_rate_axes(const Vec3& th) {
  const Mat3 rx = axis_angle(Vec3::UnitX(), th[0]);
  const Mat3 ry = axis_angle(Vec3::UnitY(), th[1]);
  Mat3 e;
  e.col(0) = Vec3::UnitX();
  e.col(1) = rx * Vec3::UnitY();
  e.col(2) = rx * (ry * Vec3::UnitZ());
  return e;
}

// The X-Y-Z chart covers each rotation twice: (a, b, c) and
// (a+pi, pi-b, c+pi) describe the same matrix.  Tracking errors are wrapped
// per component, so the simulated state must sit in the chart closest to the
// reference or the controller would fight a representation artifact.  On a
// chart switch the angle rates are remapped through the angular velocity.
void align_triple(Eigen::Ref<Eigen::Vector3d> th, Eigen::Ref<Eigen::Vector3d> thd,
                  const Vec3& ref) {
  Vec3 cur(wrap_angle(th[0]), wrap_angle(th[1]), wrap_angle(th[2]));
  const Vec3 alt(wrap_angle(cur[0] + kPi), wrap_angle(kPi - cur[1]),
                 wrap_angle(cur[2] + kPi));
  auto dist = [&ref](const Vec3& a) {
    double m = 0.0;
    for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(wrap_angle(a[i] - ref[i])));
    return m;
  };
  if (dist(alt) < dist(cur)) {
    const Vec3 w = euler_rate_axes(cur) * Vec3(thd);
    const Eigen::FullPivLU<Mat3> lu(euler_rate_axes(alt));
    if (lu.isInvertible()) {
      thd = lu.solve(w);
      cur = alt;
    }
  }
  th = cur;
}

void align_rotation_charts(const RigidBodyModel& model, Eigen::VectorXd& q,
                           Eigen::VectorXd& qd, const Eigen::VectorXd& q_ref) {
  for (int b = 0; b < model.num_bodies(); ++b) {
    const int off = model.dof_offset(b);
    const int nd = model.dof_count(b);
    if (b == 0 && nd == 6) {
      align_triple(q.segment<3>(off + 3), qd.segment<3>(off + 3),
                   q_ref.segment<3>(off + 3));
    } else if (nd == 3) {
      align_triple(q.segment<3>(off), qd.segment<3>(off), q_ref.segment<3>(off));
    }
  }
}

// Orthonormal tangent pair completing the up axis, used for the friction rows.
void tangent_basis(const Vec3& up, Vec3& t1, Vec3& t2) {
  t1 = up.cross(Vec3::UnitZ());
  if (t1.norm() < 1e-6) t1 = up.cross(Vec3::UnitX());
  t1.normalize();
  t2 = up.cross(t1);
}

}  // namespace

QpSettings phys_qp_settings() {
  QpSettings s;
  s.tol = 1e-6;
  s.polish = true;
  return s;
}

Eigen::VectorXd desired_rot_acc(const PdGains& gains, const Eigen::VectorXd& th_ref,
                                const Eigen::VectorXd& th_cur,
                                const Eigen::VectorXd& thd_cur) {
  if (th_ref.size() != th_cur.size() || th_ref.size() != thd_cur.size())
    throw std::invalid_argument("desired_rot_acc: size mismatch");
  Eigen::VectorXd out(th_ref.size());
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] = gains.k_p_rot * wrap_angle(th_ref[i] - th_cur[i]) -
             gains.k_d_rot * thd_cur[i];
  return out;
}

Eigen::VectorXd desired_pos_acc(const PdGains& gains, const Eigen::VectorXd& pdot_ref,
                                const Eigen::VectorXd& pdot_cur, double dt) {
  if (pdot_ref.size() != pdot_cur.size())
    throw std::invalid_argument("desired_pos_acc: size mismatch");
  return gains.k_p_pos * dt * pdot_ref - gains.k_d_pos * pdot_cur;
}

QpProblem assemble(const RigidBodyModel& model, const DynState& state,
                   const Eigen::VectorXd& th_ref, const Eigen::VectorXd& pdot_ref,
                   const PhysParams& params, const PdGains& gains) {
  const int dof = model.dof();
  const int npts = model.num_bodies() - 1;
  const int nl = 3 * npts;
  const int n = dof + nl + dof;
  if (state.q.size() != dof || state.qd.size() != dof)
    throw std::invalid_argument("assemble: state size mismatch");
  if (th_ref.size() != dof - 3)
    throw std::invalid_argument("assemble: th_ref must cover the rotational dofs");
  if (pdot_ref.size() != nl)
    throw std::invalid_argument("assemble: pdot_ref must have 3 rows per joint");

  const Eigen::MatrixXd M = model.mass_matrix(state.q);
  const Eigen::VectorXd bias = model.nonlinear_effects(state.q, state.qd);
  const Eigen::MatrixXd J = model.joint_jacobians(state.q);
  const Eigen::VectorXd jdqd = model.jdot_qdot(state.q, state.qd);
  const RigidBodyModel::KinState kin = model.kinematics(state.q, state.qd);

  Eigen::VectorXd pdot_cur(nl);
  for (int d = 1; d <= npts; ++d)
    pdot_cur.segment<3>(3 * (d - 1)) = kin.v[model.dyn_to_body(d)];

  const Eigen::VectorXd thdd_des =
      desired_rot_acc(gains, th_ref, state.q.tail(dof - 3), state.qd.tail(dof - 3));
  const Eigen::VectorXd pdd_des =
      desired_pos_acc(gains, pdot_ref, pdot_cur, params.dt);

  QpProblem p;
  p.n = n;
  p.c = Eigen::VectorXd::Zero(n);

  // Tracking terms.  ||qdd_rot - thdd_des||^2 + ||J qdd + (jdqd - pdd_des)||^2
  // expands into the qdd block of P and c; the regularizers are diagonal.
  Eigen::MatrixXd pqq = 2.0 * (J.transpose() * J);
  for (int i = 3; i < dof; ++i) pqq(i, i) += 2.0;
  const Eigen::VectorXd resid = jdqd - pdd_des;
  p.c.head(dof) = 2.0 * (J.transpose() * resid);
  p.c.segment(3, dof - 3) -= 2.0 * thdd_des;

  std::vector<Eigen::Triplet<double>> tp;
  tp.reserve(size_t(dof) * dof + nl + dof);
  // Exact zeros are pushed too: the sparsity pattern must not depend on the
  // state, so the solver's symbolic factorization survives across frames.
  for (int i = 0; i < dof; ++i)
    for (int j = 0; j < dof; ++j)
      tp.emplace_back(i, j, pqq(i, j) + (i == j ? 2.0 * params.ridge : 0.0));
  for (int d = 1; d <= npts; ++d) {
    const int b = model.dyn_to_body(d);
    const double di = std::max((kin.p[b] - kin.p[0]).norm(), params.d_min);
    const double w = 2.0 * params.k_lambda / (di * di) + 2.0 * params.ridge;
    for (int k = 0; k < 3; ++k) {
      const int idx = dof + 3 * (d - 1) + k;
      tp.emplace_back(idx, idx, w);
    }
  }
  for (int i = 0; i < dof; ++i) {
    const int idx = dof + nl + i;
    const double w = (i < 6 ? 2.0 * params.k_root : 2.0 * params.k_joint);
    tp.emplace_back(idx, idx, w + 2.0 * params.ridge);
  }
  p.P.resize(n, n);
  p.P.setFromTriplets(tp.begin(), tp.end());

  // Equation of motion: M qdd - J' lambda - tau = -bias.
  tp.clear();
  tp.reserve(size_t(dof) * dof + size_t(dof) * nl + dof);
  for (int i = 0; i < dof; ++i) {
    for (int j = 0; j < dof; ++j) tp.emplace_back(i, j, M(i, j));
    for (int j = 0; j < nl; ++j) tp.emplace_back(i, dof + j, -J(j, i));
    tp.emplace_back(i, dof + nl + i, -1.0);
  }
  p.A.resize(dof, n);
  p.A.setFromTriplets(tp.begin(), tp.end());
  p.b = -bias;

  // Per joint: |p_i' lambda_i| <= delta (stationary support) and a pyramid
  // friction cone about the up axis, 6 rows each.
  Vec3 t1, t2;
  tangent_basis(model.up(), t1, t2);
  const Vec3 up = model.up();
  tp.clear();
  tp.reserve(size_t(npts) * 18);
  Eigen::VectorXd hin(6 * npts);
  for (int d = 1; d <= npts; ++d) {
    const int b = model.dyn_to_body(d);
    const int row = 6 * (d - 1);
    const int col = dof + 3 * (d - 1);
    const Vec3 pv = kin.v[b];
    const Vec3 f1 = t1 - params.mu * up;
    const Vec3 f2 = t2 - params.mu * up;
    for (int k = 0; k < 3; ++k) {
      tp.emplace_back(row + 0, col + k, pv[k]);
      tp.emplace_back(row + 1, col + k, -pv[k]);
      tp.emplace_back(row + 2, col + k, f1[k]);
      tp.emplace_back(row + 3, col + k, -t1[k] - params.mu * up[k]);
      tp.emplace_back(row + 4, col + k, f2[k]);
      tp.emplace_back(row + 5, col + k, -t2[k] - params.mu * up[k]);
    }
    hin[row + 0] = params.delta;
    hin[row + 1] = params.delta;
    hin.segment<4>(row + 2).setZero();
  }
  p.G.resize(6 * npts, n);
  p.G.setFromTriplets(tp.begin(), tp.end());
  p.h = hin;
  return p;
}

int OptTrace::fallback_count() const {
  int n = 0;
  for (const OptFrame& f : frames) n += f.fallback ? 1 : 0;
  return n;
}

PhysOptimizer::PhysOptimizer(const RigidBodyModel& model, PhysParams params,
                             PdGains gains, QpSettings qp)
    : model_(model), params_(params), gains_(gains), qp_(qp) {}

OptFrame PhysOptimizer::step(DynState& sim, const Pose& ref_next) {
  const int dof = model_.dof();
  const int npts = model_.num_bodies() - 1;
  const double dt = params_.dt;

  const DynState ref = model_.pose_to_state(ref_next, ref_next, 1.0 / dt);
  OptFrame out;
  out.gimbal = ref.gimbal_lock;

  align_rotation_charts(model_, sim.q, sim.qd, ref.q);

  // Gap-closing reference velocity: the speed that would reach the next
  // reference joint position within one step.
  Eigen::VectorXd pdot_ref(3 * npts);
  {
    const RigidBodyModel::KinState kin_cur =
        model_.kinematics(sim.q, Eigen::VectorXd::Zero(dof));
    const RigidBodyModel::KinState kin_ref =
        model_.kinematics(ref.q, Eigen::VectorXd::Zero(dof));
    for (int d = 1; d <= npts; ++d) {
      const int b = model_.dyn_to_body(d);
      pdot_ref.segment<3>(3 * (d - 1)) = (kin_ref.p[b] - kin_cur.p[b]) / dt;
    }
  }

  const QpProblem qp = assemble(model_, sim, ref.q.tail(dof - 3), pdot_ref,
                                params_, gains_);
  QpSettings s = qp_;
  if (warm_x_.size() == qp.n) {
    s.warm_x = warm_x_;
    s.warm_y = warm_y_;
    s.warm_z = warm_z_;
  }
  const QpSolution sol = solver_.solve(qp, s);
  out.status = sol.status;
  out.kkt = sol.residuals;

  if (sol.status == QpStatus::optimal) {
    out.qdd = sol.x.head(dof);
    out.lambda = sol.x.segment(dof, 3 * npts);
    out.tau = sol.x.tail(dof);
    out.eom_residual = (qp.A * sol.x - qp.b).lpNorm<Eigen::Infinity>();
    warm_x_ = sol.x;
    warm_y_ = sol.y;
    warm_z_ = sol.z;
    sim.qd += out.qdd * dt;
    sim.q += sim.qd * dt;
    for (int i = 3; i < dof; ++i) sim.q[i] = wrap_angle(sim.q[i]);
  } else {
    // Kinematic fallback: snap to the reference and carry the implied step
    // velocity so the next frame starts from something consistent.
    out.fallback = true;
    out.qdd = Eigen::VectorXd::Zero(dof);
    out.lambda = Eigen::VectorXd::Zero(3 * npts);
    out.tau = Eigen::VectorXd::Zero(dof);
    Eigen::VectorXd qd_kin = (ref.q - sim.q) / dt;
    for (int i = 3; i < dof; ++i) qd_kin[i] = wrap_angle(ref.q[i] - sim.q[i]) / dt;
    sim.q = ref.q;
    sim.qd = qd_kin;
  }
  return out;
}

OptFrame step(const RigidBodyModel& model, DynState& sim, const Pose& ref_next,
              const PhysParams& params, const PdGains& gains) {
  PhysOptimizer opt(model, params, gains);
  return opt.step(sim, ref_next);
}

std::pair<PoseSequence, OptTrace> optimize_sequence(const RigidBodyModel& model,
                                                    const PoseSequence& ref,
                                                    const PhysParams& params,
                                                    const PdGains& gains,
                                                    const QpSettings& qp) {
  if (ref.poses.size() < 2)
    throw std::invalid_argument("optimize_sequence: need at least 2 frames");
  PhysParams local = params;
  local.dt = 1.0 / ref.fps;
  PhysOptimizer opt(model, local, gains, qp);

  // State at frame 0, moving with the velocity implied by frames 0-1.
  DynState sim = model.pose_to_state(ref.poses[0], ref.poses[0], ref.fps);
  sim.qd = model.pose_to_state(ref.poses[1], ref.poses[0], ref.fps).qd;

  const int npts = model.num_bodies() - 1;
  PoseSequence out;
  out.fps = ref.fps;
  out.skeleton = ref.skeleton;
  out.poses.reserve(ref.poses.size());
  out.poses.push_back(ref.poses[0]);

  OptTrace trace;
  trace.frames.resize(ref.poses.size());
  trace.frames[0].qdd = Eigen::VectorXd::Zero(model.dof());
  trace.frames[0].lambda = Eigen::VectorXd::Zero(3 * npts);
  trace.frames[0].tau = Eigen::VectorXd::Zero(model.dof());

  for (size_t t = 1; t < ref.poses.size(); ++t) {
    trace.frames[t] = opt.step(sim, ref.poses[t]);
    if (trace.frames[t].fallback)
      out.poses.push_back(ref.poses[t]);
    else
      out.poses.push_back(model.state_to_pose(sim));
  }
  return {std::move(out), std::move(trace)};
}

void save_forces_csv(const OptTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("forces csv: cannot write '" + path + "'");
  out << "frame,joint,fx,fy,fz\n";
  char buf[160];
  for (size_t t = 0; t < trace.frames.size(); ++t) {
    const Eigen::VectorXd& l = trace.frames[t].lambda;
    for (Eigen::Index d = 0; 3 * d + 2 < l.size(); ++d) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g,%.17g,%.17g\n", t, int(d + 1),
                    l[3 * d], l[3 * d + 1], l[3 * d + 2]);
      out << buf;
    }
  }
}

void save_torques_csv(const OptTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("torques csv: cannot write '" + path + "'");
  out << "frame,dof,tau\n";
  char buf[96];
  for (size_t t = 0; t < trace.frames.size(); ++t) {
    const Eigen::VectorXd& tau = trace.frames[t].tau;
    for (Eigen::Index i = 0; i < tau.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g\n", t, int(i), tau[i]);
      out << buf;
    }
  }
}

}  // namespace mtk
