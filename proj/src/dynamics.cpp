#include "motiontk/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace mtk {

namespace {

Mat3 inertia_from_params(const std::array<double, 6>& p) {
  Mat3 I;
  // stored as xx, yy, zz, xy, xz, yz
  I << p[0], p[3], p[4],
       p[3], p[1], p[5],
       p[4], p[5], p[2];
  return I;
}

int kind_dofs(JointKind k) {
  switch (k) {
    case JointKind::floating: return 6;
    case JointKind::spherical: return 3;
    case JointKind::revolute: return 1;
    case JointKind::fixed: return 0;
  }
  return 0;
}

}  // namespace

struct RigidBodyModel::BodyKin {
  Vec3 p = Vec3::Zero(), v = Vec3::Zero(), a = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 w = Vec3::Zero(), alpha = Vec3::Zero();
  Vec3 com = Vec3::Zero(), vcom = Vec3::Zero(), acom = Vec3::Zero();
  Mat3 Iw = Mat3::Zero();
  int naxes = 0;
  Vec3 axes[3];  // world direction of each rotational dof
};

RigidBodyModel::RigidBodyModel(std::vector<BodyDef> bodies, Vec3 up,
                               std::vector<int> joint_order)
    : bodies_(std::move(bodies)), order_(std::move(joint_order)) {
  const int nb = int(bodies_.size());
  if (nb == 0) throw std::invalid_argument("model: no bodies");
  if (bodies_[0].parent != -1) {
    throw std::invalid_argument("model: body 0 must be the root");
  }
  for (int b = 0; b < nb; ++b) {
    BodyDef& def = bodies_[b];
    if (b > 0 && (def.parent < 0 || def.parent >= b)) {
      throw std::invalid_argument("model: parents must precede children");
    }
    if (def.kind == JointKind::floating && b != 0) {
      throw std::invalid_argument("model: only the root may float");
    }
    if (def.mass < 0.0) throw std::invalid_argument("model: negative mass");
    if (def.kind == JointKind::revolute) {
      const double n = def.axis.norm();
      if (n < 1e-12) throw std::invalid_argument("model: zero revolute axis");
      def.axis /= n;
    }
    total_mass_ += def.mass;
  }

  if (order_.empty()) {
    order_.resize(nb);
    for (int i = 0; i < nb; ++i) order_[i] = i;
  }
  if (int(order_.size()) != nb || order_[0] != 0) {
    throw std::invalid_argument("model: joint order must be a permutation fixing 0");
  }
  inv_order_.assign(nb, -1);
  for (int d = 0; d < nb; ++d) {
    const int b = order_[d];
    if (b < 0 || b >= nb || inv_order_[b] != -1) {
      throw std::invalid_argument("model: joint order must be a permutation fixing 0");
    }
    inv_order_[b] = d;
  }

  dof_offset_.assign(nb, 0);
  for (int d = 0; d < nb; ++d) {
    dof_offset_[order_[d]] = dof_;
    dof_ += kind_dofs(bodies_[order_[d]].kind);
  }

  children_.resize(nb);
  for (int b = 1; b < nb; ++b) children_[bodies_[b].parent].push_back(b);

  const double n = up.norm();
  if (n < 1e-12) throw std::invalid_argument("model: zero up axis");
  up_ = up / n;
  gravity_ = -9.81 * up_;
}

int RigidBodyModel::dof_count(int body) const {
  return kind_dofs(bodies_[body].kind);
}

RigidBodyModel RigidBodyModel::from_skeleton(const Skeleton& skel) {
  skel.validate();
  std::vector<BodyDef> bodies;
  bodies.reserve(skel.joints.size());
  for (std::size_t j = 0; j < skel.joints.size(); ++j) {
    const Joint& src = skel.joints[j];
    BodyDef def;
    def.name = src.name;
    def.parent = src.parent;
    def.kind = j == 0 ? JointKind::floating : JointKind::spherical;
    def.offset = src.offset;
    def.mass = src.mass;
    def.com = src.com;
    def.inertia = inertia_from_params(src.inertia);
    bodies.push_back(def);
  }
  return RigidBodyModel(std::move(bodies), skel.up_axis);
}

void RigidBodyModel::forward(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                             const Eigen::VectorXd* qdd,
                             std::vector<BodyKin>& out) const {
  const int nb = num_bodies();
  out.assign(nb, BodyKin{});
  for (int b = 0; b < nb; ++b) {
    const BodyDef& def = bodies_[b];
    BodyKin& k = out[b];
    const BodyKin parent_of_root{};
    const BodyKin& par = def.parent >= 0 ? out[def.parent] : parent_of_root;
    const int off = dof_offset_[b];

    // Joint placement relative to the parent frame.
    if (def.kind == JointKind::floating) {
      k.p = def.offset + q.segment<3>(off);
      k.v = qd.segment<3>(off);
      if (qdd) k.a = qdd->segment<3>(off);
    } else {
      const Vec3 r = par.R * def.offset;
      k.p = par.p + r;
      k.v = par.v + par.w.cross(r);
      k.a = par.a + par.alpha.cross(r) + par.w.cross(par.w.cross(r));
    }

    // Joint rotation: local rotation Rl, relative angular velocity u and its
    // frame-derivative bias udot (both in the parent frame), rotation axes.
    Mat3 Rl = Mat3::Identity();
    Vec3 u = Vec3::Zero(), udot = Vec3::Zero();
    Vec3 local_axes[3];
    k.naxes = 0;
    if (def.kind == JointKind::floating || def.kind == JointKind::spherical) {
      const int roff = def.kind == JointKind::floating ? off + 3 : off;
      const Vec3 th = q.segment<3>(roff);
      const Vec3 thd = qd.segment<3>(roff);
      const Mat3 Rx = Eigen::AngleAxisd(th[0], Vec3::UnitX()).toRotationMatrix();
      const Mat3 Ry = Eigen::AngleAxisd(th[1], Vec3::UnitY()).toRotationMatrix();
      local_axes[0] = Vec3::UnitX();
      local_axes[1] = Rx * Vec3::UnitY();
      local_axes[2] = Rx * (Ry * Vec3::UnitZ());
      Rl = euler_xyz_to_rot(th);
      u = thd[0] * local_axes[0] + thd[1] * local_axes[1] + thd[2] * local_axes[2];
      // The second axis turns with the first angle, the third with both.
      udot = thd[1] * (thd[0] * local_axes[0]).cross(local_axes[1]) +
             thd[2] * (thd[0] * local_axes[0] + thd[1] * local_axes[1])
                          .cross(local_axes[2]);
      if (qdd) {
        const Vec3 thdd = qdd->segment<3>(roff);
        udot += thdd[0] * local_axes[0] + thdd[1] * local_axes[1] +
                thdd[2] * local_axes[2];
      }
      k.naxes = 3;
    } else if (def.kind == JointKind::revolute) {
      Rl = Eigen::AngleAxisd(q[off], def.axis).toRotationMatrix();
      u = qd[off] * def.axis;
      if (qdd) udot = (*qdd)[off] * def.axis;
      local_axes[0] = def.axis;
      k.naxes = 1;
    }

    k.R = par.R * Rl;
    const Vec3 wu = par.R * u;
    k.w = par.w + wu;
    k.alpha = par.alpha + par.w.cross(wu) + par.R * udot;
    for (int i = 0; i < k.naxes; ++i) k.axes[i] = par.R * local_axes[i];

    const Vec3 rc = k.R * def.com;
    k.com = k.p + rc;
    k.vcom = k.v + k.w.cross(rc);
    k.acom = k.a + k.alpha.cross(rc) + k.w.cross(k.w.cross(rc));
    k.Iw = k.R * def.inertia * k.R.transpose();
  }
}

Eigen::VectorXd RigidBodyModel::rnea(const std::vector<BodyKin>& kin,
                                     bool with_gravity) const {
  const int nb = num_bodies();
  std::vector<Vec3> f(nb, Vec3::Zero()), n(nb, Vec3::Zero());
  for (int b = nb - 1; b >= 0; --b) {
    const BodyDef& def = bodies_[b];
    const BodyKin& k = kin[b];
    Vec3 F = def.mass * k.acom;
    if (with_gravity) F -= def.mass * gravity_;
    const Vec3 N = k.Iw * k.alpha + k.w.cross(k.Iw * k.w);
    f[b] += F;
    n[b] += N + (k.com - k.p).cross(F);
    if (def.parent >= 0) {
      f[def.parent] += f[b];
      n[def.parent] += n[b] + (k.p - kin[def.parent].p).cross(f[b]);
    }
  }

  Eigen::VectorXd tau = Eigen::VectorXd::Zero(dof_);
  for (int b = 0; b < nb; ++b) {
    const int off = dof_offset_[b];
    const BodyKin& k = kin[b];
    if (bodies_[b].kind == JointKind::floating) {
      tau.segment<3>(off) = f[b];
      for (int i = 0; i < 3; ++i) tau[off + 3 + i] = k.axes[i].dot(n[b]);
    } else {
      for (int i = 0; i < k.naxes; ++i) tau[off + i] = k.axes[i].dot(n[b]);
    }
  }
  return tau;
}

Eigen::VectorXd RigidBodyModel::inverse_dynamics(const Eigen::VectorXd& q,
                                                 const Eigen::VectorXd& qd,
                                                 const Eigen::VectorXd& qdd) const {
  std::vector<BodyKin> kin;
  forward(q, qd, &qdd, kin);
  return rnea(kin, true);
}

Eigen::VectorXd RigidBodyModel::nonlinear_effects(const Eigen::VectorXd& q,
                                                  const Eigen::VectorXd& qd) const {
  std::vector<BodyKin> kin;
  forward(q, qd, nullptr, kin);
  return rnea(kin, true);
}

Eigen::MatrixXd RigidBodyModel::mass_matrix(const Eigen::VectorXd& q) const {
  const int nb = num_bodies();
  std::vector<BodyKin> kin;
  forward(q, Eigen::VectorXd::Zero(dof_), nullptr, kin);

  // Composite (subtree) mass, com, and inertia about the subtree com.
  std::vector<double> cmass(nb);
  std::vector<Vec3> ccom(nb);
  std::vector<Mat3> cI(nb);
  for (int b = 0; b < nb; ++b) {
    cmass[b] = bodies_[b].mass;
    ccom[b] = bodies_[b].mass > 0.0 ? kin[b].com : kin[b].p;
    cI[b] = kin[b].Iw;
  }
  auto shift = [](const Mat3& I, double m, const Vec3& d) -> Mat3 {
    return I + m * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  };
  for (int b = nb - 1; b >= 1; --b) {
    const int p = bodies_[b].parent;
    const double m = cmass[p] + cmass[b];
    const Vec3 c = m > 0.0 ? Vec3((cmass[p] * ccom[p] + cmass[b] * ccom[b]) / m)
                           : ccom[p];
    cI[p] = shift(cI[p], cmass[p], ccom[p] - c) + shift(cI[b], cmass[b], ccom[b] - c);
    cmass[p] = m;
    ccom[p] = c;
  }

  // Unit-acceleration wrench of every dof against its subtree composite, then
  // project onto each ancestor dof.  Force f and moment n_0 about the origin.
  struct DofWrench {
    Vec3 f, n0;
  };
  std::vector<DofWrench> wr(dof_);
  auto fill_rot = [&](int dof, const Vec3& axis, const Vec3& pt, int b) {
    const Vec3 f = cmass[b] * axis.cross(ccom[b] - pt);
    wr[dof] = {f, cI[b] * axis + ccom[b].cross(f)};
  };
  for (int b = 0; b < nb; ++b) {
    const int off = dof_offset_[b];
    const BodyKin& k = kin[b];
    if (bodies_[b].kind == JointKind::floating) {
      for (int i = 0; i < 3; ++i) {
        const Vec3 f = cmass[b] * Vec3::Unit(i);
        wr[off + i] = {f, ccom[b].cross(f)};
      }
      for (int i = 0; i < 3; ++i) fill_rot(off + 3 + i, k.axes[i], k.p, b);
    } else {
      for (int i = 0; i < k.naxes; ++i) fill_rot(off + i, k.axes[i], k.p, b);
    }
  }

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dof_, dof_);
  auto project = [&](const DofWrench& w, int b_i, bool rot,
                     const Vec3& axis) -> double {
    if (rot) return axis.dot(w.n0 - kin[b_i].p.cross(w.f));
    return axis.dot(w.f);
  };
  for (int bj = 0; bj < nb; ++bj) {
    const int joff = dof_offset_[bj];
    for (int jd = 0; jd < kind_dofs(bodies_[bj].kind); ++jd) {
      const int j = joff + jd;
      for (int bi = bj; bi >= 0; bi = bodies_[bi].parent) {
        const int ioff = dof_offset_[bi];
        for (int id = 0; id < kind_dofs(bodies_[bi].kind); ++id) {
          const int i = ioff + id;
          if (bi == bj && i > j) continue;  // same joint: fill lower once
          bool rot;
          Vec3 axis;
          if (bodies_[bi].kind == JointKind::floating) {
            rot = id >= 3;
            axis = rot ? kin[bi].axes[id - 3] : Vec3(Vec3::Unit(id));
          } else {
            rot = true;
            axis = kin[bi].axes[id];
          }
          const double v = project(wr[j], bi, rot, axis);
          M(i, j) = v;
          M(j, i) = v;
        }
      }
    }
  }
  return M;
}

Eigen::MatrixXd RigidBodyModel::joint_jacobians(const Eigen::VectorXd& q) const {
  const int nb = num_bodies();
  std::vector<BodyKin> kin;
  forward(q, Eigen::VectorXd::Zero(dof_), nullptr, kin);

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3 * (nb - 1), dof_);
  for (int d = 1; d < nb; ++d) {
    const int t = order_[d];
    const int row = 3 * (d - 1);
    const Vec3 x = kin[t].p;
    for (int b = t; b >= 0; b = bodies_[b].parent) {
      const int off = dof_offset_[b];
      const BodyKin& k = kin[b];
      int roff = off;
      if (bodies_[b].kind == JointKind::floating) {
        J.block<3, 3>(row, off).setIdentity();
        roff = off + 3;
      }
      for (int i = 0; i < k.naxes; ++i) {
        J.block<3, 1>(row, roff + i) = k.axes[i].cross(x - k.p);
      }
    }
  }
  return J;
}

Eigen::VectorXd RigidBodyModel::jdot_qdot(const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& qd) const {
  const int nb = num_bodies();
  std::vector<BodyKin> kin;
  forward(q, qd, nullptr, kin);
  Eigen::VectorXd out(3 * (nb - 1));
  for (int d = 1; d < nb; ++d) out.segment<3>(3 * (d - 1)) = kin[order_[d]].a;
  return out;
}

RigidBodyModel::KinState RigidBodyModel::kinematics(const Eigen::VectorXd& q,
                                                    const Eigen::VectorXd& qd) const {
  const int nb = num_bodies();
  std::vector<BodyKin> kin;
  forward(q, qd, nullptr, kin);
  KinState s;
  s.p.resize(nb); s.v.resize(nb); s.R.resize(nb);
  s.w.resize(nb); s.com.resize(nb); s.vcom.resize(nb);
  for (int b = 0; b < nb; ++b) {
    s.p[b] = kin[b].p;
    s.v[b] = kin[b].v;
    s.R[b] = kin[b].R;
    s.w[b] = kin[b].w;
    s.com[b] = kin[b].com;
    s.vcom[b] = kin[b].vcom;
  }
  return s;
}

double RigidBodyModel::kinetic_energy(const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& qd) const {
  std::vector<BodyKin> kin;
  forward(q, qd, nullptr, kin);
  double T = 0.0;
  for (int b = 0; b < num_bodies(); ++b) {
    T += 0.5 * bodies_[b].mass * kin[b].vcom.squaredNorm();
    T += 0.5 * kin[b].w.dot(kin[b].Iw * kin[b].w);
  }
  return T;
}

double RigidBodyModel::potential_energy(const Eigen::VectorXd& q) const {
  std::vector<BodyKin> kin;
  forward(q, Eigen::VectorXd::Zero(dof_), nullptr, kin);
  double V = 0.0;
  for (int b = 0; b < num_bodies(); ++b) {
    V -= bodies_[b].mass * gravity_.dot(kin[b].com);
  }
  return V;
}

DynState RigidBodyModel::pose_to_state(const Pose& pose_t, const Pose& pose_prev,
                                       double fps) const {
  if (num_bodies() != kNumJoints || bodies_[0].kind != JointKind::floating) {
    throw std::invalid_argument("pose conversion requires the humanoid model");
  }
  DynState st;
  auto encode = [&](const Pose& pose, Eigen::VectorXd& q) {
    q.resize(dof_);
    q.segment<3>(0) = pose.p_root;
    const EulerAngles root = rot_to_euler_xyz(pose.r_root);
    q.segment<3>(3) = root.rpy;
    st.gimbal_lock = st.gimbal_lock || root.gimbal;
    for (int b = 1; b < num_bodies(); ++b) {
      const EulerAngles e = rot_to_euler_xyz(pose.r_joint[b - 1]);
      q.segment<3>(dof_offset_[b]) = e.rpy;
      st.gimbal_lock = st.gimbal_lock || e.gimbal;
    }
  };
  Eigen::VectorXd q_prev;
  encode(pose_t, st.q);
  encode(pose_prev, q_prev);
  st.qd.resize(dof_);
  for (int i = 0; i < dof_; ++i) {
    const double d = st.q[i] - q_prev[i];
    st.qd[i] = (i < 3 ? d : wrap_angle(d)) * fps;
  }
  return st;
}

Pose RigidBodyModel::state_to_pose(const DynState& state) const {
  if (num_bodies() != kNumJoints || bodies_[0].kind != JointKind::floating) {
    throw std::invalid_argument("pose conversion requires the humanoid model");
  }
  Pose pose;
  pose.p_root = state.q.segment<3>(0);
  pose.r_root = euler_xyz_to_rot(state.q.segment<3>(3));
  for (int b = 1; b < num_bodies(); ++b) {
    pose.r_joint[b - 1] = euler_xyz_to_rot(state.q.segment<3>(dof_offset_[b]));
  }
  return pose;
}

}  // namespace mtk
