#include "motiontk/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "motiontk/rng.hpp"

namespace mtk {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// Joint indices of the default humanoid, used by the generators.
enum : int {
  kLHip = 1, kRHip = 2, kSpine1 = 3, kLKnee = 4, kRKnee = 5, kSpine2 = 6,
  kLAnkle = 7, kRAnkle = 8, kSpine3 = 9, kNeck = 12, kHead = 15,
  kLShoulder = 16, kRShoulder = 17, kLElbow = 18, kRElbow = 19,
};

constexpr double kRootHeight = 0.94;   // pelvis height when standing
constexpr double kArmDown = 1.25;      // shoulder roll taking arms from T-pose down

// Intrinsic X-Y-Z angles per non-root joint plus the root transform.
struct FramePose {
  Vec3 root_pos = Vec3(0, kRootHeight, 0);
  Vec3 root_euler = Vec3::Zero();
  // Eigen vectors are not zeroed by value-initialization; fill explicitly.
  std::array<Vec3, kNumJoints - 1> euler;
  FramePose() { euler.fill(Vec3::Zero()); }
};

Pose to_pose(const FramePose& fp) {
  Pose p;
  p.p_root = fp.root_pos;
  p.r_root = euler_xyz_to_rot(fp.root_euler);
  for (int j = 1; j < kNumJoints; ++j) {
    p.r_joint[j - 1] = euler_xyz_to_rot(fp.euler[j - 1]);
  }
  for (int j : kLeafJoints) p.r_joint[j - 1] = Rot3::Identity();
  return p;
}

void set(FramePose& fp, int joint, double x, double y, double z) {
  fp.euler[joint - 1] = Vec3(x, y, z);
}

void arms_down(FramePose& fp) {
  set(fp, kLShoulder, 0.0, 0.0, -kArmDown);
  set(fp, kRShoulder, 0.0, 0.0, kArmDown);
  set(fp, kLElbow, 0.25, 0.0, 0.0);
  set(fp, kRElbow, 0.25, 0.0, 0.0);
}

// Per-sequence jitter so different seeds give distinct clips.
struct Jitter {
  double amp;    // amplitude factor, ~1 +- 5%
  double phase;  // phase shift, +- 0.1 rad
  double freq;   // frequency factor, ~1 +- 3%
  explicit Jitter(Rng& rng)
      : amp(rng.uniform(0.95, 1.05)),
        phase(rng.uniform(-0.1, 0.1)),
        freq(rng.uniform(0.97, 1.03)) {}
};

FramePose walk_frame(double t, const Jitter& jt, double& travel, double dt) {
  FramePose fp;
  const double f = 1.0 * jt.freq;
  const double ph = kTau * f * t + jt.phase;
  const double a = jt.amp;

  set(fp, kLHip, 0.45 * a * std::sin(ph), 0, 0);
  set(fp, kRHip, 0.45 * a * std::sin(ph + std::numbers::pi), 0, 0);
  set(fp, kLKnee, 0.25 * a * (1.0 - std::cos(ph)), 0, 0);
  set(fp, kRKnee, 0.25 * a * (1.0 - std::cos(ph + std::numbers::pi)), 0, 0);
  set(fp, kLAnkle, -0.15 * a * std::sin(ph), 0, 0);
  set(fp, kRAnkle, -0.15 * a * std::sin(ph + std::numbers::pi), 0, 0);
  set(fp, kSpine1, 0.03 * std::sin(2 * ph), 0, 0);
  set(fp, kSpine2, 0, 0.05 * std::sin(ph), 0);
  set(fp, kNeck, 0.02 * std::sin(2 * ph + 0.5), 0, 0);
  arms_down(fp);
  fp.euler[kLShoulder - 1][0] = -0.30 * a * std::sin(ph);
  fp.euler[kRShoulder - 1][0] = 0.30 * a * std::sin(ph);
  fp.euler[kLElbow - 1][0] = 0.25 + 0.10 * std::sin(ph + 1.5);
  fp.euler[kRElbow - 1][0] = 0.25 + 0.10 * std::sin(ph - 1.5);

  travel += 0.9 * dt;
  fp.root_pos = Vec3(0.015 * std::sin(ph + 1.57),
                     kRootHeight + 0.02 * std::sin(2 * ph), travel);
  fp.root_euler = Vec3(0.015 * std::sin(2 * ph), 0.06 * std::sin(ph),
                       0.015 * std::sin(ph + 1.0));
  return fp;
}

FramePose wave_frame(double t, const Jitter& jt) {
  FramePose fp;
  const double ph = kTau * 2.0 * jt.freq * t + jt.phase;
  arms_down(fp);
  // Right arm raised, forearm oscillating.
  set(fp, kRShoulder, 0.0, 0.0, -1.0 * jt.amp);
  set(fp, kRElbow, 0.0, 0.0, -0.6 + 0.45 * jt.amp * std::sin(ph));
  set(fp, kLKnee, 0.05, 0, 0);
  set(fp, kRKnee, 0.05, 0, 0);
  set(fp, kSpine2, 0, 0, 0.03 * std::sin(ph));
  set(fp, kHead, 0.03 * std::sin(0.5 * ph), 0, 0);
  fp.root_pos = Vec3(0.005 * std::sin(kTau * 0.3 * t), kRootHeight - 0.01, 0);
  return fp;
}

FramePose squat_frame(double t, const Jitter& jt) {
  FramePose fp;
  const double s =
      0.5 * (1.0 - std::cos(kTau * 0.4 * jt.freq * t + jt.phase)) * jt.amp;
  set(fp, kLHip, -0.55 * s, 0, 0);
  set(fp, kRHip, -0.55 * s, 0, 0);
  set(fp, kLKnee, 1.1 * s, 0, 0);
  set(fp, kRKnee, 1.1 * s, 0, 0);
  set(fp, kLAnkle, -0.3 * s, 0, 0);
  set(fp, kRAnkle, -0.3 * s, 0, 0);
  set(fp, kSpine1, -0.2 * s, 0, 0);
  set(fp, kSpine2, -0.1 * s, 0, 0);
  arms_down(fp);
  // Arms swing forward for balance as the squat deepens.
  fp.euler[kLShoulder - 1][0] = -0.6 * s;
  fp.euler[kRShoulder - 1][0] = -0.6 * s;
  const double drop = 0.81 * (1.0 - std::cos(0.55 * s));
  fp.root_pos = Vec3(0, kRootHeight - drop, 0);
  return fp;
}

FramePose blend(const FramePose& a, const FramePose& b, double w) {
  FramePose out;
  out.root_pos = (1.0 - w) * a.root_pos + w * b.root_pos;
  out.root_euler = (1.0 - w) * a.root_euler + w * b.root_euler;
  for (std::size_t j = 0; j < out.euler.size(); ++j) {
    out.euler[j] = (1.0 - w) * a.euler[j] + w * b.euler[j];
  }
  return out;
}

}  // namespace

PoseSequence gen_synthetic(const Skeleton& skel, const std::string& kind,
                           double seconds, double fps, std::uint64_t seed) {
  skel.validate();
  if (skel.joints.size() != kNumJoints) {
    throw std::invalid_argument("gen_synthetic: skeleton must have 24 joints");
  }
  if (!(seconds > 0.0) || !(fps > 0.0)) {
    throw std::invalid_argument("gen_synthetic: seconds and fps must be positive");
  }
  if (kind != "walk" && kind != "wave" && kind != "squat" && kind != "mixed") {
    throw std::invalid_argument("gen_synthetic: unknown kind '" + kind + "'");
  }

  Rng rng(seed);
  const Jitter jt(rng);
  const int T = std::max(2, int(std::lround(seconds * fps)));
  const double dt = 1.0 / fps;

  PoseSequence seq;
  seq.fps = fps;
  seq.skeleton = skel.name;
  seq.poses.reserve(T);

  double travel = 0.0;
  if (kind == "mixed") {
    // walk -> wave -> squat with raised-cosine crossfades.
    const double t1 = seconds / 3.0, t2 = 2.0 * seconds / 3.0;
    const double half = std::min(0.5, seconds / 8.0);
    auto fade = [&](double t, double c) {
      // 0 before c-half, 1 after c+half.
      if (t <= c - half) return 0.0;
      if (t >= c + half) return 1.0;
      return 0.5 * (1.0 - std::cos(std::numbers::pi * (t - c + half) / (2 * half)));
    };
    for (int i = 0; i < T; ++i) {
      const double t = i * dt;
      const double w1 = fade(t, t1), w2 = fade(t, t2);
      // Root travel only accumulates while walking is active; the later
      // segments stay at the spot the walk reached.
      FramePose walk = walk_frame(t, jt, travel, dt * (1.0 - w1));
      FramePose wave = wave_frame(t - t1, jt);
      FramePose squat = squat_frame(t - t2, jt);
      wave.root_pos[2] += travel;
      squat.root_pos[2] += travel;
      FramePose mixedp = blend(walk, wave, w1);
      mixedp = blend(mixedp, squat, w2);
      seq.poses.push_back(to_pose(mixedp));
    }
    return seq;
  }

  for (int i = 0; i < T; ++i) {
    const double t = i * dt;
    FramePose fp;
    if (kind == "walk") {
      fp = walk_frame(t, jt, travel, dt);
    } else if (kind == "wave") {
      fp = wave_frame(t, jt);
    } else {
      fp = squat_frame(t, jt);
    }
    seq.poses.push_back(to_pose(fp));
  }
  return seq;
}

Pose standing_pose(const Skeleton& skel, double knee_bend) {
  (void)skel;
  FramePose fp;
  arms_down(fp);
  set(fp, kLKnee, knee_bend, 0, 0);
  set(fp, kRKnee, knee_bend, 0, 0);
  set(fp, kLHip, -0.5 * knee_bend, 0, 0);
  set(fp, kRHip, -0.5 * knee_bend, 0, 0);
  set(fp, kLAnkle, -0.5 * knee_bend, 0, 0);
  set(fp, kRAnkle, -0.5 * knee_bend, 0, 0);
  fp.root_pos = Vec3(0, kRootHeight, 0);
  return to_pose(fp);
}

PoseSequence hold_pose(const Skeleton& skel, const Pose& pose, double seconds,
                       double fps) {
  (void)skel;
  PoseSequence seq;
  seq.fps = fps;
  seq.skeleton = skel.name;
  const int T = std::max(2, int(std::lround(seconds * fps)));
  seq.poses.assign(T, pose);
  return seq;
}

PoseSequence gen_stepping(const Skeleton& skel, double seconds, double fps,
                          std::uint64_t seed) {
  Rng rng(seed);
  const Jitter jt(rng);
  const int T = std::max(2, int(std::lround(seconds * fps)));
  const double dt = 1.0 / fps;
  PoseSequence seq;
  seq.fps = fps;
  seq.skeleton = skel.name;
  seq.poses.reserve(T);

  const double period = 2.0;  // one step per second, alternating legs
  for (int i = 0; i < T; ++i) {
    const double t = i * dt;
    const double u = std::fmod(t, period) / period;  // [0,1) within the cycle
    // Raised-cosine lift profile, first half left leg, second half right.
    const double lift_l = u < 0.5 ? 0.5 * (1.0 - std::cos(kTau * 2.0 * u)) : 0.0;
    const double lift_r = u >= 0.5 ? 0.5 * (1.0 - std::cos(kTau * 2.0 * (u - 0.5))) : 0.0;

    FramePose fp;
    arms_down(fp);
    set(fp, kLHip, -0.9 * jt.amp * lift_l, 0, 0);
    set(fp, kLKnee, 1.2 * jt.amp * lift_l, 0, 0);
    set(fp, kLAnkle, -0.3 * lift_l, 0, 0);
    set(fp, kRHip, -0.9 * jt.amp * lift_r, 0, 0);
    set(fp, kRKnee, 1.2 * jt.amp * lift_r, 0, 0);
    set(fp, kRAnkle, -0.3 * lift_r, 0, 0);
    set(fp, kSpine1, -0.05, 0, 0);
    fp.root_pos = Vec3(0.01 * std::sin(kTau * t / period + jt.phase),
                       kRootHeight + 0.04 * t, 0.05 * t);
    seq.poses.push_back(to_pose(fp));
  }
  return seq;
}

}  // namespace mtk
