#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "motiontk/errors.hpp"

#include "motiontk/imusynth.hpp"
#include "motiontk/rotmath.hpp"
#include "motiontk/synthetic.hpp"

using namespace mtk;

namespace {

// root gets p(t) = p0 + v*t + 0.5*a*t^2, everything else stays put
PoseSequence kinematic_root(const Skeleton& skel, const Vec3& v, const Vec3& a,
                            double seconds, double fps) {
  PoseSequence seq;
  seq.fps = fps;
  seq.skeleton = skel.name;
  const Pose base = standing_pose(skel);
  const int T = int(seconds * fps + 0.5);
  for (int i = 0; i < T; ++i) {
    const double t = i / fps;
    Pose p = base;
    p.p_root += v * t + 0.5 * t * t * a;
    seq.poses.push_back(p);
  }
  return seq;
}

}  // namespace

TEST_CASE("site configuration is validated") {
  const Skeleton skel = Skeleton::default_humanoid();
  const PoseSequence hold = hold_pose(skel, standing_pose(skel), 0.1, 60.0);

  ImuConfig dup;
  dup.sites = {0, 15, 20, 20, 4, 5};
  CHECK_THROWS_AS(synthesize_imu(skel, hold, dup), std::invalid_argument);

  ImuConfig oob;
  oob.sites = {0, 15, 20, 21, 4, 24};
  CHECK_THROWS_AS(synthesize_imu(skel, hold, oob), std::invalid_argument);

  SUBCASE("default sites read pelvis, head, wrists, knees") {
    const ImuSequence imu = synthesize_imu(skel, hold);
    CHECK(imu.sites[0] == skel.joints[0].name);
    CHECK(imu.sites[1] == skel.joints[15].name);
    CHECK(imu.sites[2] == skel.joints[20].name);
    CHECK(imu.sites[3] == skel.joints[21].name);
    CHECK(imu.sites[4] == skel.joints[4].name);
    CHECK(imu.sites[5] == skel.joints[5].name);
  }
}

TEST_CASE("sequences shorter than three frames are rejected") {
  const Skeleton skel = Skeleton::default_humanoid();
  PoseSequence two;
  two.fps = 60.0;
  two.skeleton = skel.name;
  two.poses = {standing_pose(skel), standing_pose(skel)};
  CHECK_THROWS_AS(synthesize_imu(skel, two), std::invalid_argument);
  two.poses.push_back(standing_pose(skel));
  CHECK_NOTHROW(synthesize_imu(skel, two));
}

TEST_CASE("static pose gives zero acceleration and frozen orientation") {
  const Skeleton skel = Skeleton::default_humanoid();
  const PoseSequence hold = hold_pose(skel, standing_pose(skel), 0.5, 60.0);
  const ImuSequence imu = synthesize_imu(skel, hold);
  REQUIRE(imu.frames.size() == hold.poses.size());
  CHECK(imu.fps == 60.0);
  for (const ImuFrame& f : imu.frames) {
    for (int s = 0; s < 6; ++s) {
      CHECK(f.acc[s].norm() == 0.0);
      CHECK((f.ori[s] - imu.frames[0].ori[s]).norm() == 0.0);
    }
  }
}

TEST_CASE("constant velocity gives zero acceleration") {
  const Skeleton skel = Skeleton::default_humanoid();
  const PoseSequence seq =
      kinematic_root(skel, Vec3(1.3, 0.2, -0.7), Vec3::Zero(), 0.5, 60.0);
  const ImuSequence imu = synthesize_imu(skel, seq);
  for (const ImuFrame& f : imu.frames) {
    for (int s = 0; s < 6; ++s) CHECK(f.acc[s].norm() < 1e-9);
  }
}

TEST_CASE("constant acceleration is recovered at every frame") {
  const Skeleton skel = Skeleton::default_humanoid();
  const Vec3 a(0, 0, 1);
  const PoseSequence seq = kinematic_root(skel, Vec3::Zero(), a, 0.5, 60.0);
  const ImuSequence imu = synthesize_imu(skel, seq);
  // central differences are exact on quadratics; the endpoint stencils reuse
  // the nearest interior second difference, which is the same constant
  for (const ImuFrame& f : imu.frames) {
    for (int s = 0; s < 6; ++s) CHECK((f.acc[s] - a).norm() < 1e-9);
  }
}

TEST_CASE("half the frame rate sees the same quadratic acceleration") {
  const Skeleton skel = Skeleton::default_humanoid();
  const Vec3 a(0.4, -0.9, 0.25);
  const PoseSequence hi = kinematic_root(skel, Vec3(0.5, 0, 0), a, 0.5, 120.0);
  PoseSequence lo;
  lo.fps = 60.0;
  lo.skeleton = hi.skeleton;
  for (size_t t = 0; t < hi.poses.size(); t += 2) lo.poses.push_back(hi.poses[t]);

  const ImuSequence ihi = synthesize_imu(skel, hi);
  const ImuSequence ilo = synthesize_imu(skel, lo);
  for (size_t t = 1; t + 1 < ilo.frames.size(); ++t) {
    for (int s = 0; s < 6; ++s) {
      CHECK((ilo.frames[t].acc[s] - ihi.frames[2 * t].acc[s]).norm() < 1e-9);
    }
  }
}

TEST_CASE("a global rotation of the motion rotates the signals") {
  const Skeleton skel = Skeleton::default_humanoid();
  const PoseSequence walk = gen_synthetic(skel, "walk", 0.4, 60.0, 21);
  const Rot3 R0 = axis_angle(Vec3(1, 2, -1).normalized(), 0.8);

  PoseSequence turned = walk;
  for (Pose& p : turned.poses) {
    p.p_root = R0 * p.p_root;
    p.r_root = R0 * p.r_root;
  }

  const ImuSequence base = synthesize_imu(skel, walk);
  const ImuSequence rot = synthesize_imu(skel, turned);
  for (size_t t = 0; t < base.frames.size(); ++t) {
    for (int s = 0; s < 6; ++s) {
      CHECK((rot.frames[t].acc[s] - R0 * base.frames[t].acc[s]).norm() < 1e-9);
      CHECK((rot.frames[t].ori[s] - R0 * base.frames[t].ori[s]).norm() < 1e-12);
    }
  }
}

TEST_CASE("gravity mode adds exactly g times up") {
  const Skeleton skel = Skeleton::default_humanoid();
  const PoseSequence walk = gen_synthetic(skel, "walk", 0.3, 60.0, 5);
  ImuConfig cfg;
  const ImuSequence plain = synthesize_imu(skel, walk, cfg);
  cfg.with_gravity = true;
  const ImuSequence grav = synthesize_imu(skel, walk, cfg);
  const Vec3 g = 9.81 * skel.up_axis;
  for (size_t t = 0; t < plain.frames.size(); ++t) {
    for (int s = 0; s < 6; ++s) {
      CHECK((grav.frames[t].acc[s] - plain.frames[t].acc[s] - g).norm() < 1e-12);
      CHECK((grav.frames[t].ori[s] - plain.frames[t].ori[s]).norm() == 0.0);
    }
  }
}

TEST_CASE("orientations are the forward-kinematics bone rotations") {
  const Skeleton skel = Skeleton::default_humanoid();
  const PoseSequence walk = gen_synthetic(skel, "walk", 0.2, 60.0, 8);
  const ImuConfig cfg;
  const ImuSequence imu = synthesize_imu(skel, walk, cfg);
  for (size_t t = 0; t < walk.poses.size(); ++t) {
    const FkResult fk = forward_kinematics(skel, walk.poses[t]);
    for (int s = 0; s < 6; ++s) {
      CHECK((imu.frames[t].ori[s] - fk.rot[cfg.sites[s]]).norm() == 0.0);
      CHECK(rot_is_valid(imu.frames[t].ori[s]));
    }
  }
}

TEST_CASE("JSON files round trip") {
  const Skeleton skel = Skeleton::default_humanoid();
  const PoseSequence walk = gen_synthetic(skel, "walk", 0.2, 60.0, 13);
  const ImuSequence imu = synthesize_imu(skel, walk);

  const auto dir = std::filesystem::temp_directory_path() / "mtk_imu_roundtrip";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "walk.imu.json").string();
  save_imu(imu, path);
  const ImuSequence back = load_imu(path);

  CHECK(back.fps == imu.fps);
  CHECK(back.sites == imu.sites);
  REQUIRE(back.frames.size() == imu.frames.size());
  for (size_t t = 0; t < imu.frames.size(); ++t) {
    for (int s = 0; s < 6; ++s) {
      CHECK((back.frames[t].acc[s] - imu.frames[t].acc[s]).norm() == 0.0);
      // first two orientation columns are stored and pass through exactly;
      // the third is their cross product
      CHECK((back.frames[t].ori[s] - imu.frames[t].ori[s]).norm() < 1e-15);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed IMU files are rejected") {
  const auto dir = std::filesystem::temp_directory_path() / "mtk_imu_bad";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "bad.imu.json").string();

  auto write = [&](const char* text) {
    std::ofstream out(path);
    out << text;
  };

  CHECK_THROWS_AS(load_imu((dir / "missing.imu.json").string()), ParseError);
  write("not json");
  CHECK_THROWS_AS(load_imu(path), ParseError);
  write("{\"fps\": 0, \"sites\": [\"a\",\"b\",\"c\",\"d\",\"e\",\"f\"], \"frames\": []}");
  CHECK_THROWS_AS(load_imu(path), ParseError);
  write("{\"fps\": 60, \"sites\": [\"a\",\"b\"], \"frames\": []}");
  CHECK_THROWS_AS(load_imu(path), ParseError);
  std::filesystem::remove_all(dir);
}
