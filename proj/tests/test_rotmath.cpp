#include <doctest.h>

#include <cmath>
#include <numbers>

#include "motiontk/rng.hpp"
#include "motiontk/rotmath.hpp"

using namespace mtk;

namespace {

Rot3 random_rotation(Rng& rng) {
  // Uniform-ish random rotation from a random axis and angle; uniformity is
  // irrelevant here, coverage of the manifold is what matters.
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  while (axis.norm() < 1e-3) axis = Vec3(rng.normal(), rng.normal(), rng.normal());
  return axis_angle(axis, rng.uniform(-std::numbers::pi, std::numbers::pi));
}

}  // namespace

TEST_CASE("euler_xyz_to_rot matches independently computed matrix") {
  // NumPy oracle: Rx(0.3) @ Ry(-0.4) @ Rz(0.5).
  Mat3 expect;
  expect << 0.8083070667743452, -0.4415801631371558, -0.3894183423086505,
      0.35701964169862993, 0.8935594087270837, -0.2721921352954314,
      0.46816307120920625, 0.08098482943778704, 0.879923176281257;
  const Rot3 r = euler_xyz_to_rot(Vec3(0.3, -0.4, 0.5));
  CHECK((r - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sixd_to_rot matches a hand-run Gram-Schmidt") {
  // NumPy oracle: orthonormalize a=[1,2,2], b=[0,3,4].
  SixD v;
  v << 1, 2, 2, 0, 3, 4;
  Mat3 expect;
  expect << 0.3333333333333333, -0.8665782448262419, 0.37139067635410367,
      0.6666666666666666, -0.06189844605901707, -0.7427813527082074,
      0.6666666666666666, 0.4951875684721385, 0.5570860145311556;
  const Rot3 r = sixd_to_rot(v);
  CHECK((r - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(rot_is_valid(r, 1e-12));
}

TEST_CASE("identity round trips exactly") {
  const Rot3 i = Rot3::Identity();
  CHECK((sixd_to_rot(rot_to_sixd(i)) - i).cwiseAbs().maxCoeff() == 0.0);
  const EulerAngles e = rot_to_euler_xyz(i);
  CHECK(!e.gimbal);
  CHECK(e.rpy.norm() == 0.0);
}

TEST_CASE("rotation -> 6d -> rotation round trip") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const Rot3 r = random_rotation(rng);
    const Rot3 back = sixd_to_rot(rot_to_sixd(r));
    CHECK((back - r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rotation -> euler -> rotation round trip away from gimbal lock") {
  Rng rng(43);
  int tested = 0;
  while (tested < 200) {
    const Rot3 r = random_rotation(rng);
    const EulerAngles e = rot_to_euler_xyz(r);
    if (std::abs(std::cos(e.rpy[1])) < 1e-3) continue;  // stay off the seam
    CHECK(!e.gimbal);
    CHECK((euler_xyz_to_rot(e.rpy) - r).cwiseAbs().maxCoeff() < 1e-12);
    ++tested;
  }
}

TEST_CASE("euler angles come back wrapped to (-pi, pi]") {
  Rng rng(44);
  for (int i = 0; i < 200; ++i) {
    const EulerAngles e = rot_to_euler_xyz(random_rotation(rng));
    for (int k = 0; k < 3; ++k) {
      CHECK(e.rpy[k] > -std::numbers::pi);
      CHECK(e.rpy[k] <= std::numbers::pi);
    }
  }
}

TEST_CASE("gimbal lock is flagged and still represents the same rotation") {
  for (double sign : {1.0, -1.0}) {
    const Vec3 locked(0.3, sign * std::numbers::pi / 2.0, 0.7);
    const Rot3 r = euler_xyz_to_rot(locked);
    const EulerAngles e = rot_to_euler_xyz(r);
    CHECK(e.gimbal);
    CHECK(e.rpy[2] == 0.0);
    // The third angle folds into the first; the rotation itself is preserved.
    CHECK((euler_xyz_to_rot(e.rpy) - r).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sixd decode always yields a proper rotation") {
  Rng rng(45);
  for (int i = 0; i < 500; ++i) {
    SixD v;
    for (int k = 0; k < 6; ++k) v[k] = rng.normal(0.0, 2.0);
    if (v.head<3>().norm() < 1e-6) continue;
    Rot3 r;
    try {
      r = sixd_to_rot(v);
    } catch (const std::invalid_argument&) {
      continue;  // degenerate draw, allowed to refuse
    }
    CHECK(rot_is_valid(r, 1e-12));
  }
}

TEST_CASE("sixd decode is scale invariant") {
  Rng rng(46);
  for (int i = 0; i < 100; ++i) {
    SixD v;
    for (int k = 0; k < 6; ++k) v[k] = rng.normal();
    const Rot3 a = sixd_to_rot(v);
    // Power-of-two scaling is exact in floating point: bitwise equal.
    const Rot3 b = sixd_to_rot(SixD(4.0 * v));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    // Arbitrary positive scaling: equal up to roundoff.
    const Rot3 c = sixd_to_rot(SixD(1.7 * v));
    CHECK((a - c).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sixd decode rejects degenerate input") {
  SixD zero_first = SixD::Zero();
  zero_first.tail<3>() = Vec3(1, 0, 0);
  CHECK_THROWS_AS((void)sixd_to_rot(zero_first), std::invalid_argument);

  SixD parallel;
  parallel << 1, 2, 3, 2, 4, 6;
  CHECK_THROWS_AS((void)sixd_to_rot(parallel), std::invalid_argument);
}

TEST_CASE("renormalize is idempotent") {
  Rng rng(47);
  for (int i = 0; i < 100; ++i) {
    SixD v;
    for (int k = 0; k < 6; ++k) v[k] = rng.normal();
    const SixD once = renormalize_sixd(v);
    const SixD twice = renormalize_sixd(once);
    CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("geodesic distance matches axis-angle difference") {
  // Two rotations about the same axis differ by exactly the angle gap.
  const Vec3 axis = Vec3(1, 2, -1).normalized();
  const Rot3 a = axis_angle(axis, 0.3);
  const Rot3 b = axis_angle(axis, 0.7);
  CHECK(geodesic_deg(a, b) == doctest::Approx(22.918311805232928).epsilon(1e-12));
  CHECK(geodesic_deg(a, a) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(geodesic_deg(Rot3::Identity(), axis_angle(Vec3(0, 0, 1), std::numbers::pi)) ==
        doctest::Approx(180.0).epsilon(1e-12));
}

TEST_CASE("geodesic distance is symmetric and obeys the triangle inequality") {
  Rng rng(48);
  for (int i = 0; i < 100; ++i) {
    const Rot3 a = random_rotation(rng);
    const Rot3 b = random_rotation(rng);
    const Rot3 c = random_rotation(rng);
    const double ab = geodesic_deg(a, b);
    const double ba = geodesic_deg(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
    CHECK(geodesic_deg(a, c) <= ab + geodesic_deg(b, c) + 1e-9);
  }
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  const double pi = std::numbers::pi;
  CHECK(wrap_angle(0.1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3.0 * pi) == doctest::Approx(pi));
  CHECK(std::abs(wrap_angle(2.0 * pi)) < 1e-15);
  CHECK(wrap_angle(-0.5) == doctest::Approx(-0.5));
  Rng rng(49);
  for (int i = 0; i < 200; ++i) {
    const double w = wrap_angle(rng.uniform(-50.0, 50.0));
    CHECK(w > -pi);
    CHECK(w <= pi);
  }
}
