#include "motiontk/rotmath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mtk {

namespace {
constexpr double kDegenerateTol = 1e-12;
constexpr double kGimbalTol = 1e-6;
constexpr double kPi = std::numbers::pi;
}  // namespace

bool rot_is_valid(const Rot3& r, double tol) {
  const Mat3 err = r.transpose() * r - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && r.determinant() > 0.0;
}

Rot3 sixd_to_rot(const SixD& r) {
  const Vec3 a = r.head<3>();
  const Vec3 b = r.tail<3>();
  // Already-orthonormal columns pass through untouched, so decode/encode is
  // an exact identity on valid rotations and renormalization is idempotent.
  if (std::abs(a.squaredNorm() - 1.0) < 1e-14 &&
      std::abs(b.squaredNorm() - 1.0) < 1e-14 && std::abs(a.dot(b)) < 1e-14) {
    Rot3 out;
    out.col(0) = a;
    out.col(1) = b;
    out.col(2) = a.cross(b);
    return out;
  }
  const double na = a.norm();
  if (na <= kDegenerateTol) {
    throw std::invalid_argument("sixd_to_rot: first column is near zero");
  }
  const Vec3 c0 = a / na;
  const Vec3 b_perp = b - c0.dot(b) * c0;
  const double nb = b_perp.norm();
  if (nb <= kDegenerateTol) {
    throw std::invalid_argument("sixd_to_rot: columns are near parallel");
  }
  const Vec3 c1 = b_perp / nb;
  Rot3 out;
  out.col(0) = c0;
  out.col(1) = c1;
  out.col(2) = c0.cross(c1);
  return out;
}

SixD rot_to_sixd(const Rot3& r) {
  SixD out;
  out.head<3>() = r.col(0);
  out.tail<3>() = r.col(1);
  return out;
}

SixD renormalize_sixd(const SixD& r) { return rot_to_sixd(sixd_to_rot(r)); }

Rot3 euler_xyz_to_rot(const Vec3& rpy) {
  const double ca = std::cos(rpy[0]), sa = std::sin(rpy[0]);
  const double cb = std::cos(rpy[1]), sb = std::sin(rpy[1]);
  const double cc = std::cos(rpy[2]), sc = std::sin(rpy[2]);
  Rot3 r;
  // Rx(a) * Ry(b) * Rz(c), written out.
  r(0, 0) = cb * cc;
  r(0, 1) = -cb * sc;
  r(0, 2) = sb;
  r(1, 0) = ca * sc + sa * sb * cc;
  r(1, 1) = ca * cc - sa * sb * sc;
  r(1, 2) = -sa * cb;
  r(2, 0) = sa * sc - ca * sb * cc;
  r(2, 1) = sa * cc + ca * sb * sc;
  r(2, 2) = ca * cb;
  return r;
}

EulerAngles rot_to_euler_xyz(const Rot3& r) {
  EulerAngles out;
  const double sb = std::clamp(r(0, 2), -1.0, 1.0);
  const double b = std::asin(sb);
  if (std::abs(std::cos(b)) < kGimbalTol) {
    // Gimbal lock: a and c are coupled; put everything into a, zero c.
    out.gimbal = true;
    const double a =
        (sb > 0.0) ? std::atan2(r(1, 0), r(1, 1)) : std::atan2(-r(1, 0), r(1, 1));
    out.rpy = Vec3(wrap_angle(a), wrap_angle(b), 0.0);
    return out;
  }
  out.gimbal = false;
  out.rpy = Vec3(wrap_angle(std::atan2(-r(1, 2), r(2, 2))), wrap_angle(b),
                 wrap_angle(std::atan2(-r(0, 1), r(0, 0))));
  return out;
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double geodesic_deg(const Rot3& a, const Rot3& b) {
  const double tr = (a.transpose() * b).trace();
  const double c = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c) * 180.0 / kPi;
}

Rot3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace mtk
