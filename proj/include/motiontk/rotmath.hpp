#pragma once

#include <Eigen/Dense>

namespace mtk {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Rot3 = Eigen::Matrix3d;  // orthonormal, det +1; see rot_is_valid()

// Continuous 6-dof rotation encoding: the first two columns of the rotation
// matrix, stored column-major [c0; c1].  Decoding re-orthonormalizes, so any
// non-degenerate 6-vector maps to a proper rotation.
using SixD = Eigen::Matrix<double, 6, 1>;

bool rot_is_valid(const Rot3& r, double tol = 1e-9);

// Gram-Schmidt decode.  Throws std::invalid_argument if the first column is
// near zero or the columns are near parallel (norm of a residual < 1e-12).
Rot3 sixd_to_rot(const SixD& r);
SixD rot_to_sixd(const Rot3& r);

// Decode + re-encode; projects a perturbed 6-vector back onto the manifold.
SixD renormalize_sixd(const SixD& r);

// Intrinsic X-Y-Z Euler angles: R = Rx(a) * Ry(b) * Rz(c).
// This chart is used for every spherical joint in the dynamics state.
struct EulerAngles {
  Vec3 rpy;      // (a, b, c), each in (-pi, pi]
  bool gimbal;   // |cos b| < 1e-6; c was forced to 0
};

Rot3 euler_xyz_to_rot(const Vec3& rpy);
EulerAngles rot_to_euler_xyz(const Rot3& r);

// Map a raw angle into (-pi, pi].
double wrap_angle(double a);

// Geodesic distance between two rotations, in degrees.
double geodesic_deg(const Rot3& a, const Rot3& b);

// Rotation about a unit axis by angle (radians).
Rot3 axis_angle(const Vec3& axis, double angle);

}  // namespace mtk
