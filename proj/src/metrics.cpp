#include "motiontk/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "motiontk/rotmath.hpp"

namespace mtk {

using nlohmann::ordered_json;

namespace {

// chordal mean: eigenvector of the largest eigenvalue of the summed
// quaternion outer products (sign-invariant, so no alignment needed)
Rot3 mean_rotation(const std::vector<Rot3>& rs) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (const Rot3& r : rs) {
    const Eigen::Quaterniond q(r);
    const Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
    m += v * v.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  const Eigen::Vector4d v = es.eigenvectors().col(3);  // ascending order
  return Eigen::Quaterniond(v[0], v[1], v[2], v[3]).normalized().toRotationMatrix();
}

}  // namespace

FidelityReport fidelity(const Skeleton& skel, const PoseSequence& gt,
                        const std::vector<PoseSequence>& augmented,
                        const std::array<int, 4>& sip) {
  if (augmented.empty()) {
    throw std::invalid_argument("fidelity: no augmented samples");
  }
  for (int j : sip) {
    if (j < 0 || j >= kNumJoints) {
      throw std::invalid_argument("fidelity: sip joint out of range");
    }
  }
  for (const PoseSequence& s : augmented) {
    if (s.poses.size() != gt.poses.size() || s.fps != gt.fps) {
      throw std::invalid_argument(
          "fidelity: augmented sequence length/fps mismatch");
    }
  }
  const size_t T = gt.poses.size();
  const size_t K = augmented.size();
  if (T == 0) throw std::invalid_argument("fidelity: empty ground truth");

  std::vector<FkResult> gt_fk(T);
  for (size_t t = 0; t < T; ++t) gt_fk[t] = forward_kinematics(skel, gt.poses[t]);
  std::vector<std::vector<FkResult>> aug_fk(K, std::vector<FkResult>(T));
  for (size_t k = 0; k < K; ++k) {
    for (size_t t = 0; t < T; ++t) {
      aug_fk[k][t] = forward_kinematics(skel, augmented[k].poses[t]);
    }
  }

  FidelityReport rep;
  std::array<bool, kNumJoints> is_sip{};
  for (int j : sip) is_sip[j] = true;

  for (int j = 0; j < kNumJoints; ++j) {
    double epos = 0.0, erot = 0.0, dpos = 0.0, drot = 0.0;
    for (size_t t = 0; t < T; ++t) {
      Vec3 mean_p = Vec3::Zero();
      std::vector<Rot3> rots;
      rots.reserve(K);
      for (size_t k = 0; k < K; ++k) {
        epos += (aug_fk[k][t].pos[j] - gt_fk[t].pos[j]).norm();
        erot += geodesic_deg(aug_fk[k][t].rot[j], gt_fk[t].rot[j]);
        mean_p += aug_fk[k][t].pos[j];
        rots.push_back(aug_fk[k][t].rot[j]);
      }
      mean_p /= double(K);
      double var = 0.0;
      for (size_t k = 0; k < K; ++k) {
        var += (aug_fk[k][t].pos[j] - mean_p).squaredNorm();
      }
      dpos += std::sqrt(var / double(K));
      const Rot3 center = mean_rotation(rots);
      for (size_t k = 0; k < K; ++k) drot += geodesic_deg(rots[k], center);
    }
    rep.e_pos_joint[j] = 100.0 * epos / double(T * K);
    rep.e_rot_joint[j] = erot / double(T * K);
    rep.d_pos_joint[j] = 100.0 * dpos / double(T);
    rep.d_rot_joint[j] = drot / double(T * K);
    rep.e_pos += rep.e_pos_joint[j];
    rep.e_rot += rep.e_rot_joint[j];
    rep.d_pos += rep.d_pos_joint[j];
    rep.d_rot += rep.d_rot_joint[j];
    if (is_sip[j]) rep.e_sip += rep.e_rot_joint[j];
  }
  rep.e_pos /= kNumJoints;
  rep.e_rot /= kNumJoints;
  rep.d_pos /= kNumJoints;
  rep.d_rot /= kNumJoints;
  rep.e_sip /= double(sip.size());
  return rep;
}

double jitter(const Skeleton& skel, const PoseSequence& seq) {
  const size_t T = seq.poses.size();
  if (T < 4) throw std::invalid_argument("jitter: needs at least 4 frames");
  std::vector<FkResult> fk(T);
  for (size_t t = 0; t < T; ++t) fk[t] = forward_kinematics(skel, seq.poses[t]);
  const double f3 = seq.fps * seq.fps * seq.fps;
  double sum = 0.0;
  size_t cnt = 0;
  for (size_t t = 1; t + 2 < T; ++t) {
    for (int j = 0; j < kNumJoints; ++j) {
      sum += (fk[t + 2].pos[j] - 3.0 * fk[t + 1].pos[j] + 3.0 * fk[t].pos[j] -
              fk[t - 1].pos[j])
                 .norm() *
             f3;
      ++cnt;
    }
  }
  return sum / double(cnt) / 100.0;
}

void save_report_json(const FidelityReport& rep, const std::string& path) {
  ordered_json doc;
  doc["e_pos_cm"] = rep.e_pos;
  doc["e_rot_deg"] = rep.e_rot;
  doc["e_sip_deg"] = rep.e_sip;
  doc["d_pos_cm"] = rep.d_pos;
  doc["d_rot_deg"] = rep.d_rot;
  ordered_json per;
  per["e_pos_cm"] = rep.e_pos_joint;
  per["e_rot_deg"] = rep.e_rot_joint;
  per["d_pos_cm"] = rep.d_pos_joint;
  per["d_rot_deg"] = rep.d_rot_joint;
  doc["per_joint"] = std::move(per);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

void save_report_csv(const FidelityReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write '" + path + "'");
  out << "joint,e_pos_cm,e_rot_deg,d_pos_cm,d_rot_deg\n";
  char buf[160];
  for (int j = 0; j < kNumJoints; ++j) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", j,
                  rep.e_pos_joint[j], rep.e_rot_joint[j], rep.d_pos_joint[j],
                  rep.d_rot_joint[j]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "mean,%.17g,%.17g,%.17g,%.17g\n", rep.e_pos,
                rep.e_rot, rep.d_pos, rep.d_rot);
  out << buf;
}

}  // namespace mtk
