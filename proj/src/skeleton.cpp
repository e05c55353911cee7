#include "motiontk/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "motiontk/errors.hpp"

namespace mtk {

using nlohmann::ordered_json;

double Skeleton::total_mass() const {
  double m = 0.0;
  for (const auto& j : joints) m += j.mass;
  return m;
}

void Skeleton::validate() const {
  if (joints.empty()) throw std::invalid_argument("skeleton: no joints");
  if (joints[0].parent != -1) {
    throw std::invalid_argument("skeleton: joint 0 must be the root");
  }
  for (std::size_t i = 1; i < joints.size(); ++i) {
    const int p = joints[i].parent;
    if (p < 0 || p >= int(i)) {
      throw std::invalid_argument("skeleton: joint '" + joints[i].name +
                                  "' parent out of topological order");
    }
  }
  for (const auto& j : joints) {
    if (!(j.mass > 0.0) || !std::isfinite(j.mass)) {
      throw std::invalid_argument("skeleton: joint '" + j.name +
                                  "' has non-positive mass");
    }
  }
  if (up_axis.norm() < 1e-9) {
    throw std::invalid_argument("skeleton: up_axis is zero");
  }
}

const std::array<int, 19>& encoded_joints() {
  static const std::array<int, 19> js = {1,  2,  3,  4,  5,  6,  7,  8,  9, 12,
                                         13, 14, 15, 16, 17, 18, 19, 20, 21};
  return js;
}

bool is_leaf_joint(int j) {
  return std::find(kLeafJoints.begin(), kLeafJoints.end(), j) !=
         kLeafJoints.end();
}

namespace {

struct JointSpec {
  const char* name;
  int parent;
  double off[3];
  double mass;
  double com[3];
};

// Millimetre-rounded rest offsets for a ~1.7 m adult; masses are standard
// anthropometric segment fractions scaled so the total is exactly 70 kg.
// Segment centers of mass sit halfway along the bone toward the child joint.
constexpr JointSpec kHumanoid[kNumJoints] = {
    {"pelvis", -1, {0.000, 0.000, 0.000}, 8.190, {0.000, 0.035, 0.000}},
    {"l_hip", 0, {0.068, -0.083, -0.012}, 7.000, {0.020, -0.192, -0.002}},
    {"r_hip", 0, {-0.068, -0.083, -0.012}, 7.000, {-0.020, -0.192, -0.002}},
    {"spine1", 0, {0.000, 0.107, -0.015}, 7.350, {0.000, 0.068, 0.001}},
    {"l_knee", 1, {0.040, -0.384, -0.004}, 3.255, {-0.007, -0.213, -0.019}},
    {"r_knee", 2, {-0.040, -0.384, -0.004}, 3.255, {0.007, -0.213, -0.019}},
    {"spine2", 3, {0.000, 0.136, 0.002}, 8.050, {0.000, 0.027, 0.007}},
    {"l_ankle", 4, {-0.014, -0.426, -0.037}, 0.805, {0.013, -0.028, 0.060}},
    {"r_ankle", 5, {0.014, -0.426, -0.037}, 0.805, {-0.013, -0.028, 0.060}},
    {"spine3", 6, {0.000, 0.054, 0.013}, 9.100, {0.000, 0.106, -0.010}},
    {"l_foot", 7, {0.025, -0.055, 0.120}, 0.210, {0.010, -0.010, 0.040}},
    {"r_foot", 8, {-0.025, -0.055, 0.120}, 0.210, {-0.010, -0.010, 0.040}},
    {"neck", 9, {0.000, 0.212, -0.020}, 0.980, {0.000, 0.044, 0.015}},
    {"l_collar", 9, {0.075, 0.114, -0.010}, 1.050, {0.049, 0.020, -0.005}},
    {"r_collar", 9, {-0.075, 0.114, -0.010}, 1.050, {-0.049, 0.020, -0.005}},
    {"head", 12, {0.000, 0.088, 0.030}, 4.690, {0.000, 0.090, 0.020}},
    {"l_shoulder", 13, {0.098, 0.040, -0.009}, 1.960, {0.129, -0.006, -0.002}},
    {"r_shoulder", 14, {-0.098, 0.040, -0.009}, 1.960, {-0.129, -0.006, -0.002}},
    {"l_elbow", 16, {0.257, -0.011, -0.003}, 1.120, {0.125, 0.003, -0.001}},
    {"r_elbow", 17, {-0.257, -0.011, -0.003}, 1.120, {-0.125, 0.003, -0.001}},
    {"l_wrist", 18, {0.250, 0.006, -0.002}, 0.350, {0.042, -0.004, -0.002}},
    {"r_wrist", 19, {-0.250, 0.006, -0.002}, 0.350, {-0.042, -0.004, -0.002}},
    {"l_hand", 20, {0.084, -0.007, -0.003}, 0.070, {0.035, -0.005, 0.000}},
    {"r_hand", 21, {-0.084, -0.007, -0.003}, 0.070, {-0.035, -0.005, 0.000}},
};

std::array<double, 6> box_inertia(double mass, const Vec3& com) {
  // Solid box spanning the bone (2*com per axis, with a minimum girth), plus
  // a small floor that keeps the matrix comfortably positive definite for
  // near-massless end segments.
  Vec3 d;
  for (int k = 0; k < 3; ++k) d[k] = std::max(2.0 * std::abs(com[k]), 0.07);
  const double c = mass / 12.0;
  std::array<double, 6> I{};
  I[0] = c * (d[1] * d[1] + d[2] * d[2]) + 1e-4;
  I[1] = c * (d[0] * d[0] + d[2] * d[2]) + 1e-4;
  I[2] = c * (d[0] * d[0] + d[1] * d[1]) + 1e-4;
  return I;
}

}  // namespace

Skeleton Skeleton::default_humanoid() {
  Skeleton s;
  s.name = "humanoid24";
  s.up_axis = Vec3(0, 1, 0);
  s.joints.reserve(kNumJoints);
  for (const auto& spec : kHumanoid) {
    Joint j;
    j.name = spec.name;
    j.parent = spec.parent;
    j.offset = Vec3(spec.off[0], spec.off[1], spec.off[2]);
    j.mass = spec.mass;
    j.com = Vec3(spec.com[0], spec.com[1], spec.com[2]);
    j.inertia = box_inertia(j.mass, j.com);
    s.joints.push_back(std::move(j));
  }
  s.validate();
  return s;
}

namespace {

Vec3 read_vec3(const ordered_json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 3) {
    throw ParseError(ctx + ": expected an array of 3 numbers");
  }
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

}  // namespace

Skeleton load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("skeleton: cannot open '" + path + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("skeleton '" + path + "': " + e.what());
  }
  Skeleton s;
  s.name = std::filesystem::path(path).stem().string();
  try {
    if (!doc.contains("joints")) throw ParseError("missing 'joints'");
    s.up_axis = read_vec3(doc.at("up_axis"), "up_axis");
    for (const auto& jj : doc.at("joints")) {
      Joint j;
      j.name = jj.at("name").get<std::string>();
      j.parent = jj.at("parent").get<int>();
      j.offset = read_vec3(jj.at("offset"), "joint '" + j.name + "' offset");
      j.mass = jj.at("mass").get<double>();
      j.com = read_vec3(jj.at("com"), "joint '" + j.name + "' com");
      const auto& in6 = jj.at("inertia");
      if (!in6.is_array() || in6.size() != 6) {
        throw ParseError("joint '" + j.name + "': inertia must have 6 entries");
      }
      for (int k = 0; k < 6; ++k) j.inertia[k] = in6[k].get<double>();
      s.joints.push_back(std::move(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("skeleton '" + path + "': " + e.what());
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError("skeleton '" + path + "': " + e.what());
  }
  return s;
}

void save_skeleton(const Skeleton& s, const std::string& path) {
  ordered_json doc;
  doc["joints"] = ordered_json::array();
  for (const auto& j : s.joints) {
    ordered_json jj;
    jj["name"] = j.name;
    jj["parent"] = j.parent;
    jj["offset"] = {j.offset[0], j.offset[1], j.offset[2]};
    jj["mass"] = j.mass;
    jj["com"] = {j.com[0], j.com[1], j.com[2]};
    jj["inertia"] = j.inertia;
    doc["joints"].push_back(std::move(jj));
  }
  doc["up_axis"] = {s.up_axis[0], s.up_axis[1], s.up_axis[2]};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("skeleton: cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

}  // namespace mtk
