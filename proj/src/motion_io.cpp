#include "motiontk/motion_io.hpp"

#include <fstream>
#include <json.hpp>

#include "motiontk/errors.hpp"

namespace mtk {

using nlohmann::ordered_json;

PoseSequence load_motion(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("motion: cannot open '" + path + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("motion '" + path + "': " + e.what());
  }
  PoseSequence seq;
  try {
    seq.fps = doc.at("fps").get<double>();
    seq.skeleton = doc.at("skeleton").get<std::string>();
    if (!(seq.fps > 0.0)) {
      throw ParseError("motion '" + path + "': fps must be positive");
    }
    for (const auto& fr : doc.at("frames")) {
      Pose pose;
      const auto& pr = fr.at("p_root");
      if (!pr.is_array() || pr.size() != 3) {
        throw ParseError("motion '" + path + "': p_root must have 3 entries");
      }
      for (int k = 0; k < 3; ++k) pose.p_root[k] = pr[k].get<double>();

      const auto& rr = fr.at("r_root");
      if (!rr.is_array() || rr.size() != 6) {
        throw ParseError("motion '" + path + "': r_root must have 6 entries");
      }
      SixD v;
      for (int k = 0; k < 6; ++k) v[k] = rr[k].get<double>();
      pose.r_root = sixd_to_rot(v);

      const auto& js = fr.at("r_joints");
      if (!js.is_array() || js.size() != kNumJoints - 1) {
        throw ParseError("motion '" + path + "': r_joints must have 23 entries");
      }
      for (int j = 0; j < kNumJoints - 1; ++j) {
        const auto& rj = js[j];
        if (!rj.is_array() || rj.size() != 6) {
          throw ParseError("motion '" + path +
                           "': each r_joints entry must have 6 values");
        }
        for (int k = 0; k < 6; ++k) v[k] = rj[k].get<double>();
        pose.r_joint[j] = sixd_to_rot(v);
      }
      seq.poses.push_back(std::move(pose));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("motion '" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError("motion '" + path + "': " + e.what());
  }
  return seq;
}

void save_motion(const PoseSequence& seq, const std::string& path) {
  ordered_json doc;
  doc["fps"] = seq.fps;
  doc["skeleton"] = seq.skeleton;
  auto frames = ordered_json::array();
  for (const Pose& pose : seq.poses) {
    ordered_json fr;
    fr["p_root"] = {pose.p_root[0], pose.p_root[1], pose.p_root[2]};
    const SixD rr = rot_to_sixd(pose.r_root);
    fr["r_root"] = {rr[0], rr[1], rr[2], rr[3], rr[4], rr[5]};
    auto js = ordered_json::array();
    for (const Rot3& r : pose.r_joint) {
      const SixD v = rot_to_sixd(r);
      js.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    }
    fr["r_joints"] = std::move(js);
    frames.push_back(std::move(fr));
  }
  doc["frames"] = std::move(frames);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("motion: cannot write '" + path + "'");
  out << doc.dump() << "\n";
}

}  // namespace mtk
