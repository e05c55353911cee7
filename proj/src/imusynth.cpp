#include "motiontk/imusynth.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "motiontk/errors.hpp"
#include "motiontk/rotmath.hpp"

namespace mtk {

using nlohmann::ordered_json;

void ImuConfig::validate() const {
  for (size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] < 0 || sites[i] >= kNumJoints) {
      throw std::invalid_argument("imu config: site index out of range");
    }
    for (size_t j = i + 1; j < sites.size(); ++j) {
      if (sites[i] == sites[j]) {
        throw std::invalid_argument("imu config: duplicate site index");
      }
    }
  }
}

ImuSequence synthesize_imu(const Skeleton& skel, const PoseSequence& seq,
                           const ImuConfig& cfg) {
  cfg.validate();
  const size_t T = seq.poses.size();
  if (T < 3) {
    throw std::invalid_argument("imu synthesis needs at least 3 frames");
  }
  ensure_matches(skel, seq);

  ImuSequence out;
  out.fps = seq.fps;
  for (size_t s = 0; s < cfg.sites.size(); ++s) {
    out.sites[s] = skel.joints[cfg.sites[s]].name;
  }

  // site positions and orientations for every frame
  std::vector<std::array<Vec3, 6>> pos(T);
  out.frames.resize(T);
  for (size_t t = 0; t < T; ++t) {
    const FkResult fk = forward_kinematics(skel, seq.poses[t]);
    for (size_t s = 0; s < cfg.sites.size(); ++s) {
      pos[t][s] = fk.pos[cfg.sites[s]];
      out.frames[t].ori[s] = fk.rot[cfg.sites[s]];
    }
  }

  const double f2 = seq.fps * seq.fps;
  const Vec3 grav = cfg.with_gravity ? Vec3(9.81 * skel.up_axis) : Vec3::Zero();
  for (size_t t = 0; t < T; ++t) {
    // endpoints reuse the nearest interior stencil; second differences have
    // no preferred center, so this is the one-sided estimate
    const size_t c = (t == 0) ? 1 : (t == T - 1 ? T - 2 : t);
    for (size_t s = 0; s < cfg.sites.size(); ++s) {
      out.frames[t].acc[s] =
          (pos[c + 1][s] - 2.0 * pos[c][s] + pos[c - 1][s]) * f2 + grav;
    }
  }
  return out;
}

void save_imu(const ImuSequence& imu, const std::string& path) {
  ordered_json doc;
  doc["fps"] = imu.fps;
  auto sites = ordered_json::array();
  for (const std::string& s : imu.sites) sites.push_back(s);
  doc["sites"] = std::move(sites);
  auto frames = ordered_json::array();
  for (const ImuFrame& f : imu.frames) {
    ordered_json fr;
    auto acc = ordered_json::array();
    auto ori = ordered_json::array();
    for (size_t s = 0; s < f.acc.size(); ++s) {
      acc.push_back({f.acc[s][0], f.acc[s][1], f.acc[s][2]});
      const SixD v = rot_to_sixd(f.ori[s]);
      ori.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    }
    fr["acc"] = std::move(acc);
    fr["ori"] = std::move(ori);
    frames.push_back(std::move(fr));
  }
  doc["frames"] = std::move(frames);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("imu: cannot write '" + path + "'");
  out << doc.dump() << "\n";
}

ImuSequence load_imu(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("imu: cannot open '" + path + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("imu '" + path + "': " + e.what());
  }
  ImuSequence imu;
  try {
    imu.fps = doc.at("fps").get<double>();
    if (!(imu.fps > 0.0)) {
      throw ParseError("imu '" + path + "': fps must be positive");
    }
    const auto& sites = doc.at("sites");
    if (!sites.is_array() || sites.size() != 6) {
      throw ParseError("imu '" + path + "': sites must have 6 entries");
    }
    for (size_t s = 0; s < 6; ++s) imu.sites[s] = sites[s].get<std::string>();
    for (const auto& fr : doc.at("frames")) {
      const auto& acc = fr.at("acc");
      const auto& ori = fr.at("ori");
      if (!acc.is_array() || acc.size() != 6 || !ori.is_array() ||
          ori.size() != 6) {
        throw ParseError("imu '" + path + "': each frame needs 6 acc and ori");
      }
      ImuFrame f;
      for (size_t s = 0; s < 6; ++s) {
        if (acc[s].size() != 3 || ori[s].size() != 6) {
          throw ParseError("imu '" + path + "': bad acc/ori entry size");
        }
        for (int k = 0; k < 3; ++k) f.acc[s][k] = acc[s][k].get<double>();
        SixD v;
        for (int k = 0; k < 6; ++k) v[k] = ori[s][k].get<double>();
        f.ori[s] = sixd_to_rot(v);
      }
      imu.frames.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("imu '" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError("imu '" + path + "': " + e.what());
  }
  return imu;
}

}  // namespace mtk
