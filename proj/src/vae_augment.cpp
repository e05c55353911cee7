#include <limits>
#include <stdexcept>

#include "motiontk/vae.hpp"

namespace mtk {

namespace {

void clamp_block(MotionFrame& f, const MotionFrame& ref, int offset,
                 double radius) {
  const Vec3 delta = f.segment<3>(offset) - ref.segment<3>(offset);
  const double n = delta.norm();
  if (n > radius) {
    f.segment<3>(offset) = ref.segment<3>(offset) + delta * (radius / n);
  }
}

void refine(MotionFrame& f, const MotionFrame& ref, const AugmentConfig& cfg) {
  namespace fl = frame_layout;
  clamp_block(f, ref, fl::kRootPos, cfg.d_p);
  clamp_block(f, ref, fl::kRootVel, cfg.d_v);
  for (int k = 0; k < 19; ++k) {
    clamp_block(f, ref, fl::joint_pos(k), cfg.d_p);
    clamp_block(f, ref, fl::joint_vel(k), cfg.d_v);
  }
  f.segment<6>(fl::kRootRot) = renormalize_sixd(f.segment<6>(fl::kRootRot));
  for (int k = 0; k < 19; ++k) {
    f.segment<6>(fl::joint_rot(k)) =
        renormalize_sixd(f.segment<6>(fl::joint_rot(k)));
  }
}

}  // namespace

std::vector<MotionFrame> augment_frames(VaeModel& model,
                                        const std::vector<MotionFrame>& reference,
                                        const AugmentConfig& cfg, Rng& rng) {
  if (!model.trained()) {
    throw std::invalid_argument("augment: model has not been trained");
  }
  if (cfg.best_of < 1) {
    throw std::invalid_argument("augment: best_of must be >= 1");
  }
  if (reference.empty()) return {};

  const int latent = model.config().latent_dim;
  std::vector<MotionFrame> out;
  out.reserve(reference.size());
  out.push_back(reference[0]);

  Eigen::VectorXd mu, sigma, z(latent);
  for (std::size_t t = 1; t < reference.size(); ++t) {
    model.encode_eval(reference[t], out.back(), mu, sigma);
    if (cfg.deterministic) sigma.setZero();

    MotionFrame best;
    double best_err = std::numeric_limits<double>::infinity();
    for (int n = 0; n < cfg.best_of; ++n) {
      for (int i = 0; i < latent; ++i) z[i] = mu[i] + sigma[i] * rng.normal();
      const MotionFrame cand = model.decode_eval(z, out.back());
      const double err = (cand - reference[t]).squaredNorm();
      if (err < best_err) {
        best_err = err;
        best = cand;
      }
    }
    refine(best, reference[t], cfg);
    out.push_back(best);
  }
  return out;
}

}  // namespace mtk
