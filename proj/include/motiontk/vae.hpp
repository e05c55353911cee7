#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motiontk/graph.hpp"
#include "motiontk/motion.hpp"
#include "motiontk/rng.hpp"

namespace mtk {

// Autoregressive conditional VAE over motion frames.  Each step encodes the
// current frame conditioned on the previous one into a diagonal Gaussian
// (latent 40), and decodes back through a mixture of experts whose softmax
// gate picks how to specialize across the pose space.
struct VaeConfig {
  int input_dim = kFrameDim;
  int latent_dim = 40;
  int hidden_dim = 256;   // expert width
  int num_experts = 6;
  int gate_hidden = 64;
  double beta = 3e-3;     // weight of the KL term in the loss
  // log-sigma is clamped into [log(1e-6), log(1e3)] before exponentiation.
  double logsig_min = -13.815510557964274;
  double logsig_max = 6.907755278982137;
};

class VaeModel {
 public:
  VaeModel(VaeConfig cfg, std::uint64_t seed);

  const VaeConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::size_t param_count() const { return params_.total_params(); }

  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }

  // Graph builders (batched; one sample per row).  Returned ids live in `g`.
  struct EncoderOut {
    int mu;        // (B x latent)
    int logsig;    // clamped log std dev
    int sigma;
  };
  EncoderOut encode(Graph& g, int x_cur, int x_prev);
  // z (B x latent) + conditioning frame -> reconstructed frame (B x 240).
  int decode(Graph& g, int z, int x_prev);

  // Single-frame convenience wrappers.
  void encode_eval(const MotionFrame& x_cur, const MotionFrame& x_prev,
                   Eigen::VectorXd& mu, Eigen::VectorXd& sigma);
  MotionFrame decode_eval(const Eigen::VectorXd& z, const MotionFrame& x_prev);

 private:
  int residual_block(Graph& g, int x, const std::string& prefix);

  VaeConfig cfg_;
  ParamStore params_;
  bool trained_ = false;
};

// ---------------------------------------------------------------------------
// Training: scheduled sampling over fixed windows.
//
// Epochs run through four stages.  During warmup and the supervised stage the
// model always conditions on ground truth (p = 1); across the transition
// stage p decays linearly to 0; the autoregressive stage conditions purely on
// the model's own (detached) predictions.  The learning rate ramps linearly
// over the warmup epochs, then decays geometrically.
// ---------------------------------------------------------------------------
struct TrainConfig {
  int window = 30;
  int warmup_epochs = 10;
  int supervised_epochs = 50;
  int transition_epochs = 150;
  int autoregressive_epochs = 200;
  double lr_warmup_start = 2e-6;
  double lr_warmup_end = 2e-5;
  double lr_decay = 0.99;
  int batch = 512;
  std::uint64_t seed = 1;

  int total_epochs() const {
    return warmup_epochs + supervised_epochs + transition_epochs +
           autoregressive_epochs;
  }

  // Short schedule with a 100x larger learning rate, sized for overfitting
  // small corpora on a single core in minutes rather than cluster-hours.
  static TrainConfig desk();
};

struct LossRow {
  int epoch;
  std::string stage;  // warmup | supervised | transition | autoregressive
  double p;
  double lr;
  double loss_reconst;
  double loss_kl;
};

// The learning rate / conditioning probability schedule, exposed separately
// so it can be pinned by tests.
double schedule_lr(const TrainConfig& cfg, int epoch);
double schedule_p(const TrainConfig& cfg, int epoch);
std::string schedule_stage(const TrainConfig& cfg, int epoch);

// Trains in place.  Each dataset entry is one clip's frame sequence; clips
// shorter than one window are skipped.  Returns one row per epoch.
std::vector<LossRow> train_vae(VaeModel& model,
                               const std::vector<std::vector<MotionFrame>>& data,
                               const TrainConfig& cfg);

void save_loss_csv(const std::vector<LossRow>& rows, const std::string& path);

// ---------------------------------------------------------------------------
// Augmentation: per-frame best-of-N sampling plus refinement.
// ---------------------------------------------------------------------------
struct AugmentConfig {
  int best_of = 2;        // latent draws per frame; closest to reference wins
  double d_p = 0.15;      // position deviation bound per 3-d block [m]
  double d_v = 2.0;       // velocity deviation bound per 3-d block [m/s]
  bool deterministic = false;  // force sigma to 0 (pure reconstruction)
};

// Generates one variant of `reference`.  Frame 0 is passed through; every
// later frame conditions on the variant's own previous frame.  Position and
// velocity blocks are clamped into balls around the reference and rotation
// blocks are re-orthonormalized, so outputs stay near the source motion.
// Requires a trained model.
std::vector<MotionFrame> augment_frames(VaeModel& model,
                                        const std::vector<MotionFrame>& reference,
                                        const AugmentConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Serialization (versioned JSON, exact double round trip).
// ---------------------------------------------------------------------------
void save_vae(const VaeModel& model, const std::string& path);
VaeModel load_vae(const std::string& path);

}  // namespace mtk
