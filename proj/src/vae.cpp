#include "motiontk/vae.hpp"

#include <stdexcept>

namespace mtk {

namespace {

Tensor from_frame(const MotionFrame& f) {
  Tensor t(1, kFrameDim);
  for (int i = 0; i < kFrameDim; ++i) t.v[i] = f[i];
  return t;
}

}  // namespace

VaeModel::VaeModel(VaeConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.input_dim <= 0 || cfg_.latent_dim <= 0 || cfg_.hidden_dim <= 0 ||
      cfg_.num_experts <= 0 || cfg_.gate_hidden <= 0) {
    throw std::invalid_argument("VaeModel: dimensions must be positive");
  }
  Rng rng(seed);
  const int D = cfg_.input_dim;
  const int L = cfg_.latent_dim;
  const int H = cfg_.hidden_dim;
  const int G = cfg_.gate_hidden;
  const int C = 2 * D;  // concatenated encoder/decoder feature width

  auto dense = [&](const std::string& name, int in, int out) {
    Param& w = params_.add(name + "_w", in, out);
    glorot_init(w.value, in, out, rng);
    params_.add(name + "_b", 1, out);  // biases start at zero
  };
  auto res_block = [&](const std::string& prefix, int dim) {
    dense(prefix + "_l1", dim, dim);
    dense(prefix + "_l2", dim, dim);
  };

  // Encoder: one residual block per input frame, then the Gaussian heads.
  res_block("enc_rb_cur", D);
  res_block("enc_rb_prev", D);
  dense("enc_mu", C, L);
  dense("enc_ls", C, L);

  // Decoder: latent expansion, conditioning residual block, gate, experts.
  dense("dec_expand", L, D);
  res_block("dec_rb_cond", D);
  dense("dec_gate_l1", C, G);
  dense("dec_gate_l2", G, cfg_.num_experts);
  for (int k = 0; k < cfg_.num_experts; ++k) {
    const std::string p = "dec_expert" + std::to_string(k);
    dense(p + "_l1", C, H);
    dense(p + "_l2", H, H);
    dense(p + "_l3", H, D);
  }
}

int VaeModel::residual_block(Graph& g, int x, const std::string& prefix) {
  const int h = g.elu(g.affine(x, g.param(params_.at(prefix + "_l1_w")),
                               g.param(params_.at(prefix + "_l1_b"))));
  const int d = g.affine(h, g.param(params_.at(prefix + "_l2_w")),
                         g.param(params_.at(prefix + "_l2_b")));
  return g.add(x, d);
}

VaeModel::EncoderOut VaeModel::encode(Graph& g, int x_cur, int x_prev) {
  const int e1 = residual_block(g, x_cur, "enc_rb_cur");
  const int e2 = residual_block(g, x_prev, "enc_rb_prev");
  const int h = g.concat(e1, e2);
  EncoderOut out;
  out.mu = g.affine(h, g.param(params_.at("enc_mu_w")),
                    g.param(params_.at("enc_mu_b")));
  const int raw = g.affine(h, g.param(params_.at("enc_ls_w")),
                           g.param(params_.at("enc_ls_b")));
  out.logsig = g.clamp(raw, cfg_.logsig_min, cfg_.logsig_max);
  out.sigma = g.exp(out.logsig);
  return out;
}

int VaeModel::decode(Graph& g, int z, int x_prev) {
  const int zx = g.elu(g.affine(z, g.param(params_.at("dec_expand_w")),
                                g.param(params_.at("dec_expand_b"))));
  const int cond = residual_block(g, x_prev, "dec_rb_cond");
  const int h = g.concat(zx, cond);

  const int gh = g.elu(g.affine(h, g.param(params_.at("dec_gate_l1_w")),
                                g.param(params_.at("dec_gate_l1_b"))));
  const int gates = g.softmax(g.affine(gh, g.param(params_.at("dec_gate_l2_w")),
                                       g.param(params_.at("dec_gate_l2_b"))));

  std::vector<int> experts;
  experts.reserve(cfg_.num_experts);
  for (int k = 0; k < cfg_.num_experts; ++k) {
    const std::string p = "dec_expert" + std::to_string(k);
    const int h1 = g.elu(g.affine(h, g.param(params_.at(p + "_l1_w")),
                                  g.param(params_.at(p + "_l1_b"))));
    const int h2 = g.elu(g.affine(h1, g.param(params_.at(p + "_l2_w")),
                                  g.param(params_.at(p + "_l2_b"))));
    experts.push_back(g.affine(h2, g.param(params_.at(p + "_l3_w")),
                               g.param(params_.at(p + "_l3_b"))));
  }
  return g.blend(experts, gates);
}

void VaeModel::encode_eval(const MotionFrame& x_cur, const MotionFrame& x_prev,
                           Eigen::VectorXd& mu, Eigen::VectorXd& sigma) {
  Graph g;
  const EncoderOut out =
      encode(g, g.input(from_frame(x_cur)), g.input(from_frame(x_prev)));
  mu.resize(cfg_.latent_dim);
  sigma.resize(cfg_.latent_dim);
  for (int i = 0; i < cfg_.latent_dim; ++i) {
    mu[i] = g.val(out.mu).v[i];
    sigma[i] = g.val(out.sigma).v[i];
  }
}

MotionFrame VaeModel::decode_eval(const Eigen::VectorXd& z,
                                  const MotionFrame& x_prev) {
  Graph g;
  Tensor zt(1, cfg_.latent_dim);
  for (int i = 0; i < cfg_.latent_dim; ++i) zt.v[i] = z[i];
  const int out = decode(g, g.input(zt), g.input(from_frame(x_prev)));
  MotionFrame f;
  for (int i = 0; i < kFrameDim; ++i) f[i] = g.val(out).v[i];
  return f;
}

}  // namespace mtk
