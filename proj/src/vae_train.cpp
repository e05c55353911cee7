#include <cmath>
#include <fstream>
#include <stdexcept>

#include "motiontk/optim.hpp"
#include "motiontk/vae.hpp"

namespace mtk {

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.warmup_epochs = 5;
  c.supervised_epochs = 10;
  c.transition_epochs = 20;
  c.autoregressive_epochs = 15;
  c.lr_warmup_start = 2e-4;
  c.lr_warmup_end = 2e-3;
  c.batch = 64;
  return c;
}

double schedule_lr(const TrainConfig& cfg, int epoch) {
  if (epoch < cfg.warmup_epochs) {
    const double f = double(epoch) / double(cfg.warmup_epochs);
    return cfg.lr_warmup_start + (cfg.lr_warmup_end - cfg.lr_warmup_start) * f;
  }
  return cfg.lr_warmup_end * std::pow(cfg.lr_decay, double(epoch - cfg.warmup_epochs));
}

double schedule_p(const TrainConfig& cfg, int epoch) {
  const int sup_end = cfg.warmup_epochs + cfg.supervised_epochs;
  if (epoch < sup_end) return 1.0;
  const int trans_end = sup_end + cfg.transition_epochs;
  if (epoch < trans_end) {
    return 1.0 - double(epoch - sup_end + 1) / double(cfg.transition_epochs);
  }
  return 0.0;
}

std::string schedule_stage(const TrainConfig& cfg, int epoch) {
  if (epoch < cfg.warmup_epochs) return "warmup";
  if (epoch < cfg.warmup_epochs + cfg.supervised_epochs) return "supervised";
  if (epoch < cfg.warmup_epochs + cfg.supervised_epochs + cfg.transition_epochs) {
    return "transition";
  }
  return "autoregressive";
}

namespace {

struct Window {
  int seq;
  int start;
};

Tensor gather(const std::vector<std::vector<MotionFrame>>& data,
              const std::vector<Window>& wins,
              const std::vector<std::size_t>& order, std::size_t first,
              std::size_t count, int t) {
  Tensor out(int(count), kFrameDim);
  for (std::size_t r = 0; r < count; ++r) {
    const Window& w = wins[order[first + r]];
    const MotionFrame& f = data[w.seq][w.start + t];
    for (int i = 0; i < kFrameDim; ++i) out.at(int(r), i) = f[i];
  }
  return out;
}

}  // namespace

std::vector<LossRow> train_vae(VaeModel& model,
                               const std::vector<std::vector<MotionFrame>>& data,
                               const TrainConfig& cfg) {
  const int L = cfg.window;
  if (L < 2) throw std::invalid_argument("train_vae: window must be >= 2");
  std::vector<Window> wins;
  for (int s = 0; s < int(data.size()); ++s) {
    for (int start = 0; start + L <= int(data[s].size()); start += L) {
      wins.push_back({s, start});
    }
  }
  if (wins.empty()) {
    throw std::invalid_argument("train_vae: no clip is long enough for one window");
  }

  const int latent = model.config().latent_dim;
  const double beta = model.config().beta;
  Adam adam(model.params());
  Rng noise_rng(Rng::derive_seed(cfg.seed, 0xA1));

  std::vector<LossRow> rows;
  rows.reserve(cfg.total_epochs());

  std::vector<std::size_t> order(wins.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.total_epochs(); ++epoch) {
    const double lr = schedule_lr(cfg, epoch);
    const double p = schedule_p(cfg, epoch);
    Rng shuffle_rng(Rng::derive_seed(cfg.seed, 0xB000 + std::uint64_t(epoch)));
    shuffle_rng.shuffle(order);

    double mse_sum = 0.0, kl_sum = 0.0;
    long steps = 0;

    for (std::size_t first = 0; first < order.size(); first += cfg.batch) {
      const std::size_t B =
          std::min(std::size_t(cfg.batch), order.size() - first);

      // Rolling conditioning state: the model's own last prediction per row.
      Tensor pred_prev = gather(data, wins, order, first, B, 0);

      for (int t = 1; t < L; ++t) {
        const Tensor cur = gather(data, wins, order, first, B, t);
        const Tensor gt_prev = gather(data, wins, order, first, B, t - 1);

        // Scheduled sampling: per row, condition on ground truth with
        // probability p, else on the detached previous prediction.
        Tensor cond(int(B), kFrameDim);
        for (std::size_t r = 0; r < B; ++r) {
          const bool use_gt = noise_rng.bernoulli(p);
          const Tensor& src = use_gt ? gt_prev : pred_prev;
          for (int i = 0; i < kFrameDim; ++i) {
            cond.at(int(r), i) = src.at(int(r), i);
          }
        }
        Tensor eta(int(B), latent);
        for (auto& e : eta.v) e = noise_rng.normal();

        model.params().zero_grads();
        Graph g;
        const int xc = g.input(cur);
        const int xp = g.input(cond);
        const VaeModel::EncoderOut enc = model.encode(g, xc, xp);
        const int z = g.add(enc.mu, g.mul(enc.sigma, g.input(eta)));
        const int xhat = model.decode(g, z, xp);

        const int mse = g.mse(xhat, xc);
        // KL(N(mu, sigma) || N(0, 1)) summed over latent dims, averaged over
        // the batch: 0.5 * sum(mu^2 + sigma^2 - 1 - 2 log sigma).
        const int inner = g.add_scalar(
            g.sub(g.add(g.mul(enc.mu, enc.mu), g.exp(g.mul_scalar(enc.logsig, 2.0))),
                  g.mul_scalar(enc.logsig, 2.0)),
            -1.0);
        const int kl = g.mul_scalar(g.sum(inner), 0.5 / double(B));
        const int loss = g.add(mse, g.mul_scalar(kl, beta));
        g.backward(loss);
        adam.step(lr);

        mse_sum += g.val(mse).v[0];
        kl_sum += g.val(kl).v[0];
        ++steps;
        pred_prev = g.val(xhat);
      }
    }

    rows.push_back({epoch, schedule_stage(cfg, epoch), p, lr,
                    mse_sum / double(steps), kl_sum / double(steps)});
  }

  model.set_trained(true);
  return rows;
}

void save_loss_csv(const std::vector<LossRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("loss csv: cannot write '" + path + "'");
  out << "epoch,stage,p,lr,loss_reconst,loss_kl\n";
  char buf[160];
  for (const LossRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                  r.stage.c_str(), r.p, r.lr, r.loss_reconst, r.loss_kl);
    out << buf;
  }
}

}  // namespace mtk
