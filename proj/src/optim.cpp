#include "motiontk/optim.hpp"

#include <cmath>

namespace mtk {

Adam::Adam(ParamStore& params, Config cfg) : params_(params), cfg_(cfg) {
  for (Param* p : params_.all()) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  auto ps = params_.all();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    Tensor& w = ps[k]->value;
    const Tensor& g = ps[k]->grad;
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m.v[i] = cfg_.beta1 * m.v[i] + (1.0 - cfg_.beta1) * g.v[i];
      v.v[i] = cfg_.beta2 * v.v[i] + (1.0 - cfg_.beta2) * g.v[i] * g.v[i];
      const double mhat = m.v[i] / bc1;
      const double vhat = v.v[i] / bc2;
      w.v[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double grad_check(ParamStore& params,
                  const std::function<double(bool)>& loss, double h) {
  params.zero_grads();
  (void)loss(true);

  // Snapshot analytic gradients before the perturbation sweep.
  std::vector<Tensor> analytic;
  for (Param* p : params.all()) analytic.push_back(p->grad);

  double max_rel = 0.0;
  auto ps = params.all();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    Tensor& w = ps[k]->value;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w.v[i];
      w.v[i] = saved + h;
      const double up = loss(false);
      w.v[i] = saved - h;
      const double dn = loss(false);
      w.v[i] = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double an = analytic[k].v[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-3});
      max_rel = std::max(max_rel, std::abs(fd - an) / denom);
    }
  }
  return max_rel;
}

}  // namespace mtk
