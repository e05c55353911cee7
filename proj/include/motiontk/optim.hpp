#pragma once

#include <functional>

#include "motiontk/tensor.hpp"

namespace mtk {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction.  Moment buffers follow the store's parameter
// order, so optimization is as deterministic as the gradients feeding it.
class Adam {
 public:
  using Config = AdamConfig;

  explicit Adam(ParamStore& params, Config cfg = Config());

  // One update from the currently accumulated gradients.  Does not zero
  // them; callers decide when accumulation windows end.
  void step(double lr);

  long steps_taken() const { return t_; }

 private:
  ParamStore& params_;
  Config cfg_;
  std::vector<Tensor> m_, v_;
  long t_ = 0;
};

// Central-difference check of the gradients a model produces.
//
// `loss(true)` must zero nothing itself: it evaluates the loss AND
// accumulates gradients into the store; `loss(false)` evaluates only.
// Returns the maximum relative error over every parameter coordinate, with
// the denominator floored at 1e-3 so near-zero gradients compare absolutely.
double grad_check(ParamStore& params,
                  const std::function<double(bool with_grad)>& loss,
                  double h = 1e-6);

}  // namespace mtk
