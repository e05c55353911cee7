#pragma once

#include <vector>

#include "motiontk/tensor.hpp"

namespace mtk {

// Tape-based reverse-mode autodiff over dense tensors.  Forward values are
// computed eagerly as ops are recorded; backward() sweeps the tape once in
// reverse.  All inner loops run through the kernels module or plain scalar
// loops with a fixed iteration order, so results are reproducible bit for
// bit across runs (and across the scalar/AVX2 backends).
//
// Node ids are indices into the tape; a Graph is cheap and single-use per
// training step.
class Graph {
 public:
  // Leaves.  input() copies; param() references the store entry and routes
  // gradients back into Param::grad on backward().
  int input(const Tensor& t);
  int param(Param& p);

  // y = x * w + broadcast(b); x is (B x m), w (m x n), b (1 x n).
  int affine(int x, int w, int b);
  int matmul(int a, int b);
  int elu(int x);                 // x > 0 ? x : expm1(x)
  int softmax(int x);             // row-wise
  int concat(int a, int b);       // column-wise, same row count
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);          // elementwise
  int mul_scalar(int a, double s);
  int add_scalar(int a, double s);
  int exp(int a);
  int clamp(int a, double lo, double hi);  // gradient is 0 where clamped
  int sum(int a);                 // all entries -> 1x1
  // out[r,:] = sum_k gates[r,k] * experts[k][r,:]; gates is (B x K).
  int blend(const std::vector<int>& experts, int gates);

  // Mean squared error over all entries: sum((a-b)^2) / count.  Composite.
  int mse(int a, int b);

  void backward(int loss);  // loss must be 1x1

  const Tensor& val(int id) const { return nodes_[id].val; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  enum class Op {
    input, param, affine, matmul, elu, softmax, concat, add, sub, mul,
    mul_scalar, add_scalar, exp, clamp, sum, blend,
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    std::vector<int> list;
    double s0 = 0.0, s1 = 0.0;
    Param* bound = nullptr;
    Tensor val, grad;
  };

  int push(Node n);
  void check_finite(int id) const;

  std::vector<Node> nodes_;
};

}  // namespace mtk
