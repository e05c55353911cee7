#include "motiontk/graph.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "motiontk/kernels.hpp"

namespace mtk {

namespace {

// Materialized transpose; keeps the kernel API to one contiguous layout.
Tensor transposed(const Tensor& t) {
  Tensor out(t.cols, t.rows);
  for (int i = 0; i < t.rows; ++i) {
    for (int j = 0; j < t.cols; ++j) out.at(j, i) = t.at(i, j);
  }
  return out;
}

}  // namespace

int Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  const int id = int(nodes_.size()) - 1;
#ifndef NDEBUG
  check_finite(id);
#endif
  return id;
}

void Graph::check_finite(int id) const {
  for (double x : nodes_[id].val.v) {
    assert(std::isfinite(x) && "non-finite value in graph forward pass");
  }
  (void)id;
}

int Graph::input(const Tensor& t) {
  Node n;
  n.op = Op::input;
  n.val = t;
  return push(std::move(n));
}

int Graph::param(Param& p) {
  Node n;
  n.op = Op::param;
  n.bound = &p;
  n.val = p.value;
  return push(std::move(n));
}

int Graph::affine(int x, int w, int b) {
  const Tensor& xv = nodes_[x].val;
  const Tensor& wv = nodes_[w].val;
  const Tensor& bv = nodes_[b].val;
  if (xv.cols != wv.rows || bv.rows != 1 || bv.cols != wv.cols) {
    throw std::invalid_argument("affine: shape mismatch");
  }
  Node n;
  n.op = Op::affine;
  n.a = x;
  n.b = w;
  n.c = b;
  n.val = Tensor(xv.rows, wv.cols);
  kernels::matmul(xv.data(), wv.data(), n.val.data(), xv.rows, xv.cols, wv.cols);
  for (int i = 0; i < n.val.rows; ++i) {
    kernels::add(n.val.data() + std::size_t(i) * n.val.cols, bv.data(),
                 n.val.data() + std::size_t(i) * n.val.cols, n.val.cols);
  }
  return push(std::move(n));
}

int Graph::matmul(int a, int b) {
  const Tensor& av = nodes_[a].val;
  const Tensor& bv = nodes_[b].val;
  if (av.cols != bv.rows) throw std::invalid_argument("matmul: shape mismatch");
  Node n;
  n.op = Op::matmul;
  n.a = a;
  n.b = b;
  n.val = Tensor(av.rows, bv.cols);
  kernels::matmul(av.data(), bv.data(), n.val.data(), av.rows, av.cols, bv.cols);
  return push(std::move(n));
}

int Graph::elu(int x) {
  Node n;
  n.op = Op::elu;
  n.a = x;
  n.val = nodes_[x].val;
  for (auto& v : n.val.v) {
    if (v <= 0.0) v = std::expm1(v);
  }
  return push(std::move(n));
}

int Graph::softmax(int x) {
  const Tensor& xv = nodes_[x].val;
  Node n;
  n.op = Op::softmax;
  n.a = x;
  n.val = Tensor(xv.rows, xv.cols);
  for (int i = 0; i < xv.rows; ++i) {
    double mx = xv.at(i, 0);
    for (int j = 1; j < xv.cols; ++j) mx = std::max(mx, xv.at(i, j));
    double total = 0.0;
    for (int j = 0; j < xv.cols; ++j) {
      const double e = std::exp(xv.at(i, j) - mx);
      n.val.at(i, j) = e;
      total += e;
    }
    for (int j = 0; j < xv.cols; ++j) n.val.at(i, j) /= total;
  }
  return push(std::move(n));
}

int Graph::concat(int a, int b) {
  const Tensor& av = nodes_[a].val;
  const Tensor& bv = nodes_[b].val;
  if (av.rows != bv.rows) throw std::invalid_argument("concat: row mismatch");
  Node n;
  n.op = Op::concat;
  n.a = a;
  n.b = b;
  n.val = Tensor(av.rows, av.cols + bv.cols);
  for (int i = 0; i < av.rows; ++i) {
    for (int j = 0; j < av.cols; ++j) n.val.at(i, j) = av.at(i, j);
    for (int j = 0; j < bv.cols; ++j) n.val.at(i, av.cols + j) = bv.at(i, j);
  }
  return push(std::move(n));
}

int Graph::add(int a, int b) {
  const Tensor& av = nodes_[a].val;
  const Tensor& bv = nodes_[b].val;
  if (!av.same_shape(bv)) throw std::invalid_argument("add: shape mismatch");
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  n.val = Tensor(av.rows, av.cols);
  kernels::add(av.data(), bv.data(), n.val.data(), av.size());
  return push(std::move(n));
}

int Graph::sub(int a, int b) {
  const Tensor& av = nodes_[a].val;
  const Tensor& bv = nodes_[b].val;
  if (!av.same_shape(bv)) throw std::invalid_argument("sub: shape mismatch");
  Node n;
  n.op = Op::sub;
  n.a = a;
  n.b = b;
  n.val = Tensor(av.rows, av.cols);
  kernels::sub(av.data(), bv.data(), n.val.data(), av.size());
  return push(std::move(n));
}

int Graph::mul(int a, int b) {
  const Tensor& av = nodes_[a].val;
  const Tensor& bv = nodes_[b].val;
  if (!av.same_shape(bv)) throw std::invalid_argument("mul: shape mismatch");
  Node n;
  n.op = Op::mul;
  n.a = a;
  n.b = b;
  n.val = Tensor(av.rows, av.cols);
  kernels::mul(av.data(), bv.data(), n.val.data(), av.size());
  return push(std::move(n));
}

int Graph::mul_scalar(int a, double s) {
  Node n;
  n.op = Op::mul_scalar;
  n.a = a;
  n.s0 = s;
  n.val = nodes_[a].val;
  kernels::scale(nodes_[a].val.data(), s, n.val.data(), n.val.size());
  return push(std::move(n));
}

int Graph::add_scalar(int a, double s) {
  Node n;
  n.op = Op::add_scalar;
  n.a = a;
  n.s0 = s;
  n.val = nodes_[a].val;
  for (auto& v : n.val.v) v += s;
  return push(std::move(n));
}

int Graph::exp(int a) {
  Node n;
  n.op = Op::exp;
  n.a = a;
  n.val = nodes_[a].val;
  for (auto& v : n.val.v) v = std::exp(v);
  return push(std::move(n));
}

int Graph::clamp(int a, double lo, double hi) {
  Node n;
  n.op = Op::clamp;
  n.a = a;
  n.s0 = lo;
  n.s1 = hi;
  n.val = nodes_[a].val;
  for (auto& v : n.val.v) v = std::min(hi, std::max(lo, v));
  return push(std::move(n));
}

int Graph::sum(int a) {
  Node n;
  n.op = Op::sum;
  n.a = a;
  n.val = Tensor(1, 1);
  double total = 0.0;
  for (double v : nodes_[a].val.v) total += v;
  n.val.v[0] = total;
  return push(std::move(n));
}

int Graph::blend(const std::vector<int>& experts, int gates) {
  if (experts.empty()) throw std::invalid_argument("blend: no experts");
  const Tensor& gv = nodes_[gates].val;
  const Tensor& e0 = nodes_[experts[0]].val;
  if (gv.cols != int(experts.size()) || gv.rows != e0.rows) {
    throw std::invalid_argument("blend: gate shape mismatch");
  }
  Node n;
  n.op = Op::blend;
  n.list = experts;
  n.b = gates;
  n.val = Tensor(e0.rows, e0.cols);
  for (std::size_t k = 0; k < experts.size(); ++k) {
    const Tensor& ev = nodes_[experts[k]].val;
    if (!ev.same_shape(e0)) throw std::invalid_argument("blend: expert shape mismatch");
    for (int i = 0; i < e0.rows; ++i) {
      kernels::axpy(gv.at(i, int(k)), ev.data() + std::size_t(i) * e0.cols,
                    n.val.data() + std::size_t(i) * e0.cols, e0.cols);
    }
  }
  return push(std::move(n));
}

int Graph::mse(int a, int b) {
  const int d = sub(a, b);
  const int sq = mul(d, d);
  return mul_scalar(sum(sq), 1.0 / double(nodes_[a].val.size()));
}

void Graph::backward(int loss) {
  if (nodes_[loss].val.rows != 1 || nodes_[loss].val.cols != 1) {
    throw std::invalid_argument("backward: loss must be a scalar node");
  }
  for (auto& n : nodes_) {
    n.grad = Tensor(n.val.rows, n.val.cols);
  }
  nodes_[loss].grad.v[0] = 1.0;

  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    bool all_zero = true;
    for (double g : n.grad.v) {
      if (g != 0.0) { all_zero = false; break; }
    }
    if (all_zero) continue;
    const Tensor& g = n.grad;

    switch (n.op) {
      case Op::input:
        break;
      case Op::param:
        for (std::size_t i = 0; i < g.size(); ++i) n.bound->grad.v[i] += g.v[i];
        break;
      case Op::affine: {
        Tensor& xg = nodes_[n.a].grad;
        Tensor& wg = nodes_[n.b].grad;
        Tensor& bg = nodes_[n.c].grad;
        const Tensor& xv = nodes_[n.a].val;
        const Tensor& wv = nodes_[n.b].val;
        const Tensor wt = transposed(wv);
        kernels::matmul(g.data(), wt.data(), xg.data(), g.rows, g.cols, wt.cols,
                        /*accumulate=*/true);
        const Tensor xt = transposed(xv);
        kernels::matmul(xt.data(), g.data(), wg.data(), xt.rows, xt.cols, g.cols,
                        /*accumulate=*/true);
        for (int i = 0; i < g.rows; ++i) {
          kernels::add(bg.data(), g.data() + std::size_t(i) * g.cols, bg.data(),
                       g.cols);
        }
        break;
      }
      case Op::matmul: {
        const Tensor& av = nodes_[n.a].val;
        const Tensor& bv = nodes_[n.b].val;
        const Tensor bt = transposed(bv);
        kernels::matmul(g.data(), bt.data(), nodes_[n.a].grad.data(), g.rows,
                        g.cols, bt.cols, true);
        const Tensor at = transposed(av);
        kernels::matmul(at.data(), g.data(), nodes_[n.b].grad.data(), at.rows,
                        at.cols, g.cols, true);
        break;
      }
      case Op::elu: {
        Tensor& xg = nodes_[n.a].grad;
        const Tensor& xv = nodes_[n.a].val;
        for (std::size_t i = 0; i < g.size(); ++i) {
          xg.v[i] += g.v[i] * (xv.v[i] > 0.0 ? 1.0 : n.val.v[i] + 1.0);
        }
        break;
      }
      case Op::softmax: {
        Tensor& xg = nodes_[n.a].grad;
        for (int i = 0; i < g.rows; ++i) {
          double dot = 0.0;
          for (int j = 0; j < g.cols; ++j) dot += g.at(i, j) * n.val.at(i, j);
          for (int j = 0; j < g.cols; ++j) {
            xg.at(i, j) += n.val.at(i, j) * (g.at(i, j) - dot);
          }
        }
        break;
      }
      case Op::concat: {
        Tensor& ag = nodes_[n.a].grad;
        Tensor& bg = nodes_[n.b].grad;
        for (int i = 0; i < g.rows; ++i) {
          for (int j = 0; j < ag.cols; ++j) ag.at(i, j) += g.at(i, j);
          for (int j = 0; j < bg.cols; ++j) bg.at(i, j) += g.at(i, ag.cols + j);
        }
        break;
      }
      case Op::add:
        kernels::axpy(1.0, g.data(), nodes_[n.a].grad.data(), g.size());
        kernels::axpy(1.0, g.data(), nodes_[n.b].grad.data(), g.size());
        break;
      case Op::sub:
        kernels::axpy(1.0, g.data(), nodes_[n.a].grad.data(), g.size());
        kernels::axpy(-1.0, g.data(), nodes_[n.b].grad.data(), g.size());
        break;
      case Op::mul: {
        const Tensor& av = nodes_[n.a].val;
        const Tensor& bv = nodes_[n.b].val;
        Tensor& ag = nodes_[n.a].grad;
        Tensor& bg = nodes_[n.b].grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ag.v[i] += g.v[i] * bv.v[i];
          bg.v[i] += g.v[i] * av.v[i];
        }
        break;
      }
      case Op::mul_scalar:
        kernels::axpy(n.s0, g.data(), nodes_[n.a].grad.data(), g.size());
        break;
      case Op::add_scalar:
        kernels::axpy(1.0, g.data(), nodes_[n.a].grad.data(), g.size());
        break;
      case Op::exp: {
        Tensor& ag = nodes_[n.a].grad;
        for (std::size_t i = 0; i < g.size(); ++i) ag.v[i] += g.v[i] * n.val.v[i];
        break;
      }
      case Op::clamp: {
        Tensor& ag = nodes_[n.a].grad;
        const Tensor& av = nodes_[n.a].val;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (av.v[i] > n.s0 && av.v[i] < n.s1) ag.v[i] += g.v[i];
        }
        break;
      }
      case Op::sum: {
        Tensor& ag = nodes_[n.a].grad;
        const double gv = g.v[0];
        for (auto& x : ag.v) x += gv;
        break;
      }
      case Op::blend: {
        const Tensor& gv = nodes_[n.b].val;
        Tensor& gateg = nodes_[n.b].grad;
        for (std::size_t k = 0; k < n.list.size(); ++k) {
          const Tensor& ev = nodes_[n.list[k]].val;
          Tensor& eg = nodes_[n.list[k]].grad;
          for (int i = 0; i < g.rows; ++i) {
            kernels::axpy(gv.at(i, int(k)), g.data() + std::size_t(i) * g.cols,
                          eg.data() + std::size_t(i) * g.cols, g.cols);
            double dot = 0.0;
            const double* gr = g.data() + std::size_t(i) * g.cols;
            const double* er = ev.data() + std::size_t(i) * g.cols;
            for (int j = 0; j < g.cols; ++j) dot += gr[j] * er[j];
            gateg.at(i, int(k)) += dot;
          }
        }
        break;
      }
    }
  }
}

}  // namespace mtk
