#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "motiontk/rng.hpp"

namespace mtk {

// Dense row-major 2-D tensor.  Vectors are 1 x n or n x 1 as convenient;
// batches put one sample per row.
struct Tensor {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(std::size_t(r) * c, 0.0) {}

  std::size_t size() const { return v.size(); }
  double& at(int i, int j) { return v[std::size_t(i) * cols + j]; }
  double at(int i, int j) const { return v[std::size_t(i) * cols + j]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  void set_zero() { std::fill(v.begin(), v.end(), 0.0); }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape; accumulated by Graph::backward
};

// Named parameter collection with deterministic (insertion) order.  Pointers
// stay stable across adds, so graph nodes can hold them.
class ParamStore {
 public:
  Param& add(const std::string& name, int rows, int cols);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Param*> all();                  // insertion order
  std::vector<const Param*> all() const;
  void zero_grads();
  std::size_t total_params() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, std::size_t> index_;
};

// Uniform Glorot initialization: U(-L, L) with L = sqrt(6 / (fan_in+fan_out)).
void glorot_init(Tensor& w, int fan_in, int fan_out, Rng& rng);

}  // namespace mtk
