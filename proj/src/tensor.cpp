#include "motiontk/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace mtk {

Param& ParamStore::add(const std::string& name, int rows, int cols) {
  if (index_.count(name)) {
    throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
  }
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Tensor(rows, cols);
  p->grad = Tensor(rows, cols);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("ParamStore: no parameter '" + name + "'");
  }
  return *params_[it->second];
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("ParamStore: no parameter '" + name + "'");
  }
  return *params_[it->second];
}

bool ParamStore::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->grad.set_zero();
}

std::size_t ParamStore::total_params() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void glorot_init(Tensor& w, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
  for (auto& x : w.v) x = rng.uniform(-limit, limit);
}

}  // namespace mtk
