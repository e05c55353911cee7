#include <doctest.h>

#include <Eigen/Dense>
#include <cstring>
#include <vector>

#include "motiontk/kernels.hpp"
#include "motiontk/rng.hpp"

using namespace mtk;
namespace k = mtk::kernels;

namespace {

std::vector<double> random_buf(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, 3.0);
  return v;
}

struct BackendGuard {
  k::Backend saved = k::active();
  ~BackendGuard() { k::force_backend(saved); }
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("matmul agrees with Eigen") {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + int(rng.uniform_index(40));
    const int kk = 1 + int(rng.uniform_index(40));
    const int n = 1 + int(rng.uniform_index(40));
    const auto a = random_buf(rng, std::size_t(m) * kk);
    const auto b = random_buf(rng, std::size_t(kk) * n);
    std::vector<double> c(std::size_t(m) * n, 7.0);
    k::matmul(a.data(), b.data(), c.data(), m, kk, n, false);

    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> ma(a.data(), m, kk), mb(b.data(), kk, n);
    RowMat expect = ma * mb;
    Eigen::Map<RowMat> mc(c.data(), m, n);
    CHECK((mc - expect).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("matmul accumulate adds onto the destination") {
  Rng rng(2);
  const int m = 5, kk = 7, n = 3;
  const auto a = random_buf(rng, m * kk);
  const auto b = random_buf(rng, kk * n);
  std::vector<double> c0(m * n, 0.0), c1 = random_buf(rng, m * n);
  std::vector<double> base = c1;
  k::matmul(a.data(), b.data(), c0.data(), m, kk, n, false);
  k::matmul(a.data(), b.data(), c1.data(), m, kk, n, true);
  for (int i = 0; i < m * n; ++i) {
    CHECK(c1[i] == doctest::Approx(base[i] + c0[i]).epsilon(1e-12));
  }
}

TEST_CASE("elementwise kernels match hand-rolled loops") {
  Rng rng(3);
  const std::size_t n = 1037;  // odd size, exercises the tails
  const auto a = random_buf(rng, n);
  const auto b = random_buf(rng, n);
  std::vector<double> y(n);

  k::add(a.data(), b.data(), y.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == a[i] + b[i]);
  k::sub(a.data(), b.data(), y.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == a[i] - b[i]);
  k::mul(a.data(), b.data(), y.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == a[i] * b[i]);
  k::scale(a.data(), 1.7, y.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == a[i] * 1.7);
  y = b;
  k::axpy(0.3, a.data(), y.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.3 * a[i]);
}

TEST_CASE("scalar and avx2 backends produce bit-identical results") {
  if (!k::avx2_available()) {
    MESSAGE("avx2 not available on this machine; skipping equivalence check");
    return;
  }
  BackendGuard guard;
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + int(rng.uniform_index(33));
    const int kk = 1 + int(rng.uniform_index(33));
    const int n = 1 + int(rng.uniform_index(33));
    const auto a = random_buf(rng, std::size_t(m) * kk);
    const auto b = random_buf(rng, std::size_t(kk) * n);
    const auto ew = random_buf(rng, std::size_t(m) * kk);

    std::vector<double> c_s(std::size_t(m) * n), c_v(std::size_t(m) * n);
    std::vector<double> y_s(a.size()), y_v(a.size());

    k::force_backend(k::Backend::scalar);
    k::matmul(a.data(), b.data(), c_s.data(), m, kk, n, false);
    k::add(a.data(), ew.data(), y_s.data(), a.size());
    std::vector<double> ax_s = ew;
    k::axpy(-2.5, a.data(), ax_s.data(), a.size());

    k::force_backend(k::Backend::avx2);
    k::matmul(a.data(), b.data(), c_v.data(), m, kk, n, false);
    k::add(a.data(), ew.data(), y_v.data(), a.size());
    std::vector<double> ax_v = ew;
    k::axpy(-2.5, a.data(), ax_v.data(), a.size());

    CHECK(bitwise_equal(c_s, c_v));
    CHECK(bitwise_equal(y_s, y_v));
    CHECK(bitwise_equal(ax_s, ax_v));
  }
}

TEST_CASE("forcing an unavailable backend throws") {
  if (k::avx2_available()) {
    MESSAGE("avx2 present; unavailable-backend path not reachable here");
    return;
  }
  CHECK_THROWS_AS(k::force_backend(k::Backend::avx2), std::runtime_error);
}
