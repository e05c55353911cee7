#include "motiontk/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace mtk::kernels {

namespace {

void matmul_scalar(const double* a, const double* b, double* c, int m, int k,
                   int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + std::size_t(i) * n;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    const double* arow = a + std::size_t(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b + std::size_t(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void add_scalar(const double* a, const double* b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}
void sub_scalar(const double* a, const double* b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}
void mul_scalar(const double* a, const double* b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}
void scale_scalar(const double* a, double s, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * s;
}
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

struct Ops {
  void (*matmul)(const double*, const double*, double*, int, int, int, bool);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(const double*, double, double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Ops kScalarOps = {matmul_scalar, add_scalar, sub_scalar, mul_scalar,
                            scale_scalar, axpy_scalar};

}  // namespace

namespace detail {
// Defined in kernels_avx2.cpp, which is only compiled on x86-64.
void matmul_avx2(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate);
void add_avx2(const double* a, const double* b, double* y, std::size_t n);
void sub_avx2(const double* a, const double* b, double* y, std::size_t n);
void mul_avx2(const double* a, const double* b, double* y, std::size_t n);
void scale_avx2(const double* a, double s, double* y, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
}  // namespace detail

namespace {

#if defined(MTK_HAVE_AVX2_TU)
constexpr Ops kAvx2Ops = {detail::matmul_avx2, detail::add_avx2,
                          detail::sub_avx2,    detail::mul_avx2,
                          detail::scale_avx2,  detail::axpy_avx2};
#endif

bool cpu_has_avx2() {
#if defined(MTK_HAVE_AVX2_TU)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

struct State {
  Backend backend;
  const Ops* ops;
};

State initial_state() {
  Backend b = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("MTK_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) b = Backend::scalar;
    // "avx2" asks for the default detection; silently ignored if absent.
  }
#if defined(MTK_HAVE_AVX2_TU)
  return {b, b == Backend::avx2 ? &kAvx2Ops : &kScalarOps};
#else
  return {Backend::scalar, &kScalarOps};
#endif
}

State& state() {
  static State s = initial_state();
  return s;
}

}  // namespace

Backend active() { return state().backend; }

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

bool avx2_available() { return cpu_has_avx2(); }

void force_backend(Backend b) {
  if (b == Backend::avx2) {
    if (!cpu_has_avx2()) {
      throw std::runtime_error("avx2 kernels not available on this machine");
    }
#if defined(MTK_HAVE_AVX2_TU)
    state() = {Backend::avx2, &kAvx2Ops};
#endif
    return;
  }
  state() = {Backend::scalar, &kScalarOps};
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool accumulate) {
  state().ops->matmul(a, b, c, m, k, n, accumulate);
}
void add(const double* a, const double* b, double* y, std::size_t n) {
  state().ops->add(a, b, y, n);
}
void sub(const double* a, const double* b, double* y, std::size_t n) {
  state().ops->sub(a, b, y, n);
}
void mul(const double* a, const double* b, double* y, std::size_t n) {
  state().ops->mul(a, b, y, n);
}
void scale(const double* a, double s, double* y, std::size_t n) {
  state().ops->scale(a, s, y, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  state().ops->axpy(alpha, x, y, n);
}

}  // namespace mtk::kernels
