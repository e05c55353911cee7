// AVX2 variants of the dense kernels.  Compiled with -mavx2 -mno-fma in an
// isolated translation unit; nothing here runs unless the dispatcher selected
// the avx2 backend at runtime.
//
// Bit-compatibility with the scalar reference relies on two things: the
// vector lanes hold independent output elements (same per-element operation
// sequence as the scalar loops), and multiply/add are kept separate (no FMA),
// matching -ffp-contract=off on the scalar side.

#include <immintrin.h>

#include <algorithm>
#include <cstddef>

namespace mtk::kernels::detail {

void matmul_avx2(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate) {
  const int n4 = n - (n % 4);
  for (int i = 0; i < m; ++i) {
    double* crow = c + std::size_t(i) * n;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    const double* arow = a + std::size_t(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const __m256d avv = _mm256_set1_pd(av);
      const double* brow = b + std::size_t(kk) * n;
      int j = 0;
      for (; j < n4; j += 4) {
        const __m256d prod = _mm256_mul_pd(avv, _mm256_loadu_pd(brow + j));
        _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void add_avx2(const double* a, const double* b, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                          _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                          _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) y[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                          _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void scale_avx2(const double* a, double s, double* y, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), sv));
  }
  for (; i < n; ++i) y[i] = a[i] * s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace mtk::kernels::detail
