#pragma once

#include <cstddef>

// Dense kernels behind the tensor graph.  A scalar reference implementation
// is always present; an AVX2 variant is selected at runtime when the CPU
// supports it.  Both variants perform the same floating-point operations in
// the same order (vectorized over independent output columns, no FMA), so
// their results are bit-identical and reruns do not depend on the host CPU.
namespace mtk::kernels {

enum class Backend { scalar, avx2 };

Backend active();
const char* backend_name(Backend b);
bool avx2_available();

// Test hook; also honoured at startup via MTK_KERNELS=scalar|avx2.
// Forcing avx2 on a machine without it throws std::runtime_error.
void force_backend(Backend b);

// C (m x n) = A (m x k) * B (k x n), row-major, C overwritten unless
// accumulate is set.  Aliasing C with A or B is not allowed.
void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool accumulate = false);

void add(const double* a, const double* b, double* y, std::size_t n);
void sub(const double* a, const double* b, double* y, std::size_t n);
void mul(const double* a, const double* b, double* y, std::size_t n);
void scale(const double* a, double s, double* y, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

}  // namespace mtk::kernels
