#pragma once

#include <cstddef>

// Dense double-precision primitives behind the neural substrate. Every
// operation has a scalar reference implementation plus SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected once at startup from CPU
// capabilities or the MEMNAV_KERNEL environment variable
// (scalar|avx2|neon|auto). SIMD variants are equivalence-tested against
// the scalar reference; reductions may differ from scalar by summation
// order only.

namespace memnav::kernels {

enum class Backend { scalar, avx2, neon };

Backend active_backend();
const char* backend_name(Backend b);
// Test/CLI hook. Throws ConfigError if the backend is unavailable on this CPU.
void force_backend(Backend b);
bool backend_available(Backend b);

// dot product: sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] *= alpha
void scale(double alpha, double* x, std::size_t n);

// out[i] = a[i] + b[i]
void vadd(const double* a, const double* b, double* out, std::size_t n);

// out[i] = a[i] * b[i]
void vmul(const double* a, const double* b, double* out, std::size_t n);

// acc[i] += a[i] * b[i]
void vfma(const double* a, const double* b, double* acc, std::size_t n);

// sum_i (a[i]-b[i])^2
double sum_sq_diff(const double* a, const double* b, std::size_t n);

namespace detail {

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    void (*vadd)(const double*, const double*, double*, std::size_t);
    void (*vmul)(const double*, const double*, double*, std::size_t);
    void (*vfma)(const double*, const double*, double*, std::size_t);
    double (*sum_sq_diff)(const double*, const double*, std::size_t);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

} // namespace detail

} // namespace memnav::kernels
