#include "memnav/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "memnav/core/errors.hpp"

namespace memnav::kernels {

namespace {

using detail::KernelTable;

const KernelTable* table_for(Backend b) {
    switch (b) {
    case Backend::scalar:
        return &detail::scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::avx2:
        return &detail::avx2_table();
#endif
#if defined(__aarch64__)
    case Backend::neon:
        return &detail::neon_table();
#endif
    default:
        return nullptr;
    }
}

Backend detect_backend() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::avx2;
#elif defined(__aarch64__)
    return Backend::neon;
#endif
    return Backend::scalar;
}

Backend resolve_initial() {
    if (const char* env = std::getenv("MEMNAV_KERNEL")) {
        const std::string v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
        if (v == "neon" && backend_available(Backend::neon)) return Backend::neon;
        if (v != "auto" && !v.empty())
            throw ConfigError("MEMNAV_KERNEL: unknown or unavailable backend '" + v + "'");
    }
    return detect_backend();
}

struct Dispatch {
    std::atomic<const KernelTable*> table;
    std::atomic<Backend> backend;
    Dispatch() : table(table_for(resolve_initial())), backend(resolve_initial()) {}
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

} // namespace

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#endif
#if defined(__aarch64__)
    if (b == Backend::neon) return true;
#endif
    return false;
}

Backend active_backend() { return dispatch().backend.load(std::memory_order_relaxed); }

const char* backend_name(Backend b) {
    switch (b) {
    case Backend::scalar:
        return "scalar";
    case Backend::avx2:
        return "avx2";
    case Backend::neon:
        return "neon";
    }
    return "unknown";
}

void force_backend(Backend b) {
    if (!backend_available(b))
        throw ConfigError(std::string("kernel backend unavailable on this CPU: ") + backend_name(b));
    dispatch().table.store(table_for(b), std::memory_order_relaxed);
    dispatch().backend.store(b, std::memory_order_relaxed);
}

double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().table.load(std::memory_order_relaxed)->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    dispatch().table.load(std::memory_order_relaxed)->axpy(alpha, x, y, n);
}

void scale(double alpha, double* x, std::size_t n) {
    dispatch().table.load(std::memory_order_relaxed)->scale(alpha, x, n);
}

void vadd(const double* a, const double* b, double* out, std::size_t n) {
    dispatch().table.load(std::memory_order_relaxed)->vadd(a, b, out, n);
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
    dispatch().table.load(std::memory_order_relaxed)->vmul(a, b, out, n);
}

void vfma(const double* a, const double* b, double* acc, std::size_t n) {
    dispatch().table.load(std::memory_order_relaxed)->vfma(a, b, acc, n);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    return dispatch().table.load(std::memory_order_relaxed)->sum_sq_diff(a, b, n);
}

} // namespace memnav::kernels
