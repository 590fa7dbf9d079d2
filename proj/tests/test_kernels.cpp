#include <doctest.h>

#include <cmath>
#include <vector>

#include "memnav/core/errors.hpp"
#include "memnav/core/rng.hpp"
#include "memnav/kernels/kernels.hpp"

using namespace memnav;
namespace ker = memnav::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

struct BackendGuard {
    ker::Backend saved = ker::active_backend();
    ~BackendGuard() { ker::force_backend(saved); }
};

} // namespace

TEST_CASE("scalar kernels match naive loops") {
    BackendGuard guard;
    ker::force_backend(ker::Backend::scalar);
    Rng rng(11);
    for (const std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{64},
                                std::size_t{321}}) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);
        double want = 0;
        for (std::size_t i = 0; i < n; ++i) want += a[i] * b[i];
        CHECK(ker::dot(a.data(), b.data(), n) == doctest::Approx(want).epsilon(1e-14));

        auto y = random_vec(n, rng);
        auto y2 = y;
        ker::axpy(0.37, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) y2[i] += 0.37 * a[i];
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == y2[i]);
    }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels are equivalent to the scalar reference") {
    if (!ker::backend_available(ker::Backend::avx2)) return;
    BackendGuard guard;
    Rng rng(42);

    for (const std::size_t n :
         {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{15}, std::size_t{64},
          std::size_t{257}, std::size_t{1024}}) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);

        ker::force_backend(ker::Backend::scalar);
        const double dot_s = ker::dot(a.data(), b.data(), n);
        const double ssd_s = ker::sum_sq_diff(a.data(), b.data(), n);
        auto add_s = std::vector<double>(n), mul_s = std::vector<double>(n);
        ker::vadd(a.data(), b.data(), add_s.data(), n);
        ker::vmul(a.data(), b.data(), mul_s.data(), n);
        auto axpy_s = b;
        ker::axpy(1.7, a.data(), axpy_s.data(), n);
        auto fma_s = b;
        ker::vfma(a.data(), b.data(), fma_s.data(), n);
        auto scale_s = a;
        ker::scale(-0.3, scale_s.data(), n);

        ker::force_backend(ker::Backend::avx2);
        CHECK(ker::active_backend() == ker::Backend::avx2);
        const double dot_v = ker::dot(a.data(), b.data(), n);
        const double ssd_v = ker::sum_sq_diff(a.data(), b.data(), n);
        auto add_v = std::vector<double>(n), mul_v = std::vector<double>(n);
        ker::vadd(a.data(), b.data(), add_v.data(), n);
        ker::vmul(a.data(), b.data(), mul_v.data(), n);
        auto axpy_v = b;
        ker::axpy(1.7, a.data(), axpy_v.data(), n);
        auto fma_v = b;
        ker::vfma(a.data(), b.data(), fma_v.data(), n);
        auto scale_v = a;
        ker::scale(-0.3, scale_v.data(), n);

        // reductions and FMA-bearing ops may differ by rounding order only
        CHECK(dot_v == doctest::Approx(dot_s).epsilon(1e-12));
        CHECK(ssd_v == doctest::Approx(ssd_s).epsilon(1e-12));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(add_v[i] == add_s[i]); // same single operation per lane
            CHECK(mul_v[i] == mul_s[i]);
            CHECK(scale_v[i] == scale_s[i]);
            CHECK(axpy_v[i] == doctest::Approx(axpy_s[i]).epsilon(1e-14));
            CHECK(fma_v[i] == doctest::Approx(fma_s[i]).epsilon(1e-14));
        }
    }
}
#endif

TEST_CASE("forcing an unavailable backend throws") {
#if defined(__x86_64__) || defined(_M_X64)
    CHECK_THROWS_AS(ker::force_backend(ker::Backend::neon), ConfigError);
#else
    CHECK_THROWS_AS(ker::force_backend(ker::Backend::avx2), ConfigError);
#endif
}
