#include "cegan/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "cegan/errors.hpp"
#include "cegan/kernels/impl.hpp"
#include "cegan/kernels/scalar.hpp"

namespace cegan::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(CEGAN_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

bool cpu_has_neon() {
#if defined(CEGAN_HAVE_NEON)
    return true;  // baseline on aarch64
#else
    return false;
#endif
}

Backend detect_backend() {
    if (const char* env = std::getenv("CEGAN_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && cpu_has_neon()) return Backend::neon;
        return Backend::scalar;  // unknown or unavailable request: safe fallback
    }
    if (cpu_has_avx2()) return Backend::avx2;
    if (cpu_has_neon()) return Backend::neon;
    return Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
    static std::atomic<Backend> slot{detect_backend()};
    return slot;
}

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return cpu_has_avx2();
        case Backend::neon: return cpu_has_neon();
    }
    return false;
}

void set_backend(Backend b) {
    if (!backend_available(b))
        throw ConfigError(std::string("kernel backend '") + backend_name(b) +
                          "' is not available on this host");
    backend_slot().store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

void axpy(float* dst, const float* x, float a, std::size_t n) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: avx2::axpy_f32(dst, x, a, n); return;
#endif
#if defined(CEGAN_HAVE_NEON)
        case Backend::neon: neon::axpy_f32(dst, x, a, n); return;
#endif
        default: scalar::axpy(dst, x, a, n); return;
    }
}

void axpy(double* dst, const double* x, double a, std::size_t n) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: avx2::axpy_f64(dst, x, a, n); return;
#endif
        default: scalar::axpy(dst, x, a, n); return;
    }
}

float dot(const float* x, const float* y, std::size_t n) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: return avx2::dot_f32(x, y, n);
#endif
#if defined(CEGAN_HAVE_NEON)
        case Backend::neon: return neon::dot_f32(x, y, n);
#endif
        default: return scalar::dot(x, y, n);
    }
}

double dot(const double* x, const double* y, std::size_t n) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: return avx2::dot_f64(x, y, n);
#endif
        default: return scalar::dot(x, y, n);
    }
}

float sum(const float* x, std::size_t n) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: return avx2::sum_f32(x, n);
#endif
#if defined(CEGAN_HAVE_NEON)
        case Backend::neon: return neon::sum_f32(x, n);
#endif
        default: return scalar::sum(x, n);
    }
}

double sum(const double* x, std::size_t n) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: return avx2::sum_f64(x, n);
#endif
        default: return scalar::sum(x, n);
    }
}

void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float inv_bc1, float inv_bc2) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: avx2::adam_f32(p, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2); return;
#endif
#if defined(CEGAN_HAVE_NEON)
        case Backend::neon: neon::adam_f32(p, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2); return;
#endif
        default: scalar::adam_update(p, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2); return;
    }
}

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double inv_bc1, double inv_bc2) {
    switch (active_backend()) {
#if defined(CEGAN_HAVE_AVX2)
        case Backend::avx2: avx2::adam_f64(p, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2); return;
#endif
        default: scalar::adam_update(p, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2); return;
    }
}

}  // namespace cegan::kernels
