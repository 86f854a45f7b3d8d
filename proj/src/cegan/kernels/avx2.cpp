// AVX2 kernel variants. Deliberately built from mul+add (no FMA) so results
// stay bit-identical with the scalar reference; reductions keep the same
// 8-lane interleaved accumulation the scalar code uses.

#include <immintrin.h>

#include "cegan/kernels/impl.hpp"
#include "cegan/kernels/scalar.hpp"

namespace cegan::kernels::avx2 {

void axpy_f32(float* dst, const float* x, float a, std::size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 xv = _mm256_loadu_ps(x + i);
        __m256 dv = _mm256_loadu_ps(dst + i);
        _mm256_storeu_ps(dst + i, _mm256_add_ps(dv, _mm256_mul_ps(av, xv)));
    }
    for (; i < n; ++i) dst[i] += a * x[i];
}

void axpy_f64(double* dst, const double* x, double a, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d dv = _mm256_loadu_pd(dst + i);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(dv, _mm256_mul_pd(av, xv)));
    }
    for (; i < n; ++i) dst[i] += a * x[i];
}

float dot_f32(const float* x, const float* y, std::size_t n) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 xv = _mm256_loadu_ps(x + i);
        __m256 yv = _mm256_loadu_ps(y + i);
        acc = _mm256_add_ps(acc, _mm256_mul_ps(xv, yv));
    }
    alignas(32) float lane[8];
    _mm256_store_ps(lane, acc);
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i] * y[i];
    float s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

double dot_f64(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();  // lanes 0..3
    __m256d acc1 = _mm256_setzero_pd();  // lanes 4..7
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    alignas(32) double lane[8];
    _mm256_store_pd(lane, acc0);
    _mm256_store_pd(lane + 4, acc1);
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i] * y[i];
    double s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

float sum_f32(const float* x, std::size_t n) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
    alignas(32) float lane[8];
    _mm256_store_ps(lane, acc);
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i];
    float s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

double sum_f64(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    alignas(32) double lane[8];
    _mm256_store_pd(lane, acc0);
    _mm256_store_pd(lane + 4, acc1);
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i];
    double s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

void adam_f32(float* p, float* m, float* v, const float* g, std::size_t n,
              float lr, float b1, float b2, float eps, float inv_bc1, float inv_bc2) {
    const __m256 b1v = _mm256_set1_ps(b1);
    const __m256 b2v = _mm256_set1_ps(b2);
    const __m256 omb1 = _mm256_set1_ps(1.0f - b1);
    const __m256 omb2 = _mm256_set1_ps(1.0f - b2);
    const __m256 lrv = _mm256_set1_ps(lr);
    const __m256 epsv = _mm256_set1_ps(eps);
    const __m256 bc1v = _mm256_set1_ps(inv_bc1);
    const __m256 bc2v = _mm256_set1_ps(inv_bc2);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 gv = _mm256_loadu_ps(g + i);
        __m256 mv = _mm256_add_ps(_mm256_mul_ps(b1v, _mm256_loadu_ps(m + i)), _mm256_mul_ps(omb1, gv));
        __m256 vv = _mm256_add_ps(_mm256_mul_ps(b2v, _mm256_loadu_ps(v + i)),
                                  _mm256_mul_ps(omb2, _mm256_mul_ps(gv, gv)));
        _mm256_storeu_ps(m + i, mv);
        _mm256_storeu_ps(v + i, vv);
        __m256 mhat = _mm256_mul_ps(mv, bc1v);
        __m256 vhat = _mm256_mul_ps(vv, bc2v);
        __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
        __m256 step = _mm256_mul_ps(lrv, _mm256_div_ps(mhat, denom));
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
    }
    if (i < n) scalar::adam_update(p + i, m + i, v + i, g + i, n - i, lr, b1, b2, eps, inv_bc1, inv_bc2);
}

void adam_f64(double* p, double* m, double* v, const double* g, std::size_t n,
              double lr, double b1, double b2, double eps, double inv_bc1, double inv_bc2) {
    const __m256d b1v = _mm256_set1_pd(b1);
    const __m256d b2v = _mm256_set1_pd(b2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - b1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - b2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    const __m256d bc1v = _mm256_set1_pd(inv_bc1);
    const __m256d bc2v = _mm256_set1_pd(inv_bc2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1v, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gv));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2v, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(omb2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        __m256d mhat = _mm256_mul_pd(mv, bc1v);
        __m256d vhat = _mm256_mul_pd(vv, bc2v);
        __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        __m256d step = _mm256_mul_pd(lrv, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    if (i < n) scalar::adam_update(p + i, m + i, v + i, g + i, n - i, lr, b1, b2, eps, inv_bc1, inv_bc2);
}

}  // namespace cegan::kernels::avx2
