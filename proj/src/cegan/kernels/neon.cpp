// NEON kernel variants (aarch64). Same bit-exactness contract as the AVX2
// set: mul+add only, 8-lane interleaved reductions (two q registers).

#include <arm_neon.h>

#include "cegan/kernels/impl.hpp"
#include "cegan/kernels/scalar.hpp"

namespace cegan::kernels::neon {

void axpy_f32(float* dst, const float* x, float a, std::size_t n) {
    const float32x4_t av = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t xv = vld1q_f32(x + i);
        float32x4_t dv = vld1q_f32(dst + i);
        vst1q_f32(dst + i, vaddq_f32(dv, vmulq_f32(av, xv)));
    }
    for (; i < n; ++i) dst[i] += a * x[i];
}

float dot_f32(const float* x, const float* y, std::size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);  // lanes 0..3
    float32x4_t acc1 = vdupq_n_f32(0.0f);  // lanes 4..7
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vaddq_f32(acc0, vmulq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
        acc1 = vaddq_f32(acc1, vmulq_f32(vld1q_f32(x + i + 4), vld1q_f32(y + i + 4)));
    }
    float lane[8];
    vst1q_f32(lane, acc0);
    vst1q_f32(lane + 4, acc1);
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i] * y[i];
    float s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

float sum_f32(const float* x, std::size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vaddq_f32(acc0, vld1q_f32(x + i));
        acc1 = vaddq_f32(acc1, vld1q_f32(x + i + 4));
    }
    float lane[8];
    vst1q_f32(lane, acc0);
    vst1q_f32(lane + 4, acc1);
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i];
    float s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

void adam_f32(float* p, float* m, float* v, const float* g, std::size_t n,
              float lr, float b1, float b2, float eps, float inv_bc1, float inv_bc2) {
    const float32x4_t b1v = vdupq_n_f32(b1);
    const float32x4_t b2v = vdupq_n_f32(b2);
    const float32x4_t omb1 = vdupq_n_f32(1.0f - b1);
    const float32x4_t omb2 = vdupq_n_f32(1.0f - b2);
    const float32x4_t lrv = vdupq_n_f32(lr);
    const float32x4_t epsv = vdupq_n_f32(eps);
    const float32x4_t bc1v = vdupq_n_f32(inv_bc1);
    const float32x4_t bc2v = vdupq_n_f32(inv_bc2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t gv = vld1q_f32(g + i);
        float32x4_t mv = vaddq_f32(vmulq_f32(b1v, vld1q_f32(m + i)), vmulq_f32(omb1, gv));
        float32x4_t vv = vaddq_f32(vmulq_f32(b2v, vld1q_f32(v + i)), vmulq_f32(omb2, vmulq_f32(gv, gv)));
        vst1q_f32(m + i, mv);
        vst1q_f32(v + i, vv);
        float32x4_t mhat = vmulq_f32(mv, bc1v);
        float32x4_t vhat = vmulq_f32(vv, bc2v);
        float32x4_t denom = vaddq_f32(vsqrtq_f32(vhat), epsv);
        float32x4_t step = vmulq_f32(lrv, vdivq_f32(mhat, denom));
        vst1q_f32(p + i, vsubq_f32(vld1q_f32(p + i), step));
    }
    if (i < n) scalar::adam_update(p + i, m + i, v + i, g + i, n - i, lr, b1, b2, eps, inv_bc1, inv_bc2);
}

}  // namespace cegan::kernels::neon
