#pragma once

#include <cmath>
#include <cstddef>

// Scalar reference kernels. The SIMD variants must reproduce these bit for
// bit; reductions keep partial sums in 8 interleaved lanes (lane l holds
// elements with index = l mod 8) folded in lane order at the end, which is
// exactly the layout a 256-bit float register gives.

namespace cegan::kernels::scalar {

template <typename T>
inline void axpy(T* dst, const T* x, T a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += a * x[i];
}

template <typename T>
inline T dot(const T* x, const T* y, std::size_t n) {
    T lane[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) lane[l] += x[i + l] * y[i + l];
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i] * y[i];
    T s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

template <typename T>
inline T sum(const T* x, std::size_t n) {
    T lane[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) lane[l] += x[i + l];
    for (int l = 0; i < n; ++i, ++l) lane[l] += x[i];
    T s = lane[0];
    for (int l = 1; l < 8; ++l) s += lane[l];
    return s;
}

template <typename T>
inline void adam_update(T* p, T* m, T* v, const T* g, std::size_t n,
                        T lr, T b1, T b2, T eps, T inv_bc1, T inv_bc2) {
    const T one_minus_b1 = T(1) - b1;
    const T one_minus_b2 = T(1) - b2;
    for (std::size_t i = 0; i < n; ++i) {
        T gi = g[i];
        T mi = b1 * m[i] + one_minus_b1 * gi;
        T vi = b2 * v[i] + one_minus_b2 * (gi * gi);
        m[i] = mi;
        v[i] = vi;
        T mhat = mi * inv_bc1;
        T vhat = vi * inv_bc2;
        p[i] = p[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace cegan::kernels::scalar
