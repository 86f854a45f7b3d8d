#pragma once

#include <cstddef>

#include "cegan/kernels/backend.hpp"

// Inner-loop arithmetic used by the tensor ops. Every routine has a scalar
// reference implementation and, where the platform provides them, AVX2/NEON
// variants selected at runtime. All variants are bit-identical: elementwise
// routines perform the same operation sequence per element (no FMA
// contraction), and reductions use a fixed 8-lane interleaved accumulation
// order in every backend.

namespace cegan::kernels {

// dst[i] += a * x[i]
void axpy(float* dst, const float* x, float a, std::size_t n);
void axpy(double* dst, const double* x, double a, std::size_t n);

// sum_i x[i] * y[i], 8-lane interleaved accumulation
float dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

// sum_i x[i], 8-lane interleaved accumulation
float sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);

// Bias-corrected Adam update for one parameter block:
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g;
//   p -= lr * (m*inv_bc1) / (sqrt(v*inv_bc2) + eps)
// where inv_bc1 = 1/(1-b1^t), inv_bc2 = 1/(1-b2^t).
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float inv_bc1, float inv_bc2);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double inv_bc1, double inv_bc2);

}  // namespace cegan::kernels
