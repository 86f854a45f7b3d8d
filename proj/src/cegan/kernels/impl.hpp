#pragma once

#include <cstddef>

// Per-architecture kernel entry points. Only the translation units actually
// compiled for a target define these; the dispatcher guards every call with
// backend availability.

namespace cegan::kernels {

#if defined(CEGAN_HAVE_AVX2)
namespace avx2 {
void axpy_f32(float* dst, const float* x, float a, std::size_t n);
void axpy_f64(double* dst, const double* x, double a, std::size_t n);
float dot_f32(const float* x, const float* y, std::size_t n);
double dot_f64(const double* x, const double* y, std::size_t n);
float sum_f32(const float* x, std::size_t n);
double sum_f64(const double* x, std::size_t n);
void adam_f32(float* p, float* m, float* v, const float* g, std::size_t n,
              float lr, float b1, float b2, float eps, float inv_bc1, float inv_bc2);
void adam_f64(double* p, double* m, double* v, const double* g, std::size_t n,
              double lr, double b1, double b2, double eps, double inv_bc1, double inv_bc2);
}  // namespace avx2
#endif

#if defined(CEGAN_HAVE_NEON)
namespace neon {
void axpy_f32(float* dst, const float* x, float a, std::size_t n);
float dot_f32(const float* x, const float* y, std::size_t n);
float sum_f32(const float* x, std::size_t n);
void adam_f32(float* p, float* m, float* v, const float* g, std::size_t n,
              float lr, float b1, float b2, float eps, float inv_bc1, float inv_bc2);
}  // namespace neon
#endif

}  // namespace cegan::kernels
