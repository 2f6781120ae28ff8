#include "febe/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define FEBE_TARGET_AVX2 __attribute__((target("avx2,fma")))
#define FEBE_HAVE_X86 1
#else
#define FEBE_TARGET_AVX2
#define FEBE_HAVE_X86 0
#endif

namespace febe::simd::avx2 {

#if FEBE_HAVE_X86

namespace {

FEBE_TARGET_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

FEBE_TARGET_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

FEBE_TARGET_AVX2 void axpy(double alpha, const double* x, double* y,
                           std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

FEBE_TARGET_AVX2 void gemv(std::size_t rows, std::size_t cols, const double* a,
                           const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

FEBE_TARGET_AVX2 void squared_distances(double x0, double y0, const double* xs,
                                        const double* ys, double* out,
                                        std::size_t n) {
  const __m256d vx0 = _mm256_set1_pd(x0);
  const __m256d vy0 = _mm256_set1_pd(y0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vx0);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vy0);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy)));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - x0;
    const double dy = ys[i] - y0;
    out[i] = dx * dx + dy * dy;
  }
}

#else

double dot(const double* x, const double* y, std::size_t n) {
  return scalar::dot(x, y, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  scalar::axpy(alpha, x, y, n);
}
void gemv(std::size_t rows, std::size_t cols, const double* a, const double* x,
          double* y) {
  scalar::gemv(rows, cols, a, x, y);
}
void squared_distances(double x0, double y0, const double* xs,
                       const double* ys, double* out, std::size_t n) {
  scalar::squared_distances(x0, y0, xs, ys, out, n);
}

#endif

}  // namespace febe::simd::avx2
