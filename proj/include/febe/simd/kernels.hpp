#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense inner loops used by the boundary-element assembly, the Steklov-Poincare
// products and the solver energy. Every kernel has a portable scalar reference
// and an AVX2/FMA variant; the variant is chosen once at startup from CPUID.
namespace febe::simd {

enum class Isa { kScalar, kAvx2 };

Isa detected_isa();
Isa active_isa();
std::string_view isa_name(Isa isa);

// Overrides the dispatch choice (tests use this to compare variants).
// Requesting kAvx2 on a machine without it falls back to kScalar.
void force_isa(Isa isa);
void reset_isa();

double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// y = A x with A stored row-major, rows x cols.
void gemv(std::size_t rows, std::size_t cols, const double* a,
          std::span<const double> x, std::span<double> y);

// out[i] = (xs[i]-x0)^2 + (ys[i]-y0)^2
void squared_distances(double x0, double y0, std::span<const double> xs,
                       std::span<const double> ys, std::span<double> out);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(std::size_t rows, std::size_t cols, const double* a, const double* x,
          double* y);
void squared_distances(double x0, double y0, const double* xs,
                       const double* ys, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(std::size_t rows, std::size_t cols, const double* a, const double* x,
          double* y);
void squared_distances(double x0, double y0, const double* xs,
                       const double* ys, double* out, std::size_t n);
}  // namespace avx2

}  // namespace febe::simd
