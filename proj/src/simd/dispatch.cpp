#include <atomic>
#include <cassert>
#include <stdexcept>

#include "febe/simd/kernels.hpp"

namespace febe::simd {

namespace {

Isa probe() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd kernel: length mismatch");
}

}  // namespace

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

void force_isa(Isa isa) {
  if (isa == Isa::kAvx2 && detected_isa() != Isa::kAvx2) isa = Isa::kScalar;
  current().store(isa, std::memory_order_relaxed);
}

void reset_isa() { current().store(detected_isa(), std::memory_order_relaxed); }

double dot(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size(), y.size());
  return active_isa() == Isa::kAvx2 ? avx2::dot(x.data(), y.data(), x.size())
                                    : scalar::dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  if (active_isa() == Isa::kAvx2)
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  else
    scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(std::size_t rows, std::size_t cols, const double* a,
          std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), cols);
  check_sizes(y.size(), rows);
  if (active_isa() == Isa::kAvx2)
    avx2::gemv(rows, cols, a, x.data(), y.data());
  else
    scalar::gemv(rows, cols, a, x.data(), y.data());
}

void squared_distances(double x0, double y0, std::span<const double> xs,
                       std::span<const double> ys, std::span<double> out) {
  check_sizes(xs.size(), ys.size());
  check_sizes(xs.size(), out.size());
  if (active_isa() == Isa::kAvx2)
    avx2::squared_distances(x0, y0, xs.data(), ys.data(), out.data(),
                            xs.size());
  else
    scalar::squared_distances(x0, y0, xs.data(), ys.data(), out.data(),
                              xs.size());
}

}  // namespace febe::simd
