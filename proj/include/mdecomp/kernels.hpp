#pragma once

// Dense double-precision inner loops. Each entry point has a scalar reference
// implementation plus SIMD variants (AVX2+FMA on x86-64, NEON on aarch64);
// the active set is chosen once at first use from the CPU's capabilities and
// can be forced with the MDECOMP_KERNEL environment variable
// ("scalar", "avx2", "neon") or select_isa().

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mdecomp::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct DotNorms {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
};

/// Raw function table; one instance per ISA.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  DotNorms (*dot_norms)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[j] = a . rows[j], rows stored contiguously with stride n.
  void (*dot_rows)(const double* a, const double* rows, std::size_t nrows,
                   std::size_t n, double* out);
};

const KernelTable& scalar_table();
/// Tables compiled into this binary and supported by the running CPU.
std::vector<Isa> available_isas();
const KernelTable& table_for(Isa isa);

/// Active table (resolved on first call).
const KernelTable& active();
Isa active_isa();
/// Force a specific ISA; throws mdecomp::Error (Argument) if unavailable.
void select_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline DotNorms dot_norms(std::span<const double> a, std::span<const double> b) {
  return active().dot_norms(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace mdecomp::kernels
