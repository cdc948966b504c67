#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace mdecomp::kernels::detail {
namespace {

double neon_dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double res = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

DotNorms neon_dot_norms(const double* a, const double* b, std::size_t n) {
  float64x2_t ab = vdupq_n_f64(0.0);
  float64x2_t aa = vdupq_n_f64(0.0);
  float64x2_t bb = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t va = vld1q_f64(a + i);
    const float64x2_t vb = vld1q_f64(b + i);
    ab = vfmaq_f64(ab, va, vb);
    aa = vfmaq_f64(aa, va, va);
    bb = vfmaq_f64(bb, vb, vb);
  }
  DotNorms r{vaddvq_f64(ab), vaddvq_f64(aa), vaddvq_f64(bb)};
  for (; i < n; ++i) {
    r.ab += a[i] * b[i];
    r.aa += a[i] * a[i];
    r.bb += b[i] * b[i];
  }
  return r;
}

void neon_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void neon_dot_rows(const double* a, const double* rows, std::size_t nrows, std::size_t n,
                   double* out) {
  for (std::size_t j = 0; j < nrows; ++j) out[j] = neon_dot(a, rows + j * n, n);
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Isa::Neon, neon_dot, neon_dot_norms, neon_axpy, neon_dot_rows};
  return table;
}

}  // namespace mdecomp::kernels::detail
