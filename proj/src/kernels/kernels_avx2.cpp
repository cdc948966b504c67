// Compiled with -mavx2 -mfma; only reached after a cpuid check.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace mdecomp::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double avx2_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

DotNorms avx2_dot_norms(const double* a, const double* b, std::size_t n) {
  __m256d ab = _mm256_setzero_pd();
  __m256d aa = _mm256_setzero_pd();
  __m256d bb = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    ab = _mm256_fmadd_pd(va, vb, ab);
    aa = _mm256_fmadd_pd(va, va, aa);
    bb = _mm256_fmadd_pd(vb, vb, bb);
  }
  DotNorms r{hsum(ab), hsum(aa), hsum(bb)};
  for (; i < n; ++i) {
    r.ab += a[i] * b[i];
    r.aa += a[i] * a[i];
    r.bb += b[i] * b[i];
  }
  return r;
}

void avx2_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four rows per pass so each load of `a` feeds four FMAs.
void avx2_dot_rows(const double* a, const double* rows, std::size_t nrows, std::size_t n,
                   double* out) {
  std::size_t j = 0;
  for (; j + 4 <= nrows; j += 4) {
    const double* r0 = rows + j * n;
    const double* r1 = r0 + n;
    const double* r2 = r1 + n;
    const double* r3 = r2 + n;
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d va = _mm256_loadu_pd(a + i);
      s0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(r0 + i), s0);
      s1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(r1 + i), s1);
      s2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(r2 + i), s2);
      s3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(r3 + i), s3);
    }
    double d0 = hsum(s0), d1 = hsum(s1), d2 = hsum(s2), d3 = hsum(s3);
    for (; i < n; ++i) {
      d0 += a[i] * r0[i];
      d1 += a[i] * r1[i];
      d2 += a[i] * r2[i];
      d3 += a[i] * r3[i];
    }
    out[j] = d0;
    out[j + 1] = d1;
    out[j + 2] = d2;
    out[j + 3] = d3;
  }
  for (; j < nrows; ++j) out[j] = avx2_dot(a, rows + j * n, n);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::Avx2, avx2_dot, avx2_dot_norms, avx2_axpy, avx2_dot_rows};
  return table;
}

}  // namespace mdecomp::kernels::detail
