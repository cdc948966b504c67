#pragma once

#include "mdecomp/kernels.hpp"

namespace mdecomp::kernels::detail {

double scalar_dot(const double* a, const double* b, std::size_t n);
DotNorms scalar_dot_norms(const double* a, const double* b, std::size_t n);
void scalar_axpy(double alpha, const double* x, double* y, std::size_t n);
void scalar_dot_rows(const double* a, const double* rows, std::size_t nrows,
                     std::size_t n, double* out);

#if defined(MDECOMP_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(MDECOMP_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace mdecomp::kernels::detail
