#include "kernels_impl.hpp"

namespace mdecomp::kernels::detail {

double scalar_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

DotNorms scalar_dot_norms(const double* a, const double* b, std::size_t n) {
  DotNorms r;
  for (std::size_t i = 0; i < n; ++i) {
    r.ab += a[i] * b[i];
    r.aa += a[i] * a[i];
    r.bb += b[i] * b[i];
  }
  return r;
}

void scalar_axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scalar_dot_rows(const double* a, const double* rows, std::size_t nrows,
                     std::size_t n, double* out) {
  for (std::size_t j = 0; j < nrows; ++j) out[j] = scalar_dot(a, rows + j * n, n);
}

}  // namespace mdecomp::kernels::detail

namespace mdecomp::kernels {

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, detail::scalar_dot, detail::scalar_dot_norms,
                                 detail::scalar_axpy, detail::scalar_dot_rows};
  return table;
}

}  // namespace mdecomp::kernels
