#include "mdecomp/pairwise.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "mdecomp/error.hpp"
#include "mdecomp/kernels.hpp"
#include "mdecomp/parallel.hpp"

namespace mdecomp {
namespace {

constexpr std::size_t kRowChunk = 16;

// Sum over j in [first, b.size()) of (1 - a_row . b_j).
double row_distance_sum(const double* a_row, const UnitRows& b, std::size_t first, std::vector<double>& dots) {
  const std::size_t count = b.size() - first;
  dots.resize(count);
  kernels::active().dot_rows(a_row, b.data() + first * b.dim(), count, b.dim(), dots.data());
  double acc = 0.0;
  for (double d : dots) acc += 1.0 - d;
  return acc;
}

}  // namespace

double mean_cross_cosine_distance(const UnitRows& a, const UnitRows& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyCategory, "mean distance over an empty sentence set");
  if (a.dim() != b.dim()) throw Error(ErrorKind::Dimension, "sentence sets have different dimensions");
  const double sum = parallel::ordered_sum(a.size(), kRowChunk, [&](std::size_t i) {
    thread_local std::vector<double> dots;
    return row_distance_sum(a.row(i).data(), b, 0, dots);
  });
  const double n = static_cast<double>(a.size()) * static_cast<double>(b.size());
  return std::clamp(sum / n, 0.0, 2.0);
}

double mean_within_cosine_distance(const UnitRows& a) {
  if (a.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "within-set distance needs at least 2 sentences, got " + std::to_string(a.size()));
  }
  const double sum = parallel::ordered_sum(a.size() - 1, kRowChunk, [&](std::size_t i) {
    thread_local std::vector<double> dots;
    return row_distance_sum(a.row(i).data(), a, i + 1, dots);
  });
  const double n = static_cast<double>(a.size()) * static_cast<double>(a.size() - 1) / 2.0;
  return std::clamp(sum / n, 0.0, 2.0);
}

}  // namespace mdecomp
