#pragma once

// Precomputed sentence embeddings, the whitening post-processing step and
// cosine distances.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mdecomp {

/// Dense vectors keyed by sentence id, stored row-major in insertion order.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim = 0) : dim_(dim) {}

  /// Throws Format on wrong length, duplicate id, or non-finite components.
  void add(std::string id, std::span<const double> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  bool contains(std::string_view id) const { return index_.find(id) != index_.end(); }
  std::optional<std::size_t> row_of(std::string_view id) const;
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  /// Throws MissingEmbedding naming the id.
  std::span<const double> vector(std::string_view id) const;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// EMB1 text format: header "EMB1 <count> <dim>", then "<id> <f1> ... <f_dim>" per row.
EmbeddingStore parse_embeddings(std::string_view contents);
EmbeddingStore load_embeddings(const std::string& path);
std::string serialize_embeddings(const EmbeddingStore& store);

inline constexpr double kDefaultEigenvalueFloor = 1e-10;

/// y = transform * (x - mean), transform stored row-major (dim x dim).
struct WhiteningTransform {
  std::size_t dim = 0;
  std::vector<double> mean;
  std::vector<double> transform;
  double eigenvalue_floor = kDefaultEigenvalueFloor;

  static WhiteningTransform identity(std::size_t dim);
};

/// Symmetric (ZCA) whitening U diag(max(l, floor))^-1/2 U^T of the sample
/// covariance (divisor n - 1). Accumulation order is fixed, so the result is
/// reproducible bit for bit. Throws InsufficientData for fewer than 2 rows.
WhiteningTransform fit_whitening(const EmbeddingStore& store, std::span<const std::string> ids,
                                 double eigenvalue_floor = kDefaultEigenvalueFloor);
/// Same, over `rows` contiguous row-major vectors of length `dim`.
WhiteningTransform fit_whitening_rows(std::span<const double> rows, std::size_t dim,
                                      double eigenvalue_floor = kDefaultEigenvalueFloor);

std::vector<double> apply_whitening(const WhiteningTransform& t, std::span<const double> v);
void apply_whitening_into(const WhiteningTransform& t, std::span<const double> v, std::span<double> out,
                          std::span<double> scratch);

/// 1 - cos(a, b), clamped to [0, 2]. Throws UndefinedDistance for a zero vector
/// and Dimension for mismatched lengths.
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// Whitened, unit-normalised copies of a set of sentence vectors; the working
/// set for all mean-pairwise-cosine computations.
class UnitRows {
 public:
  UnitRows() = default;
  UnitRows(std::size_t dim, std::vector<std::string> ids, std::vector<double> data)
      : dim_(dim), ids_(std::move(ids)), data_(std::move(data)) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  const double* data() const noexcept { return data_.data(); }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
};

/// Throws MissingEmbedding for an id without a vector and UndefinedDistance
/// when a whitened vector is exactly zero.
UnitRows make_unit_rows(const EmbeddingStore& store, const WhiteningTransform& whitening,
                        std::span<const std::string> ids);

}  // namespace mdecomp
