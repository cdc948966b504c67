#include "mdecomp/embedding.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "mdecomp/error.hpp"
#include "mdecomp/kernels.hpp"
#include "mdecomp/text_format.hpp"

namespace mdecomp {

void EmbeddingStore::add(std::string id, std::span<const double> values) {
  if (values.size() != dim_) {
    throw Error(ErrorKind::Format, "row '" + id + "' has " + std::to_string(values.size()) +
                                       " components, expected " + std::to_string(dim_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Format, "row '" + id + "' has a non-finite component");
  }
  if (index_.find(id) != index_.end()) throw Error(ErrorKind::Format, "duplicate embedding id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), values.begin(), values.end());
}

std::optional<std::size_t> EmbeddingStore::row_of(std::string_view id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingStore::vector(std::string_view id) const {
  const auto r = row_of(id);
  if (!r) throw Error(ErrorKind::MissingEmbedding, "no embedding for sentence '" + std::string(id) + "'");
  return row(*r);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::size_t parse_count(std::string_view token, const char* what) {
  double v = 0.0;
  if (!parse_double(token, v) || v < 0 || v != std::floor(v)) {
    throw Error(ErrorKind::Format, std::string("EMB1 header: bad ") + what + " '" + std::string(token) + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

EmbeddingStore parse_embeddings(std::string_view contents) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    while (pos < contents.size()) {
      std::size_t end = contents.find('\n', pos);
      if (end == std::string_view::npos) end = contents.size();
      std::string_view line = contents.substr(pos, end - pos);
      pos = end + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") != std::string_view::npos) return line;
    }
    return std::nullopt;
  };

  const auto header = next_line();
  if (!header) throw Error(ErrorKind::Format, "EMB1: missing header");
  const auto head = split_ws(*header);
  if (head.size() != 3 || head[0] != "EMB1") {
    throw Error(ErrorKind::Format, "EMB1: header must be 'EMB1 <count> <dim>'");
  }
  const std::size_t count = parse_count(head[1], "count");
  const std::size_t dim = parse_count(head[2], "dim");
  if (dim == 0) throw Error(ErrorKind::Format, "EMB1 header: dim must be positive");

  EmbeddingStore store(dim);
  std::vector<double> values(dim);
  while (const auto line = next_line()) {
    const auto tokens = split_ws(*line);
    const std::string id(tokens.front());
    if (tokens.size() != dim + 1) {
      throw Error(ErrorKind::Format, "row '" + id + "' has " + std::to_string(tokens.size() - 1) +
                                         " components, expected " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(tokens[k + 1], values[k])) {
        throw Error(ErrorKind::Format,
                    "row '" + id + "': '" + std::string(tokens[k + 1]) + "' is not a decimal number");
      }
    }
    store.add(id, values);
  }
  if (store.size() != count) {
    throw Error(ErrorKind::Format, "EMB1: header declares " + std::to_string(count) + " rows, found " +
                                       std::to_string(store.size()));
  }
  return store;
}

EmbeddingStore load_embeddings(const std::string& path) {
  try {
    return parse_embeddings(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string serialize_embeddings(const EmbeddingStore& store) {
  std::string out = "EMB1 " + std::to_string(store.size()) + " " + std::to_string(store.dim()) + "\n";
  for (std::size_t r = 0; r < store.size(); ++r) {
    out += store.ids()[r];
    for (double v : store.row(r)) {
      out.push_back(' ');
      out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

WhiteningTransform WhiteningTransform::identity(std::size_t dim) {
  WhiteningTransform t;
  t.dim = dim;
  t.mean.assign(dim, 0.0);
  t.transform.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) t.transform[i * dim + i] = 1.0;
  return t;
}

WhiteningTransform fit_whitening_rows(std::span<const double> rows, std::size_t dim, double eigenvalue_floor) {
  if (dim == 0) throw Error(ErrorKind::Dimension, "whitening needs a positive dimension");
  const std::size_t n = rows.size() / dim;
  if (n < 2) throw Error(ErrorKind::InsufficientData, "whitening needs at least 2 vectors, got " + std::to_string(n));
  if (!(eigenvalue_floor > 0.0)) throw Error(ErrorKind::Argument, "eigenvalue floor must be positive");

  std::vector<double> mean(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) kernels::axpy(1.0, rows.subspan(r * dim, dim), mean);
  for (double& m : mean) m /= static_cast<double>(n);

  // Upper triangle of the scatter matrix, accumulated row by row in input order.
  std::vector<double> centered(dim);
  std::vector<double> scatter(dim * dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < dim; ++k) centered[k] = rows[r * dim + k] - mean[k];
    for (std::size_t i = 0; i < dim; ++i) {
      const std::span<const double> tail(centered.data() + i, dim - i);
      kernels::axpy(centered[i], tail, std::span<double>(scatter.data() + i * dim + i, dim - i));
    }
  }

  Eigen::MatrixXd cov(dim, dim);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      const double c = scatter[i * dim + j] / denom;
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::Internal, "covariance eigendecomposition failed");
  Eigen::VectorXd scale(dim);
  for (std::size_t i = 0; i < dim; ++i) scale(i) = 1.0 / std::sqrt(std::max(eig.eigenvalues()(i), eigenvalue_floor));
  const Eigen::MatrixXd& u = eig.eigenvectors();
  const Eigen::MatrixXd w = u * scale.asDiagonal() * u.transpose();

  WhiteningTransform t;
  t.dim = dim;
  t.mean = std::move(mean);
  t.eigenvalue_floor = eigenvalue_floor;
  t.transform.resize(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) t.transform[i * dim + j] = w(i, j);
  }
  return t;
}

WhiteningTransform fit_whitening(const EmbeddingStore& store, std::span<const std::string> ids,
                                 double eigenvalue_floor) {
  if (ids.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "whitening needs at least 2 sentences, got " + std::to_string(ids.size()));
  }
  std::vector<double> rows;
  rows.reserve(ids.size() * store.dim());
  for (const auto& id : ids) {
    const auto v = store.vector(id);
    rows.insert(rows.end(), v.begin(), v.end());
  }
  return fit_whitening_rows(rows, store.dim(), eigenvalue_floor);
}

void apply_whitening_into(const WhiteningTransform& t, std::span<const double> v, std::span<double> out,
                          std::span<double> scratch) {
  if (v.size() != t.dim) {
    throw Error(ErrorKind::Dimension, "vector of length " + std::to_string(v.size()) +
                                          " does not match whitening dimension " + std::to_string(t.dim));
  }
  for (std::size_t k = 0; k < t.dim; ++k) scratch[k] = v[k] - t.mean[k];
  kernels::active().dot_rows(scratch.data(), t.transform.data(), t.dim, t.dim, out.data());
}

std::vector<double> apply_whitening(const WhiteningTransform& t, std::span<const double> v) {
  std::vector<double> out(t.dim);
  std::vector<double> scratch(t.dim);
  apply_whitening_into(t, v, out, scratch);
  return out;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::Dimension, "cosine distance of vectors with lengths " + std::to_string(a.size()) +
                                          " and " + std::to_string(b.size()));
  }
  const auto d = kernels::dot_norms(a, b);
  if (d.aa == 0.0 || d.bb == 0.0) throw Error(ErrorKind::UndefinedDistance, "cosine distance of a zero vector");
  const double cos = d.ab / (std::sqrt(d.aa) * std::sqrt(d.bb));
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

UnitRows make_unit_rows(const EmbeddingStore& store, const WhiteningTransform& whitening,
                        std::span<const std::string> ids) {
  const std::size_t dim = store.dim();
  if (whitening.dim != dim) {
    throw Error(ErrorKind::Dimension, "whitening dimension " + std::to_string(whitening.dim) +
                                          " does not match embeddings (" + std::to_string(dim) + ")");
  }
  std::vector<double> data(ids.size() * dim);
  std::vector<double> scratch(dim);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const std::span<double> out(data.data() + r * dim, dim);
    apply_whitening_into(whitening, store.vector(ids[r]), out, scratch);
    const double norm = std::sqrt(kernels::dot(out, out));
    if (norm == 0.0) {
      throw Error(ErrorKind::UndefinedDistance, "whitened embedding of '" + ids[r] + "' is the zero vector");
    }
    for (double& x : out) x /= norm;
  }
  return UnitRows(dim, std::vector<std::string>(ids.begin(), ids.end()), std::move(data));
}

}  // namespace mdecomp
