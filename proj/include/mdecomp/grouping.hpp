#pragma once

// Policy-domain grouping: category coherence distances from sentence
// embeddings, average-linkage (UPGMA) clustering, and turning a cut of the
// tree into a DomainScheme.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdecomp/corpus.hpp"
#include "mdecomp/embedding.hpp"

namespace mdecomp {

/// Symmetric, zero-diagonal distances between category codes (row-major).
struct CategoryDistanceMatrix {
  std::vector<std::string> codes;
  std::vector<double> d;

  std::size_t size() const noexcept { return codes.size(); }
  double at(std::size_t i, std::size_t j) const { return d[i * codes.size() + j]; }
};

struct CategoryCount {
  std::string code;
  std::size_t count = 0;
};

struct CategoryMatrixResult {
  CategoryDistanceMatrix matrix;
  std::vector<CategoryCount> leftovers;  // below min_count, for manual assignment
};

/// Mean cosine distance between whitened sentence embeddings of two categories.
/// For p != q every cross pair counts; for p == q the unordered distinct pairs.
double category_distance(const Corpus& corpus, const EmbeddingStore& store, const WhiteningTransform& whitening,
                         std::string_view p, std::string_view q);

/// Distances over every code occurring at least `min_count` times (codes in
/// `excluded` are skipped entirely). Throws InsufficientCategories below 2 codes.
CategoryMatrixResult build_category_matrix(const Corpus& corpus, const EmbeddingStore& store,
                                           const WhiteningTransform& whitening, std::size_t min_count = 10,
                                           const std::set<std::string>& excluded = {});

/// Leaves are cluster ids 0..n-1; merge m creates cluster id n + m.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;
};

/// UPGMA. Distances within 1e-12 (relative) of each other are ties, broken by the
/// pair key (smaller of the two clusters' least member codes, then the larger).
Dendrogram average_linkage_cluster(const CategoryDistanceMatrix& m);

/// Clusters ordered by their least member code; the position is the cluster id.
using Partition = std::vector<std::vector<std::string>>;

/// Partition left after undoing the last k - 1 merges. Throws Argument unless 1 <= k <= leaves.
Partition cut_dendrogram(const Dendrogram& dendrogram, std::size_t k);

struct StancePairCheck {
  std::string first;
  std::string second;
  std::size_t first_cluster = 0;
  std::size_t second_cluster = 0;
  bool same_cluster = false;
};

struct StanceReport {
  std::vector<StancePairCheck> pairs;
  std::size_t violations = 0;
  bool pass() const noexcept { return violations == 0; }
};

using CodePair = std::pair<std::string, std::string>;

/// Throws Lookup for a code that is not in the partition.
StanceReport check_stance_pairing(const Partition& partition, std::span<const CodePair> stance_pairs);

/// Names clusters (unnamed clusters become "cluster_<id>", clusters sharing a
/// name are merged), moves `other_codes` to the other bucket, then applies
/// overrides (code -> domain or "other") last. Throws Validation when an
/// override names an unknown domain or a code is overridden to two domains.
DomainScheme finalize_scheme(const Partition& partition, std::span<const CodePair> overrides,
                             const std::map<std::size_t, std::string>& names,
                             const std::set<std::string>& other_codes = {});

std::string category_matrix_csv(const CategoryDistanceMatrix& m);
std::string dendrogram_json(const Dendrogram& dendrogram);
std::string leftovers_json(std::span<const CategoryCount> leftovers);
std::string stance_report_json(const StanceReport& report);

}  // namespace mdecomp
