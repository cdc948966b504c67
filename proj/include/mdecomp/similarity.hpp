#pragma once

// Party-by-party distances per policy domain (mean pairwise cosine distance of
// the two parties' domain sentences) and their aggregate.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdecomp/corpus.hpp"
#include "mdecomp/embedding.hpp"

namespace mdecomp {

inline constexpr std::string_view kAggregateTag = "aggregate";

/// sentence id -> domain name (or "other"); unlabelled sentences are absent.
using LabelMap = std::map<std::string, std::string>;

/// Symmetric with zero diagonal; nullopt marks an undefined pair.
struct PartyDistanceMatrix {
  std::vector<std::string> parties;
  std::vector<std::optional<double>> d;
  std::string tag;
  std::map<std::string, std::size_t> coverage;  // party -> sentences in this domain

  std::size_t size() const noexcept { return parties.size(); }
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return d[i * parties.size() + j]; }
  std::optional<double>& at(std::size_t i, std::size_t j) { return d[i * parties.size() + j]; }
  bool fully_defined() const;
  /// Throws UndefinedMatrix if any entry is undefined.
  std::vector<double> dense() const;
};

PartyDistanceMatrix make_matrix(std::vector<std::string> parties, std::string tag);

/// Whitened unit vectors of every (party, domain) slice, built once and reused
/// for all pairs. Sentences labelled "other" or unlabelled are left out.
class DomainSlices {
 public:
  DomainSlices(const Corpus& corpus, const EmbeddingStore& store, const WhiteningTransform& whitening,
               const DomainScheme& scheme, const LabelMap& labels);

  const std::vector<std::string>& parties() const noexcept { return parties_; }
  const std::vector<std::string>& domains() const noexcept { return domains_; }
  /// Throws Lookup for an unknown party or domain.
  const UnitRows& slice(std::string_view party, std::string_view domain) const;

 private:
  std::vector<std::string> parties_;
  std::vector<std::string> domains_;
  std::map<std::pair<std::string, std::string>, UnitRows, std::less<>> slices_;
};

/// Mean cross-pair cosine distance; nullopt when either party's slice is empty.
std::optional<double> domain_distance(const DomainSlices& slices, std::string_view domain, std::string_view p,
                                      std::string_view q);
std::optional<double> domain_distance(const Corpus& corpus, const EmbeddingStore& store,
                                      const WhiteningTransform& whitening, const DomainScheme& scheme,
                                      std::string_view domain, std::string_view p, std::string_view q,
                                      const LabelMap& labels);

/// Throws InsufficientData for fewer than 2 parties.
PartyDistanceMatrix build_domain_matrix(const DomainSlices& slices, std::string_view domain);
/// One matrix per scheme domain, in scheme order.
std::vector<PartyDistanceMatrix> build_domain_matrices(const DomainSlices& slices);

enum class AggregateMode { Unweighted, SalienceWeighted };

/// Entrywise mean over the domains where the pair is defined. Salience-weighted
/// mode weights a domain by the pair's combined sentence count there.
/// Throws Validation on inconsistent party lists.
PartyDistanceMatrix aggregate_matrix(std::span<const PartyDistanceMatrix> per_domain,
                                     AggregateMode mode = AggregateMode::Unweighted);

/// First row/column hold party names; cells are decimals or "NA".
std::string matrix_csv(const PartyDistanceMatrix& m);
std::string matrices_json(std::span<const PartyDistanceMatrix> matrices, std::string_view labels_source);
std::vector<PartyDistanceMatrix> parse_matrices_json(std::string_view contents);

}  // namespace mdecomp
