#pragma once

// One-dimensional party positions from distance matrices (classical MDS),
// the RILE left-right index, category-salience ground-truth distances, and
// the statistics used to compare them (Pearson, Mantel).

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdecomp/corpus.hpp"
#include "mdecomp/similarity.hpp"

namespace mdecomp {

struct ScalingResult {
  std::vector<std::string> parties;
  std::vector<double> coordinate;  // first MDS axis, same order as parties
  double explained_ratio = 0.0;    // leading eigenvalue / sum of positive eigenvalues

  double coordinate_of(std::string_view party) const;
};

/// Torgerson scaling: B = -1/2 J (D o D) J, coordinate = sqrt(l1) v1. The sign
/// is fixed so the lexicographically first party with a nonzero coordinate is
/// positive. Throws UndefinedMatrix for NA entries, Argument for n < 2 or a
/// non-symmetric matrix.
ScalingResult classical_mds_axis1(const PartyDistanceMatrix& m);

struct RileCodes {
  std::set<std::string> right;
  std::set<std::string> left;

  /// Standard CMP definition with numeric codes ("104", "201", ...).
  static RileCodes cmp_default();
};

RileCodes parse_rile_codes_json(std::string_view contents);

/// (R - L) / N over the party's coded sentences (N includes every code, "0" too).
/// Throws UndefinedScore when N = 0, Validation when the code sets overlap.
double rile(const Corpus& corpus, std::string_view party, const RileCodes& codes);

struct RileScores {
  std::map<std::string, double> scores;
  RileCodes codes;
};

RileScores rile_scores(const Corpus& corpus, const RileCodes& codes);

/// Euclidean distances between per-party category frequency vectors (count / N,
/// N = coded sentences of the party). With `restrict_to`, only those codes form
/// the vector; N is unchanged. Throws InsufficientData for parties without codes.
PartyDistanceMatrix salience_distance_matrix(const Corpus& corpus, const std::set<std::string>* restrict_to = nullptr);

struct PearsonResult {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, Student t with n - 2 degrees of freedom
  std::size_t n = 0;
};

/// Throws Argument for length mismatch or n < 3, UndefinedCorrelation for zero variance.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

enum class MantelMode { Exact, Sampled };

struct MantelResult {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n_permutations = 0;
  MantelMode mode = MantelMode::Exact;
};

inline constexpr std::size_t kMaxExactMantelParties = 7;

/// Pearson r over upper-triangle entries and the one-sided upper-tail
/// permutation p-value under simultaneous row/column permutations of `b`.
/// n <= 7 enumerates all n! permutations (identity included); larger n draws
/// `n_permutations` permutations from a counter-based generator keyed by `seed`
/// and reports (count + 1) / (n_permutations + 1).
MantelResult mantel(const PartyDistanceMatrix& a, const PartyDistanceMatrix& b, std::size_t n_permutations = 9999,
                    std::uint64_t seed = 0);

struct RileCorrelation {
  double r = 0.0;
  double abs_r = 0.0;
  double p_value = 1.0;
};

RileCorrelation correlate_scaling_with_rile(const ScalingResult& scaling, const RileScores& rile);

/// Pearson correlation across domains present in both maps (the key sets must match).
PearsonResult accuracy_vs_mantel(const std::map<std::string, double>& per_domain_accuracy,
                                 const std::map<std::string, double>& per_domain_mantel);

}  // namespace mdecomp
