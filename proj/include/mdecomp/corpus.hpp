#pragma once

// Annotated manifesto corpus: sentences with party/election attribution and
// optional fine-grained category codes, plus the domain scheme that groups
// codes into policy domains.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mdecomp {

inline constexpr std::string_view kHeadingCode = "H";
inline constexpr std::string_view kOtherDomain = "other";

struct Sentence {
  std::string id;
  std::string party;
  std::string election_date;  // "YYYY-MM"
  std::int64_t position = 0;
  std::string text;
  std::optional<std::string> code;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// One party's manifesto for one election.
struct ManifestoKey {
  std::string party;
  std::string election_date;

  friend auto operator<=>(const ManifestoKey&, const ManifestoKey&) = default;
};

struct ManifestoRange {
  ManifestoKey key;
  std::size_t begin = 0;  // indices into Corpus::sentences()
  std::size_t end = 0;
};

/// Immutable after construction. Sentences are kept in canonical order
/// (party, election_date, position); all indexes refer to that order.
class Corpus {
 public:
  Corpus() = default;
  /// Drops heading records, validates uniqueness, builds indexes.
  explicit Corpus(std::vector<Sentence> sentences);

  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }

  /// Party names in lexicographic order.
  std::vector<std::string> parties() const;
  bool has_party(std::string_view party) const;
  /// Sentence indices of a party, ordered by (election_date, position). Throws Lookup.
  const std::vector<std::size_t>& party_sentences(std::string_view party) const;

  const std::vector<ManifestoRange>& manifestos() const noexcept { return manifestos_; }

  /// Sentence indices carrying `code` (empty if none).
  const std::vector<std::size_t>& code_sentences(std::string_view code) const;
  std::vector<std::string> codes() const;

  const Sentence* find(std::string_view id) const;

 private:
  std::vector<Sentence> sentences_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_party_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_code_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<ManifestoRange> manifestos_;
};

enum class CorpusFormat { Auto, JsonLines, Csv };

/// Reads a corpus file. JSON Lines records look like
/// {"id": str, "party": str, "election_date": "YYYY-MM", "position": int, "text": str, "code": str|null}.
/// CSV uses the same field names as a header row.
Corpus ingest_corpus(const std::string& path, CorpusFormat format = CorpusFormat::Auto);
Corpus parse_corpus_jsonl(std::string_view contents);
Corpus parse_corpus_csv(std::string_view contents);
std::string serialize_corpus_jsonl(const Corpus& corpus);

/// Policy domains as disjoint sets of category codes, plus codes that carry no policy domain.
class DomainScheme {
 public:
  DomainScheme() = default;
  DomainScheme(std::map<std::string, std::set<std::string>> domains, std::set<std::string> other_codes);

  const std::map<std::string, std::set<std::string>>& domains() const noexcept { return domains_; }
  const std::set<std::string>& other_codes() const noexcept { return other_; }
  std::vector<std::string> domain_names() const;
  bool has_domain(std::string_view name) const { return domains_.find(std::string(name)) != domains_.end(); }

  /// Domain containing `code`; nullopt for other-coded and unknown codes.
  std::optional<std::string> domain_of(std::string_view code) const;
  /// Domain name, or "other" for other-coded and unknown codes.
  std::string label_for(std::string_view code) const;

 private:
  std::map<std::string, std::set<std::string>> domains_;
  std::set<std::string> other_;
  std::map<std::string, std::string, std::less<>> code_to_domain_;
};

DomainScheme parse_scheme_json(std::string_view contents);
DomainScheme load_scheme(const std::string& path);
std::string serialize_scheme_json(const DomainScheme& scheme);

/// Party sentences split by domain. Every domain of the scheme is present, possibly empty.
std::map<std::string, std::set<std::string>> slice_by_domain(const Corpus& corpus, const DomainScheme& scheme,
                                                              std::string_view party);

std::map<std::string, std::size_t> category_counts(const Corpus& corpus);

/// Gold domain labels: id -> domain name (or "other"). Uncoded sentences are absent.
std::map<std::string, std::string> annotated_labels(const Corpus& corpus, const DomainScheme& scheme);

}  // namespace mdecomp
