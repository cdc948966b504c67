#include "mdecomp/similarity.hpp"

#include <algorithm>
#include <utility>

#include <json.hpp>

#include "mdecomp/error.hpp"
#include "mdecomp/pairwise.hpp"
#include "mdecomp/parallel.hpp"
#include "mdecomp/text_format.hpp"

namespace mdecomp {

using nlohmann::json;

bool PartyDistanceMatrix::fully_defined() const {
  return std::all_of(d.begin(), d.end(), [](const auto& v) { return v.has_value(); });
}

std::vector<double> PartyDistanceMatrix::dense() const {
  std::vector<double> out(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!d[k]) {
      throw Error(ErrorKind::UndefinedMatrix, "matrix '" + tag + "' has undefined entries (" +
                                                  parties[k / size()] + ", " + parties[k % size()] + ")");
    }
    out[k] = *d[k];
  }
  return out;
}

PartyDistanceMatrix make_matrix(std::vector<std::string> parties, std::string tag) {
  PartyDistanceMatrix m;
  m.d.assign(parties.size() * parties.size(), std::nullopt);
  m.parties = std::move(parties);
  m.tag = std::move(tag);
  return m;
}

DomainSlices::DomainSlices(const Corpus& corpus, const EmbeddingStore& store, const WhiteningTransform& whitening,
                           const DomainScheme& scheme, const LabelMap& labels)
    : parties_(corpus.parties()), domains_(scheme.domain_names()) {
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> ids;
  for (const auto& party : parties_) {
    for (const auto& domain : domains_) ids[{party, domain}];
    for (std::size_t idx : corpus.party_sentences(party)) {
      const Sentence& s = corpus.sentences()[idx];
      const auto it = labels.find(s.id);
      if (it == labels.end() || it->second == kOtherDomain) continue;
      const auto slot = ids.find({party, it->second});
      if (slot == ids.end()) {
        throw Error(ErrorKind::Lookup, "sentence '" + s.id + "' labelled with unknown domain '" + it->second + "'");
      }
      slot->second.push_back(s.id);
    }
  }
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [key, _] : ids) keys.push_back(key);
  std::vector<UnitRows> rows(keys.size());
  parallel::for_each_index(keys.size(), [&](std::size_t k) { rows[k] = make_unit_rows(store, whitening, ids[keys[k]]); });
  for (std::size_t k = 0; k < keys.size(); ++k) slices_.emplace(keys[k], std::move(rows[k]));
}

const UnitRows& DomainSlices::slice(std::string_view party, std::string_view domain) const {
  const auto it = slices_.find(std::make_pair(std::string(party), std::string(domain)));
  if (it == slices_.end()) {
    if (!std::binary_search(parties_.begin(), parties_.end(), party)) {
      throw Error(ErrorKind::Lookup, "unknown party '" + std::string(party) + "'");
    }
    throw Error(ErrorKind::Lookup, "unknown domain '" + std::string(domain) + "'");
  }
  return it->second;
}

std::optional<double> domain_distance(const DomainSlices& slices, std::string_view domain, std::string_view p,
                                      std::string_view q) {
  // Fixed operand order keeps d(p, q) == d(q, p) bit for bit.
  if (q < p) std::swap(p, q);
  const UnitRows& a = slices.slice(p, domain);
  const UnitRows& b = slices.slice(q, domain);
  if (a.empty() || b.empty()) return std::nullopt;
  return mean_cross_cosine_distance(a, b);
}

std::optional<double> domain_distance(const Corpus& corpus, const EmbeddingStore& store,
                                      const WhiteningTransform& whitening, const DomainScheme& scheme,
                                      std::string_view domain, std::string_view p, std::string_view q,
                                      const LabelMap& labels) {
  if (!scheme.has_domain(domain)) throw Error(ErrorKind::Lookup, "unknown domain '" + std::string(domain) + "'");
  if (!corpus.has_party(p)) throw Error(ErrorKind::Lookup, "unknown party '" + std::string(p) + "'");
  if (!corpus.has_party(q)) throw Error(ErrorKind::Lookup, "unknown party '" + std::string(q) + "'");
  if (q < p) std::swap(p, q);
  auto slice_ids = [&](std::string_view party) {
    std::vector<std::string> ids;
    for (std::size_t idx : corpus.party_sentences(party)) {
      const auto& id = corpus.sentences()[idx].id;
      const auto it = labels.find(id);
      if (it != labels.end() && it->second == domain) ids.push_back(id);
    }
    return ids;
  };
  const auto a = slice_ids(p);
  const auto b = slice_ids(q);
  if (a.empty() || b.empty()) return std::nullopt;
  return mean_cross_cosine_distance(make_unit_rows(store, whitening, a), make_unit_rows(store, whitening, b));
}

PartyDistanceMatrix build_domain_matrix(const DomainSlices& slices, std::string_view domain) {
  const auto& parties = slices.parties();
  if (parties.size() < 2) {
    throw Error(ErrorKind::InsufficientData, "party distances need at least 2 parties");
  }
  PartyDistanceMatrix m = make_matrix(parties, std::string(domain));
  const std::size_t n = parties.size();
  for (const auto& party : parties) m.coverage[party] = slices.slice(party, domain).size();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.coverage[parties[i]] > 0) m.at(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<std::optional<double>> values(pairs.size());
  parallel::for_each_index(pairs.size(), [&](std::size_t k) {
    values[k] = domain_distance(slices, domain, parties[pairs[k].first], parties[pairs[k].second]);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    m.at(pairs[k].first, pairs[k].second) = values[k];
    m.at(pairs[k].second, pairs[k].first) = values[k];
  }
  return m;
}

std::vector<PartyDistanceMatrix> build_domain_matrices(const DomainSlices& slices) {
  std::vector<PartyDistanceMatrix> out;
  for (const auto& domain : slices.domains()) out.push_back(build_domain_matrix(slices, domain));
  return out;
}

PartyDistanceMatrix aggregate_matrix(std::span<const PartyDistanceMatrix> per_domain, AggregateMode mode) {
  if (per_domain.empty()) throw Error(ErrorKind::Validation, "aggregation needs at least one domain matrix");
  const auto& parties = per_domain.front().parties;
  for (const auto& m : per_domain) {
    if (m.parties != parties) {
      throw Error(ErrorKind::Validation, "domain matrix '" + m.tag + "' has a different party list");
    }
  }
  PartyDistanceMatrix out = make_matrix(parties, std::string(kAggregateTag));
  const std::size_t n = parties.size();
  for (const auto& party : parties) {
    std::size_t total = 0;
    for (const auto& m : per_domain) {
      if (const auto it = m.coverage.find(party); it != m.coverage.end()) total += it->second;
    }
    out.coverage[party] = total;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0, weight = 0.0;
      for (const auto& m : per_domain) {
        const auto& v = m.at(i, j);
        if (!v) continue;
        double w = 1.0;
        if (mode == AggregateMode::SalienceWeighted) {
          w = static_cast<double>(m.coverage.at(parties[i]) + m.coverage.at(parties[j]));
        }
        sum += w * *v;
        weight += w;
      }
      if (weight > 0.0) out.at(i, j) = i == j ? 0.0 : sum / weight;
    }
  }
  return out;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string matrix_csv(const PartyDistanceMatrix& m) {
  std::string out = "party";
  for (const auto& p : m.parties) out += "," + csv_field(p);
  out.push_back('\n');
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += csv_field(m.parties[i]);
    for (std::size_t j = 0; j < m.size(); ++j) {
      const auto& v = m.at(i, j);
      out += "," + (v ? format_double(*v) : std::string("NA"));
    }
    out.push_back('\n');
  }
  return out;
}

std::string matrices_json(std::span<const PartyDistanceMatrix> matrices, std::string_view labels_source) {
  json doc;
  doc["labels_source"] = labels_source;
  doc["matrices"] = json::array();
  for (const auto& m : matrices) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < m.size(); ++j) {
        const auto& v = m.at(i, j);
        row.push_back(v ? json(*v) : json(nullptr));
      }
      rows.push_back(std::move(row));
    }
    doc["matrices"].push_back({{"tag", m.tag}, {"parties", m.parties}, {"coverage", m.coverage}, {"d", rows}});
  }
  return doc.dump(2) + "\n";
}

std::vector<PartyDistanceMatrix> parse_matrices_json(std::string_view contents) {
  try {
    const json doc = json::parse(contents);
    std::vector<PartyDistanceMatrix> out;
    for (const auto& jm : doc.at("matrices")) {
      PartyDistanceMatrix m = make_matrix(jm.at("parties").get<std::vector<std::string>>(), jm.at("tag").get<std::string>());
      m.coverage = jm.at("coverage").get<std::map<std::string, std::size_t>>();
      const auto& rows = jm.at("d");
      if (rows.size() != m.size()) throw Error(ErrorKind::Format, "matrix '" + m.tag + "' has wrong row count");
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (rows[i].size() != m.size()) throw Error(ErrorKind::Format, "matrix '" + m.tag + "' is not square");
        for (std::size_t j = 0; j < m.size(); ++j) {
          if (!rows[i][j].is_null()) m.at(i, j) = rows[i][j].get<double>();
        }
      }
      out.push_back(std::move(m));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("matrices file: ") + e.what());
  }
}

}  // namespace mdecomp
