#include "mdecomp/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <tuple>

#include <json.hpp>

#include "mdecomp/error.hpp"
#include "mdecomp/text_format.hpp"

namespace mdecomp {

using nlohmann::json;

namespace {

const std::vector<std::size_t> kNoSentences;

bool is_year_month(std::string_view s) {
  if (s.size() != 7 || s[4] != '-') return false;
  for (std::size_t i = 0; i < 7; ++i) {
    if (i == 4) continue;
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  return month >= 1 && month <= 12;
}

void check_sentence(const Sentence& s, const std::string& where) {
  if (s.id.empty()) throw Error(ErrorKind::Validation, where + ": empty id");
  if (s.party.empty()) throw Error(ErrorKind::Validation, where + ": empty party for '" + s.id + "'");
  if (!is_year_month(s.election_date)) {
    throw Error(ErrorKind::Validation,
                where + ": election_date '" + s.election_date + "' of '" + s.id + "' is not YYYY-MM");
  }
  if (s.position < 0) throw Error(ErrorKind::Validation, where + ": negative position for '" + s.id + "'");
  if (s.text.empty()) throw Error(ErrorKind::Validation, where + ": empty text for '" + s.id + "'");
}

}  // namespace

Corpus::Corpus(std::vector<Sentence> sentences) {
  std::erase_if(sentences, [](const Sentence& s) { return s.code && *s.code == kHeadingCode; });
  std::sort(sentences.begin(), sentences.end(), [](const Sentence& a, const Sentence& b) {
    return std::tie(a.party, a.election_date, a.position) < std::tie(b.party, b.election_date, b.position);
  });
  sentences_ = std::move(sentences);

  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    const Sentence& s = sentences_[i];
    if (!by_id_.emplace(s.id, i).second) {
      throw Error(ErrorKind::Validation, "duplicate sentence id '" + s.id + "'");
    }
    if (i > 0) {
      const Sentence& prev = sentences_[i - 1];
      if (prev.party == s.party && prev.election_date == s.election_date && prev.position == s.position) {
        throw Error(ErrorKind::Validation, "duplicate (party, election_date, position) = (" + s.party + ", " +
                                               s.election_date + ", " + std::to_string(s.position) +
                                               ") for ids '" + prev.id + "' and '" + s.id + "'");
      }
    }
    by_party_[s.party].push_back(i);
    if (s.code) by_code_[*s.code].push_back(i);
    if (manifestos_.empty() || manifestos_.back().key.party != s.party ||
        manifestos_.back().key.election_date != s.election_date) {
      manifestos_.push_back({{s.party, s.election_date}, i, i});
    }
    manifestos_.back().end = i + 1;
  }
}

std::vector<std::string> Corpus::parties() const {
  std::vector<std::string> out;
  out.reserve(by_party_.size());
  for (const auto& [party, _] : by_party_) out.push_back(party);
  return out;
}

bool Corpus::has_party(std::string_view party) const { return by_party_.find(party) != by_party_.end(); }

const std::vector<std::size_t>& Corpus::party_sentences(std::string_view party) const {
  const auto it = by_party_.find(party);
  if (it == by_party_.end()) throw Error(ErrorKind::Lookup, "unknown party '" + std::string(party) + "'");
  return it->second;
}

const std::vector<std::size_t>& Corpus::code_sentences(std::string_view code) const {
  const auto it = by_code_.find(code);
  return it == by_code_.end() ? kNoSentences : it->second;
}

std::vector<std::string> Corpus::codes() const {
  std::vector<std::string> out;
  for (const auto& [code, _] : by_code_) out.push_back(code);
  return out;
}

const Sentence* Corpus::find(std::string_view id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &sentences_[it->second];
}

Corpus parse_corpus_jsonl(std::string_view contents) {
  std::vector<Sentence> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, where + ": " + e.what());
    }
    if (!rec.is_object()) throw Error(ErrorKind::Parse, where + ": record is not a JSON object");

    Sentence s;
    try {
      s.id = rec.at("id").get<std::string>();
      s.party = rec.at("party").get<std::string>();
      s.election_date = rec.at("election_date").get<std::string>();
      const json& pos = rec.at("position");
      if (!pos.is_number_integer()) throw Error(ErrorKind::Parse, where + ": position must be an integer");
      s.position = pos.get<std::int64_t>();
      s.text = rec.at("text").get<std::string>();
      if (const auto it = rec.find("code"); it != rec.end() && !it->is_null()) s.code = it->get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, where + ": " + e.what());
    }
    check_sentence(s, where);
    records.push_back(std::move(s));
  }
  return Corpus(std::move(records));
}

namespace {

// RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error(ErrorKind::Parse, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Corpus parse_corpus_csv(std::string_view contents) {
  const auto rows = split_csv(contents);
  if (rows.empty()) return Corpus();
  const auto& header = rows.front();
  auto column = [&](std::string_view name, bool required) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw Error(ErrorKind::Parse, "CSV header lacks column '" + std::string(name) + "'");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = *column("id", true);
  const std::size_t c_party = *column("party", true);
  const std::size_t c_date = *column("election_date", true);
  const std::size_t c_pos = *column("position", true);
  const std::size_t c_text = *column("text", true);
  const auto c_code = column("code", false);

  std::vector<Sentence> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "CSV record " + std::to_string(r + 1);
    if (row.size() != header.size()) {
      throw Error(ErrorKind::Parse, where + ": expected " + std::to_string(header.size()) + " fields, got " +
                                        std::to_string(row.size()));
    }
    Sentence s;
    s.id = row[c_id];
    s.party = row[c_party];
    s.election_date = row[c_date];
    const std::string& pos = row[c_pos];
    const auto [ptr, ec] = std::from_chars(pos.data(), pos.data() + pos.size(), s.position);
    if (ec != std::errc() || ptr != pos.data() + pos.size()) {
      throw Error(ErrorKind::Parse, where + ": position '" + pos + "' is not an integer");
    }
    s.text = row[c_text];
    if (c_code && !row[*c_code].empty()) s.code = row[*c_code];
    check_sentence(s, where);
    records.push_back(std::move(s));
  }
  return Corpus(std::move(records));
}

Corpus ingest_corpus(const std::string& path, CorpusFormat format) {
  if (format == CorpusFormat::Auto) {
    const auto ext = std::filesystem::path(path).extension().string();
    format = (ext == ".csv" || ext == ".CSV") ? CorpusFormat::Csv : CorpusFormat::JsonLines;
  }
  const std::string contents = read_file(path);
  try {
    return format == CorpusFormat::Csv ? parse_corpus_csv(contents) : parse_corpus_jsonl(contents);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string serialize_corpus_jsonl(const Corpus& corpus) {
  std::string out;
  for (const Sentence& s : corpus.sentences()) {
    json rec = json::object();
    rec["id"] = s.id;
    rec["party"] = s.party;
    rec["election_date"] = s.election_date;
    rec["position"] = s.position;
    rec["text"] = s.text;
    rec["code"] = s.code ? json(*s.code) : json(nullptr);
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

DomainScheme::DomainScheme(std::map<std::string, std::set<std::string>> domains, std::set<std::string> other_codes)
    : domains_(std::move(domains)), other_(std::move(other_codes)) {
  for (const auto& [name, codes] : domains_) {
    if (name.empty()) throw Error(ErrorKind::Validation, "domain names must be non-empty");
    if (name == kOtherDomain) {
      throw Error(ErrorKind::Validation, "domain name 'other' is reserved for non-policy codes");
    }
    for (const auto& code : codes) {
      const auto [it, inserted] = code_to_domain_.emplace(code, name);
      if (!inserted) {
        throw Error(ErrorKind::Validation,
                    "code '" + code + "' assigned to both '" + it->second + "' and '" + name + "'");
      }
    }
  }
  for (const auto& code : other_) {
    if (const auto it = code_to_domain_.find(code); it != code_to_domain_.end()) {
      throw Error(ErrorKind::Validation,
                  "code '" + code + "' is in domain '" + it->second + "' and in the other codes");
    }
  }
}

std::vector<std::string> DomainScheme::domain_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : domains_) out.push_back(name);
  return out;
}

std::optional<std::string> DomainScheme::domain_of(std::string_view code) const {
  const auto it = code_to_domain_.find(code);
  if (it == code_to_domain_.end()) return std::nullopt;
  return it->second;
}

std::string DomainScheme::label_for(std::string_view code) const {
  auto d = domain_of(code);
  return d ? *d : std::string(kOtherDomain);
}

DomainScheme parse_scheme_json(std::string_view contents) {
  json doc;
  try {
    doc = json::parse(contents);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("domain scheme: ") + e.what());
  }
  try {
    std::map<std::string, std::set<std::string>> domains;
    for (const auto& [name, codes] : doc.at("domains").items()) {
      auto& set = domains[name];
      for (const auto& c : codes) {
        if (!set.insert(c.get<std::string>()).second) {
          throw Error(ErrorKind::Validation, "code '" + c.get<std::string>() + "' listed twice in '" + name + "'");
        }
      }
    }
    std::set<std::string> other;
    if (const auto it = doc.find("other"); it != doc.end()) {
      for (const auto& c : *it) other.insert(c.get<std::string>());
    }
    return DomainScheme(std::move(domains), std::move(other));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("domain scheme: ") + e.what());
  }
}

DomainScheme load_scheme(const std::string& path) {
  try {
    return parse_scheme_json(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string serialize_scheme_json(const DomainScheme& scheme) {
  json doc;
  doc["domains"] = json::object();
  for (const auto& [name, codes] : scheme.domains()) doc["domains"][name] = codes;
  doc["other"] = scheme.other_codes();
  return doc.dump(2) + "\n";
}

std::map<std::string, std::set<std::string>> slice_by_domain(const Corpus& corpus, const DomainScheme& scheme,
                                                              std::string_view party) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& name : scheme.domain_names()) out[name];
  for (std::size_t idx : corpus.party_sentences(party)) {
    const Sentence& s = corpus.sentences()[idx];
    if (!s.code) continue;
    if (auto domain = scheme.domain_of(*s.code)) out[*domain].insert(s.id);
  }
  return out;
}

std::map<std::string, std::size_t> category_counts(const Corpus& corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& code : corpus.codes()) counts[code] = corpus.code_sentences(code).size();
  return counts;
}

std::map<std::string, std::string> annotated_labels(const Corpus& corpus, const DomainScheme& scheme) {
  std::map<std::string, std::string> labels;
  for (const Sentence& s : corpus.sentences()) {
    if (s.code) labels.emplace(s.id, scheme.label_for(*s.code));
  }
  return labels;
}

}  // namespace mdecomp
