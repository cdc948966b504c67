#include <doctest.h>

#include <cmath>
#include <random>

#include "expect.hpp"
#include "mdecomp/similarity.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace mdecomp;
using fixture::throws_kind;

namespace {

struct Fixture {
  Corpus corpus;
  EmbeddingStore store;
  WhiteningTransform whitening;
  DomainScheme scheme;
  LabelMap labels;
};

/// `counts[party][domain]` sentences per slice, random vectors, one "other" sentence per party.
Fixture random_fixture(const std::vector<std::string>& parties, const std::vector<std::vector<std::size_t>>& counts,
                       std::size_t dim, std::mt19937_64& rng) {
  Fixture f{Corpus{}, EmbeddingStore(dim), WhiteningTransform::identity(dim),
            DomainScheme({{"d0", {"c0"}}, {"d1", {"c1"}}, {"d2", {"c2"}}}, {"0"}), {}};
  std::vector<Sentence> s;
  std::vector<std::string> ids;
  for (std::size_t p = 0; p < parties.size(); ++p) {
    int pos = 0;
    auto add = [&](const std::string& code) {
      const std::string id = parties[p] + "_" + std::to_string(pos);
      s.push_back({id, parties[p], "2021-09", pos++, "t", code});
      f.store.add(id, fixture::gaussian_vector(dim, rng));
      ids.push_back(id);
    };
    for (std::size_t d = 0; d < counts[p].size(); ++d)
      for (std::size_t k = 0; k < counts[p][d]; ++k) add("c" + std::to_string(d));
    add("0");
  }
  f.corpus = Corpus(s);
  f.whitening = fit_whitening(f.store, ids);
  f.labels = annotated_labels(f.corpus, f.scheme);
  return f;
}

std::vector<oracle::Vec> slice_vectors(const Fixture& f, const std::string& party, const std::string& domain) {
  std::vector<oracle::Vec> out;
  for (auto i : f.corpus.party_sentences(party)) {
    const auto& s = f.corpus.sentences()[i];
    const auto it = f.labels.find(s.id);
    if (it == f.labels.end() || it->second != domain) continue;
    const auto v = f.store.vector(s.id);
    out.push_back(oracle::whiten({v.begin(), v.end()}, f.whitening.mean, f.whitening.transform));
  }
  return out;
}

PartyDistanceMatrix filled(std::vector<std::string> parties, std::string tag, const std::vector<double>& d) {
  auto m = make_matrix(std::move(parties), std::move(tag));
  for (std::size_t i = 0; i < d.size(); ++i) m.d[i] = d[i];
  for (const auto& p : m.parties) m.coverage[p] = 1;
  return m;
}

}  // namespace

TEST_CASE("domain distance trivial cases") {
  Fixture f{Corpus({{"a1", "A", "2021-09", 1, "t", "c0"}, {"b1", "B", "2021-09", 1, "t", "c0"},
                    {"a2", "A", "2021-09", 2, "t", "c1"}, {"b2", "B", "2021-09", 2, "t", "c1"}}),
            EmbeddingStore(2), WhiteningTransform::identity(2), DomainScheme({{"d0", {"c0"}}, {"d1", {"c1"}}}, {}),
            {}};
  f.store.add("a1", std::vector<double>{1, 1});
  f.store.add("b1", std::vector<double>{1, 1});
  f.store.add("a2", std::vector<double>{1, 0});
  f.store.add("b2", std::vector<double>{0, 1});
  f.labels = annotated_labels(f.corpus, f.scheme);
  CHECK(*domain_distance(f.corpus, f.store, f.whitening, f.scheme, "d0", "A", "B", f.labels) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(*domain_distance(f.corpus, f.store, f.whitening, f.scheme, "d1", "A", "B", f.labels) == 1.0);
  CHECK(throws_kind([&] { domain_distance(f.corpus, f.store, f.whitening, f.scheme, "zz", "A", "B", f.labels); },
                    ErrorKind::Lookup));
  CHECK(throws_kind([&] { domain_distance(f.corpus, f.store, f.whitening, f.scheme, "d0", "A", "Z", f.labels); },
                    ErrorKind::Lookup));
  // "other" labels are left out.
  LabelMap other = f.labels;
  other["a1"] = "other";
  CHECK_FALSE(domain_distance(f.corpus, f.store, f.whitening, f.scheme, "d0", "A", "B", other).has_value());
}

TEST_CASE("domain matrices equal the brute-force double loop") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> parties = {"cdu", "afd", "spd", "fdp", "gruene", "linke"};
  std::uniform_int_distribution<std::size_t> cnt(1, 7);
  std::vector<std::vector<std::size_t>> counts;
  for (std::size_t p = 0; p < parties.size(); ++p) counts.push_back({cnt(rng), cnt(rng), cnt(rng)});
  const auto f = random_fixture(parties, counts, 5, rng);
  const DomainSlices slices(f.corpus, f.store, f.whitening, f.scheme, f.labels);
  const auto ms = build_domain_matrices(slices);
  REQUIRE(ms.size() == 3);
  for (const auto& m : ms) {
    CHECK(m.parties == f.corpus.parties());
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(m.coverage.at(m.parties[i]) == slice_vectors(f, m.parties[i], m.tag).size());
      CHECK(*m.at(i, i) == 0.0);
      for (std::size_t j = 0; j < m.size(); ++j) {
        CHECK(*m.at(i, j) == *m.at(j, i));
        if (i == j) continue;
        const double ref =
            oracle::mean_pair_distance(slice_vectors(f, m.parties[i], m.tag), slice_vectors(f, m.parties[j], m.tag), false);
        CHECK(std::abs(*m.at(i, j) - ref) <= 1e-12);
        const auto direct =
            domain_distance(f.corpus, f.store, f.whitening, f.scheme, m.tag, m.parties[i], m.parties[j], f.labels);
        CHECK(*direct == *m.at(i, j));
      }
    }
  }
}

TEST_CASE("empty slices become undefined cells") {
  std::mt19937_64 rng(5);
  const auto f = random_fixture({"A", "B", "C"}, {{3, 2, 0}, {2, 2, 2}, {1, 3, 2}}, 4, rng);
  const DomainSlices slices(f.corpus, f.store, f.whitening, f.scheme, f.labels);
  const auto m = build_domain_matrix(slices, "d2");
  CHECK(m.coverage.at("A") == 0);
  CHECK_FALSE(m.at(0, 0).has_value());
  CHECK_FALSE(m.at(0, 1).has_value());
  CHECK_FALSE(m.at(2, 0).has_value());
  CHECK(m.at(1, 2).has_value());
  CHECK_FALSE(m.fully_defined());
  CHECK(throws_kind([&] { (void)m.dense(); }, ErrorKind::UndefinedMatrix));
  CHECK(matrix_csv(m).find("A,NA,NA,NA\n") != std::string::npos);

  const auto two = build_domain_matrix(
      DomainSlices(f.corpus, f.store, f.whitening, f.scheme, f.labels), "d0");
  CHECK(two.fully_defined());
}

TEST_CASE("permuting party names permutes the matrix") {
  std::mt19937_64 rng(8);
  const auto f = random_fixture({"A", "B", "C", "D"}, {{3, 2, 1}, {2, 2, 2}, {1, 3, 2}, {4, 1, 1}}, 4, rng);
  // Rename so the lexicographic order reverses.
  const std::map<std::string, std::string> rename = {{"A", "z"}, {"B", "y"}, {"C", "x"}, {"D", "w"}};
  auto sentences = f.corpus.sentences();
  for (auto& s : sentences) s.party = rename.at(s.party);
  const Corpus renamed(sentences);
  const auto a = build_domain_matrices(DomainSlices(f.corpus, f.store, f.whitening, f.scheme, f.labels));
  const auto b = build_domain_matrices(DomainSlices(renamed, f.store, f.whitening, f.scheme, f.labels));
  for (std::size_t d = 0; d < a.size(); ++d) {
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(*a[d].at(i, j) - *b[d].at(3 - i, 3 - j)) <= 1e-12);
  }
}

TEST_CASE("aggregate rules") {
  const std::vector<std::string> ps = {"A", "B", "C"};
  const auto m1 = filled(ps, "x", {0, 0.2, 0.5, 0.2, 0, 0.7, 0.5, 0.7, 0});
  const auto m2 = filled(ps, "y", {0, 0.4, 0.5, 0.4, 0, 0.1, 0.5, 0.1, 0});
  const std::vector<PartyDistanceMatrix> same = {m1, m1, m1};
  const auto agg_same = aggregate_matrix(same);
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(*agg_same.d[i] - *m1.d[i]) <= 1e-15);
  CHECK(agg_same.tag == "aggregate");

  const std::vector<PartyDistanceMatrix> two = {m1, m2};
  const auto agg = aggregate_matrix(two);
  CHECK(*agg.at(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(*agg.at(1, 2) == doctest::Approx(0.4).epsilon(1e-15));

  auto m3 = m2;
  m3.at(0, 1).reset();
  m3.at(1, 0).reset();
  const std::vector<PartyDistanceMatrix> partial = {m1, m3};
  CHECK(*aggregate_matrix(partial).at(0, 1) == 0.2);

  auto m4 = m3;
  auto m5 = m1;
  m5.at(0, 1).reset();
  m5.at(1, 0).reset();
  const std::vector<PartyDistanceMatrix> none = {m4, m5};
  CHECK_FALSE(aggregate_matrix(none).at(0, 1).has_value());

  auto other_parties = filled({"A", "B", "Q"}, "z", std::vector<double>(9, 0.0));
  const std::vector<PartyDistanceMatrix> bad = {m1, other_parties};
  CHECK(throws_kind([&] { aggregate_matrix(bad); }, ErrorKind::Validation));

  auto w1 = m1, w2 = m2;
  w1.coverage = {{"A", 3}, {"B", 1}, {"C", 1}};
  w2.coverage = {{"A", 1}, {"B", 1}, {"C", 1}};
  const std::vector<PartyDistanceMatrix> weighted = {w1, w2};
  // Weights 4 and 2 for the (A, B) pair.
  CHECK(*aggregate_matrix(weighted, AggregateMode::SalienceWeighted).at(0, 1) ==
        doctest::Approx((4 * 0.2 + 2 * 0.4) / 6).epsilon(1e-15));
}

TEST_CASE("aggregate lies between the per-domain entries and is symmetric") {
  std::mt19937_64 rng(21);
  const auto f = random_fixture({"A", "B", "C", "D", "E"}, {{3, 2, 1}, {2, 2, 2}, {1, 3, 2}, {4, 1, 1}, {2, 2, 5}}, 4, rng);
  const auto ms = build_domain_matrices(DomainSlices(f.corpus, f.store, f.whitening, f.scheme, f.labels));
  const auto agg = aggregate_matrix(ms);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(*agg.at(i, j) == *agg.at(j, i));
      double lo = 2, hi = 0;
      for (const auto& m : ms) lo = std::min(lo, *m.at(i, j)), hi = std::max(hi, *m.at(i, j));
      CHECK(*agg.at(i, j) >= lo);
      CHECK(*agg.at(i, j) <= hi);
    }
  }
}

TEST_CASE("identical predicted labels give identical output") {
  std::mt19937_64 rng(13);
  const auto f = random_fixture({"A", "B", "C"}, {{3, 2, 1}, {2, 2, 2}, {1, 3, 2}}, 4, rng);
  LabelMap predicted(f.labels.begin(), f.labels.end());
  const auto a = build_domain_matrices(DomainSlices(f.corpus, f.store, f.whitening, f.scheme, f.labels));
  const auto b = build_domain_matrices(DomainSlices(f.corpus, f.store, f.whitening, f.scheme, predicted));
  CHECK(matrices_json(a, "x") == matrices_json(b, "x"));
}

TEST_CASE("matrices JSON round trip") {
  auto m = filled({"A", "B"}, "econ", {0, 0.125, 0.125, 0});
  auto n = make_matrix({"A", "B"}, "env");
  n.coverage = {{"A", 0}, {"B", 2}};
  const std::vector<PartyDistanceMatrix> ms = {m, n};
  const auto text = matrices_json(ms, "annotated");
  const auto back = parse_matrices_json(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].tag == "econ");
  CHECK(*back[0].at(0, 1) == 0.125);
  CHECK_FALSE(back[1].at(0, 1).has_value());
  CHECK(back[1].coverage == n.coverage);
  CHECK(matrices_json(back, "annotated") == text);
}
