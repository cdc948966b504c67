#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "mdecomp/text_format.hpp"

namespace fixture {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> gaussian_vector(std::size_t dim, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<double> random_distance_matrix(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = u(rng);
  }
  return d;
}

std::string temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mdecomp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

mdecomp::PartyDistanceMatrix Landscape::planted_aggregate() const {
  auto m = mdecomp::make_matrix(parties, "planted");
  const std::size_t n = parties.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (const auto& d : domains) s += std::abs(positions.at(d).at(parties[i]) - positions.at(d).at(parties[j]));
      m.at(i, j) = s / static_cast<double>(domains.size());
    }
  }
  return m;
}

Landscape make_landscape(const LandscapeParams& params) {
  static const std::vector<std::string> kNames = {"economy", "environment", "migration", "security",
                                                  "welfare", "europe",      "education", "culture"};
  std::mt19937_64 rng(params.seed);
  Landscape out;
  out.sentence_store = mdecomp::EmbeddingStore(params.dim);
  out.bigram_store = mdecomp::EmbeddingStore(2 * params.dim);
  for (std::size_t p = 0; p < params.parties; ++p) out.parties.push_back("party_" + std::string(1, char('a' + p)));

  std::vector<std::vector<double>> centroid, direction;
  std::map<std::string, std::set<std::string>> domain_codes;
  for (std::size_t d = 0; d < params.domains; ++d) {
    const std::string name = d < kNames.size() ? kNames[d] : "domain_" + std::to_string(d);
    out.domains.push_back(name);
    domain_codes[name] = {name + "_l", name + "_r"};
    out.rile_codes.left.insert(name + "_l");
    out.rile_codes.right.insert(name + "_r");

    auto c = gaussian_vector(params.dim, rng);
    double norm = 0.0;
    for (double x : c) norm += x * x;
    for (double& x : c) x *= params.centroid_norm / std::sqrt(norm);
    centroid.push_back(c);
    auto a = gaussian_vector(params.dim, rng);
    norm = 0.0;
    for (double x : a) norm += x * x;
    for (double& x : a) x /= std::sqrt(norm);
    direction.push_back(a);

    // Evenly spaced positions in [-1, 1], shuffled per domain.
    std::vector<double> xs(params.parties);
    for (std::size_t p = 0; p < params.parties; ++p) {
      xs[p] = params.parties == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(p) / static_cast<double>(params.parties - 1);
    }
    std::shuffle(xs.begin(), xs.end(), rng);
    for (std::size_t p = 0; p < params.parties; ++p) out.positions[name][out.parties[p]] = xs[p];
  }
  out.scheme = mdecomp::DomainScheme(domain_codes, {"000"});
  const auto other_centroid = gaussian_vector(params.dim, rng, params.centroid_norm / std::sqrt(double(params.dim)));

  for (std::size_t p = 0; p < params.parties; ++p) {
    const std::string& party = out.parties[p];
    struct Item {
      std::size_t domain;  // == domains for uncategorised
      bool right;
    };
    std::vector<Item> items;
    for (std::size_t d = 0; d < params.domains; ++d) {
      const double x = out.positions[out.domains[d]][party];
      const auto n_right = static_cast<std::size_t>(
          std::lround(static_cast<double>(params.sentences_per_domain) * (0.5 + 0.4 * x)));
      for (std::size_t s = 0; s < params.sentences_per_domain; ++s) items.push_back({d, s < n_right});
    }
    for (std::size_t s = 0; s < params.other_per_party; ++s) items.push_back({params.domains, false});
    // Runs of three sentences from the same domain, runs shuffled.
    std::vector<std::vector<Item>> runs;
    for (std::size_t i = 0; i < items.size(); i += 3) {
      runs.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(i),
                        items.begin() + static_cast<std::ptrdiff_t>(std::min(i + 3, items.size())));
    }
    std::shuffle(runs.begin(), runs.end(), rng);

    const std::string date = "2021-09";
    out.sentences.push_back({party + "_h", party, date, 0, "Heading", std::string(mdecomp::kHeadingCode)});
    std::int64_t pos = 1;
    std::string prev;
    std::vector<double> prev_vec(params.dim, 0.0);
    for (const auto& run : runs) {
      for (const auto& item : run) {
        const std::string id = party + "_" + std::to_string(pos);
        std::vector<double> v;
        std::string code;
        if (item.domain == params.domains) {
          v = other_centroid;
          code = "000";
        } else {
          const std::string& dn = out.domains[item.domain];
          const double x = out.positions[dn][party];
          v = centroid[item.domain];
          for (std::size_t k = 0; k < params.dim; ++k) v[k] += params.position_scale * x * direction[item.domain][k];
          code = dn + (item.right ? "_r" : "_l");
        }
        const auto noise = gaussian_vector(params.dim, rng, params.noise);
        for (std::size_t k = 0; k < params.dim; ++k) v[k] += noise[k];
        out.sentences.push_back({id, party, date, pos, "sentence " + id, code});
        out.sentence_store.add(id, v);
        std::vector<double> pair = v;
        pair.insert(pair.end(), prev_vec.begin(), prev_vec.end());
        out.bigram_store.add(mdecomp::bigram_key(prev.empty() ? mdecomp::kBos : std::string_view(prev), id), pair);
        prev = id;
        prev_vec = v;
        ++pos;
      }
    }
  }
  return out;
}

LandscapeFiles write_landscape(const Landscape& landscape, const std::string& dir, const std::string& extra_config_json) {
  fs::create_directories(dir);
  LandscapeFiles f;
  f.dir = dir;
  f.corpus = (fs::path(dir) / "corpus.jsonl").string();
  f.sentences = (fs::path(dir) / "sentences.emb").string();
  f.bigrams = (fs::path(dir) / "bigrams.emb").string();
  f.scheme = (fs::path(dir) / "scheme.json").string();
  f.rile = (fs::path(dir) / "rile.json").string();
  f.config = (fs::path(dir) / "config.json").string();

  std::string lines;
  for (const auto& s : landscape.sentences) {
    json j = {{"id", s.id}, {"party", s.party}, {"election_date", s.election_date}, {"position", s.position},
              {"text", s.text}};
    j["code"] = s.code ? json(*s.code) : json(nullptr);
    lines += j.dump() + "\n";
  }
  mdecomp::write_file(f.corpus, lines);
  mdecomp::write_file(f.sentences, mdecomp::serialize_embeddings(landscape.sentence_store));
  mdecomp::write_file(f.bigrams, mdecomp::serialize_embeddings(landscape.bigram_store));
  mdecomp::write_file(f.scheme, mdecomp::serialize_scheme_json(landscape.scheme));
  const json rile = {{"right", landscape.rile_codes.right}, {"left", landscape.rile_codes.left}};
  mdecomp::write_file(f.rile, rile.dump(2) + "\n");

  json config = {{"analysis_corpus", "corpus.jsonl"},
                 {"sentence_embeddings", "sentences.emb"},
                 {"bigram_embeddings", "bigrams.emb"},
                 {"scheme", "scheme.json"},
                 {"grouping", {{"min_count", 5}, {"k", landscape.domains.size()}, {"other_codes", {"000"}}}},
                 {"evaluation", {{"rile_codes", "rile.json"}}}};
  config.merge_patch(json::parse(extra_config_json));
  mdecomp::write_file(f.config, config.dump(2) + "\n");
  return f;
}

Blobs make_blobs(std::size_t dim, std::size_t n_train, std::size_t n_test, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Blobs out;
  auto draw = [&](std::size_t n, const std::string& prefix, std::vector<mdecomp::BigramInstance>& into) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool a = i % 2 == 0;
      auto v = gaussian_vector(dim, rng);
      for (double& x : v) x += a ? shift : -shift;
      mdecomp::BigramInstance inst;
      inst.id = prefix + std::to_string(i);
      inst.key = mdecomp::bigram_key(mdecomp::kBos, inst.id);
      inst.manifesto = {prefix, "2020-01"};
      inst.pair_embedding = std::move(v);
      inst.label = a ? "a" : "b";
      into.push_back(std::move(inst));
    }
  };
  draw(n_train, "train_", out.train);
  draw(n_test, "test_", out.test);
  return out;
}

}  // namespace fixture
