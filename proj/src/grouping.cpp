#include "mdecomp/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "mdecomp/error.hpp"
#include "mdecomp/pairwise.hpp"
#include "mdecomp/parallel.hpp"
#include "mdecomp/text_format.hpp"

namespace mdecomp {

using nlohmann::json;

namespace {

UnitRows category_rows(const Corpus& corpus, const EmbeddingStore& store, const WhiteningTransform& whitening,
                       std::string_view code) {
  const auto& idx = corpus.code_sentences(code);
  if (idx.empty()) throw Error(ErrorKind::EmptyCategory, "category '" + std::string(code) + "' has no sentences");
  std::vector<std::string> ids;
  ids.reserve(idx.size());
  for (std::size_t i : idx) ids.push_back(corpus.sentences()[i].id);
  return make_unit_rows(store, whitening, ids);
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

double category_distance(const Corpus& corpus, const EmbeddingStore& store, const WhiteningTransform& whitening,
                         std::string_view p, std::string_view q) {
  const UnitRows a = category_rows(corpus, store, whitening, p);
  if (p == q) return mean_within_cosine_distance(a);
  const UnitRows b = category_rows(corpus, store, whitening, q);
  return mean_cross_cosine_distance(a, b);
}

CategoryMatrixResult build_category_matrix(const Corpus& corpus, const EmbeddingStore& store,
                                           const WhiteningTransform& whitening, std::size_t min_count,
                                           const std::set<std::string>& excluded) {
  CategoryMatrixResult result;
  auto& codes = result.matrix.codes;
  for (const auto& [code, count] : category_counts(corpus)) {
    if (excluded.count(code)) continue;
    if (count >= min_count) {
      codes.push_back(code);
    } else {
      result.leftovers.push_back({code, count});
    }
  }
  if (codes.size() < 2) {
    throw Error(ErrorKind::InsufficientCategories,
                std::to_string(codes.size()) + " categories reach min_count " + std::to_string(min_count) +
                    "; at least 2 are needed");
  }

  const std::size_t n = codes.size();
  std::vector<UnitRows> rows(n);
  parallel::for_each_index(n, [&](std::size_t i) { rows[i] = category_rows(corpus, store, whitening, codes[i]); });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  auto& d = result.matrix.d;
  d.assign(n * n, 0.0);
  parallel::for_each_index(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double v = mean_cross_cosine_distance(rows[i], rows[j]);
    d[i * n + j] = v;
    d[j * n + i] = v;
  });
  return result;
}

Dendrogram average_linkage_cluster(const CategoryDistanceMatrix& m) {
  const std::size_t n = m.size();
  Dendrogram out;
  out.leaves = m.codes;
  if (n < 2) return out;

  // Slot s holds an active cluster; dist is the UPGMA distance between slots.
  std::vector<double> dist = m.d;
  std::vector<std::size_t> cluster_id(n);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::string> least_code = m.codes;
  std::vector<bool> active(n, true);
  std::iota(cluster_id.begin(), cluster_id.end(), std::size_t{0});

  auto pair_key = [&](std::size_t a, std::size_t b) {
    const std::string_view x = least_code[a];
    const std::string_view y = least_code[b];
    return x < y ? std::make_pair(x, y) : std::make_pair(y, x);
  };

  double last_height = -std::numeric_limits<double>::infinity();
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t best_a = n, best_b = n;
    double best = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        const double v = dist[a * n + b];
        if (best_a == n) {
          best_a = a, best_b = b, best = v;
        } else if (nearly_equal(v, best)) {
          if (pair_key(a, b) < pair_key(best_a, best_b)) best_a = a, best_b = b, best = v;
        } else if (v < best) {
          best_a = a, best_b = b, best = v;
        }
      }
    }

    // Monotone in exact arithmetic; only rounding can produce a dip.
    if (best < last_height) {
      if (!nearly_equal(best, last_height)) {
        throw Error(ErrorKind::Internal, "average linkage produced a decreasing merge height");
      }
      best = last_height;
    }
    last_height = best;

    const bool a_first = least_code[best_a] < least_code[best_b];
    Merge merge;
    merge.left = a_first ? cluster_id[best_a] : cluster_id[best_b];
    merge.right = a_first ? cluster_id[best_b] : cluster_id[best_a];
    merge.height = best;
    merge.size = size[best_a] + size[best_b];
    out.merges.push_back(merge);

    const double wa = static_cast<double>(size[best_a]);
    const double wb = static_cast<double>(size[best_b]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == best_a || k == best_b) continue;
      const double v = (wa * dist[k * n + best_a] + wb * dist[k * n + best_b]) / (wa + wb);
      dist[k * n + best_a] = v;
      dist[best_a * n + k] = v;
    }
    active[best_b] = false;
    size[best_a] = merge.size;
    cluster_id[best_a] = n + step;
    least_code[best_a] = std::min(least_code[best_a], least_code[best_b]);
  }
  return out;
}

Partition cut_dendrogram(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaves.size();
  if (k < 1 || k > n) {
    throw Error(ErrorKind::Argument, "cut size k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> parent(2 * n, 0);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < n - k; ++m) {
    const Merge& merge = dendrogram.merges[m];
    parent[find(merge.left)] = n + m;
    parent[find(merge.right)] = n + m;
  }
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t leaf = 0; leaf < n; ++leaf) groups[find(leaf)].push_back(dendrogram.leaves[leaf]);

  Partition out;
  for (auto& [_, codes] : groups) {
    std::sort(codes.begin(), codes.end());
    out.push_back(std::move(codes));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

StanceReport check_stance_pairing(const Partition& partition, std::span<const CodePair> stance_pairs) {
  std::map<std::string, std::size_t, std::less<>> cluster_of;
  for (std::size_t c = 0; c < partition.size(); ++c) {
    for (const auto& code : partition[c]) cluster_of.emplace(code, c);
  }
  auto lookup = [&](const std::string& code) {
    const auto it = cluster_of.find(code);
    if (it == cluster_of.end()) throw Error(ErrorKind::Lookup, "stance pair code '" + code + "' is not clustered");
    return it->second;
  };
  StanceReport report;
  for (const auto& [a, b] : stance_pairs) {
    StancePairCheck check{a, b, lookup(a), lookup(b), false};
    check.same_cluster = check.first_cluster == check.second_cluster;
    if (!check.same_cluster) ++report.violations;
    report.pairs.push_back(std::move(check));
  }
  return report;
}

DomainScheme finalize_scheme(const Partition& partition, std::span<const CodePair> overrides,
                             const std::map<std::size_t, std::string>& names,
                             const std::set<std::string>& other_codes) {
  for (const auto& [id, name] : names) {
    if (id >= partition.size()) {
      throw Error(ErrorKind::Validation, "name '" + name + "' given for unknown cluster " + std::to_string(id));
    }
  }
  std::map<std::string, std::set<std::string>> domains;
  for (std::size_t c = 0; c < partition.size(); ++c) {
    const auto it = names.find(c);
    const std::string name = it != names.end() ? it->second : "cluster_" + std::to_string(c);
    if (name.empty() || name == kOtherDomain) {
      throw Error(ErrorKind::Validation, "cluster " + std::to_string(c) + " has an invalid domain name '" + name + "'");
    }
    domains[name].insert(partition[c].begin(), partition[c].end());
  }

  std::set<std::string> other = other_codes;
  auto remove_everywhere = [&](const std::string& code) {
    for (auto& [_, codes] : domains) codes.erase(code);
    other.erase(code);
  };
  for (const auto& code : other_codes) {
    for (auto& [_, codes] : domains) codes.erase(code);
  }

  std::map<std::string, std::string> target_of;
  for (const auto& [code, target] : overrides) {
    if (target != kOtherDomain && domains.find(target) == domains.end()) {
      throw Error(ErrorKind::Validation, "override for '" + code + "' names unknown domain '" + target + "'");
    }
    const auto [it, inserted] = target_of.emplace(code, target);
    if (!inserted && it->second != target) {
      throw Error(ErrorKind::Validation,
                  "code '" + code + "' overridden to both '" + it->second + "' and '" + target + "'");
    }
  }
  for (const auto& [code, target] : target_of) {
    remove_everywhere(code);
    if (target == kOtherDomain) {
      other.insert(code);
    } else {
      domains[target].insert(code);
    }
  }
  return DomainScheme(std::move(domains), std::move(other));
}

std::string category_matrix_csv(const CategoryDistanceMatrix& m) {
  std::string out = "code";
  for (const auto& c : m.codes) out += "," + json(c).dump();
  out.push_back('\n');
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += json(m.codes[i]).dump();
    for (std::size_t j = 0; j < m.size(); ++j) out += "," + format_double(m.at(i, j));
    out.push_back('\n');
  }
  return out;
}

std::string dendrogram_json(const Dendrogram& dendrogram) {
  json doc;
  doc["leaves"] = dendrogram.leaves;
  doc["merges"] = json::array();
  for (const auto& m : dendrogram.merges) {
    doc["merges"].push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
  }
  return doc.dump(2) + "\n";
}

std::string leftovers_json(std::span<const CategoryCount> leftovers) {
  json doc = json::array();
  for (const auto& l : leftovers) doc.push_back({{"code", l.code}, {"count", l.count}});
  return doc.dump(2) + "\n";
}

std::string stance_report_json(const StanceReport& report) {
  json doc;
  doc["pass"] = report.pass();
  doc["violations"] = report.violations;
  doc["pairs"] = json::array();
  for (const auto& p : report.pairs) {
    doc["pairs"].push_back({{"first", p.first},
                            {"second", p.second},
                            {"first_cluster", p.first_cluster},
                            {"second_cluster", p.second_cluster},
                            {"same_cluster", p.same_cluster}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace mdecomp
