#include "mdecomp/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "mdecomp/error.hpp"
#include "mdecomp/parallel.hpp"

namespace mdecomp {

double ScalingResult::coordinate_of(std::string_view party) const {
  for (std::size_t i = 0; i < parties.size(); ++i) {
    if (parties[i] == party) return coordinate[i];
  }
  throw Error(ErrorKind::Lookup, "party '" + std::string(party) + "' not in scaling result");
}

ScalingResult classical_mds_axis1(const PartyDistanceMatrix& m) {
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorKind::Argument, "MDS needs at least 2 parties");
  const std::vector<double> d = m.dense();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i * n + j] != d[j * n + i]) throw Error(ErrorKind::Argument, "MDS input '" + m.tag + "' is not symmetric");
    }
  }

  Eigen::MatrixXd sq(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sq(i, j) = d[i * n + j] * d[i * n + j];
  }
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const double grand = row_mean.mean();
  Eigen::MatrixXd b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + grand);
  }

  ScalingResult out;
  out.parties = m.parties;
  out.coordinate.assign(n, 0.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::Internal, "MDS eigendecomposition failed");
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const double lead = values(n - 1);
  const double scale = std::max(std::abs(values(0)), std::abs(lead));
  const double noise = 1e-12 * scale;
  double positive = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (values(k) > noise) positive += values(k);
  }
  if (lead <= noise || positive <= 0.0) return out;

  out.explained_ratio = lead / positive;
  const double s = std::sqrt(lead);
  for (std::size_t i = 0; i < n; ++i) out.coordinate[i] = s * eig.eigenvectors()(i, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return m.parties[a] < m.parties[c]; });
  const double tiny = 1e-12 * s;
  for (std::size_t i : order) {
    if (std::abs(out.coordinate[i]) > tiny) {
      if (out.coordinate[i] < 0.0) {
        for (double& c : out.coordinate) c = -c;
      }
      break;
    }
  }
  return out;
}

RileCodes RileCodes::cmp_default() {
  return {{"104", "201", "203", "305", "401", "402", "407", "414", "505", "601", "603", "605", "606"},
          {"103", "105", "106", "107", "202", "403", "404", "406", "412", "413", "504", "506", "701"}};
}

RileCodes parse_rile_codes_json(std::string_view contents) {
  try {
    const auto doc = nlohmann::json::parse(contents);
    RileCodes codes;
    codes.right = doc.at("right").get<std::set<std::string>>();
    codes.left = doc.at("left").get<std::set<std::string>>();
    return codes;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("RILE code file: ") + e.what());
  }
}

namespace {

void check_disjoint(const RileCodes& codes) {
  for (const auto& c : codes.right) {
    if (codes.left.count(c)) throw Error(ErrorKind::Validation, "code '" + c + "' is both a right and a left code");
  }
}

}  // namespace

double rile(const Corpus& corpus, std::string_view party, const RileCodes& codes) {
  check_disjoint(codes);
  std::size_t right = 0, left = 0, total = 0;
  for (std::size_t idx : corpus.party_sentences(party)) {
    const auto& code = corpus.sentences()[idx].code;
    if (!code) continue;
    ++total;
    if (codes.right.count(*code)) ++right;
    if (codes.left.count(*code)) ++left;
  }
  if (total == 0) throw Error(ErrorKind::UndefinedScore, "party '" + std::string(party) + "' has no coded sentences");
  return (static_cast<double>(right) - static_cast<double>(left)) / static_cast<double>(total);
}

RileScores rile_scores(const Corpus& corpus, const RileCodes& codes) {
  RileScores out;
  out.codes = codes;
  for (const auto& party : corpus.parties()) out.scores[party] = rile(corpus, party, codes);
  return out;
}

PartyDistanceMatrix salience_distance_matrix(const Corpus& corpus, const std::set<std::string>* restrict_to) {
  const auto parties = corpus.parties();
  if (parties.size() < 2) throw Error(ErrorKind::InsufficientData, "salience distances need at least 2 parties");

  std::vector<std::string> codes;
  for (const auto& code : corpus.codes()) {
    if (restrict_to == nullptr || restrict_to->count(code)) codes.push_back(code);
  }
  const std::size_t n = parties.size();
  std::vector<std::vector<double>> freq(n, std::vector<double>(codes.size(), 0.0));
  for (std::size_t p = 0; p < n; ++p) {
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (std::size_t idx : corpus.party_sentences(parties[p])) {
      const auto& code = corpus.sentences()[idx].code;
      if (!code) continue;
      ++total;
      ++counts[*code];
    }
    if (total == 0) {
      throw Error(ErrorKind::InsufficientData, "party '" + parties[p] + "' has no coded sentences");
    }
    for (std::size_t c = 0; c < codes.size(); ++c) {
      const auto it = counts.find(codes[c]);
      if (it != counts.end()) freq[p][c] = static_cast<double>(it->second) / static_cast<double>(total);
    }
  }

  PartyDistanceMatrix m = make_matrix(parties, "salience-ground-truth");
  for (std::size_t i = 0; i < n; ++i) {
    m.at(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < codes.size(); ++c) {
        const double diff = freq[i][c] - freq[j][c];
        acc += diff * diff;
      }
      m.at(i, j) = m.at(j, i) = std::sqrt(acc);
    }
  }
  return m;
}

namespace {

double t_two_sided_p(double r, std::size_t n) {
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

// Pearson r from centered vectors; sqrt(sx * sy) keeps r(x, x) exactly 1.
double centered_r(std::span<const double> xc, std::span<const double> yc, double sx, double sy) {
  double sxy = 0.0;
  for (std::size_t k = 0; k < xc.size(); ++k) sxy += xc[k] * yc[k];
  return std::clamp(sxy / std::sqrt(sx * sy), -1.0, 1.0);
}

std::vector<double> centered(std::span<const double> v, double& sum_sq, double& mean) {
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> out(v.size());
  sum_sq = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out[k] = v[k] - mean;
    sum_sq += out[k] * out[k];
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Permutation number `index` of the stream keyed by `seed`; depends on nothing else.
void counter_permutation(std::uint64_t seed, std::uint64_t index, std::vector<std::size_t>& perm) {
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::uint64_t state = splitmix64(seed ^ splitmix64(index));
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    state = splitmix64(state);
    const auto j = static_cast<std::size_t>(state % (i + 1));
    std::swap(perm[i], perm[j]);
  }
}

}  // namespace

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::Argument, "pearson: length mismatch");
  if (x.size() < 3) throw Error(ErrorKind::Argument, "pearson needs at least 3 points, got " + std::to_string(x.size()));
  double sx = 0.0, sy = 0.0, mx = 0.0, my = 0.0;
  const auto xc = centered(x, sx, mx);
  const auto yc = centered(y, sy, my);
  if (sx == 0.0 || sy == 0.0) throw Error(ErrorKind::UndefinedCorrelation, "pearson: zero variance");
  PearsonResult out;
  out.n = x.size();
  out.r = centered_r(xc, yc, sx, sy);
  out.p_value = t_two_sided_p(out.r, out.n);
  return out;
}

MantelResult mantel(const PartyDistanceMatrix& a, const PartyDistanceMatrix& b, std::size_t n_permutations,
                    std::uint64_t seed) {
  const std::size_t n = a.size();
  std::vector<std::string> sa = a.parties, sb = b.parties;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb) throw Error(ErrorKind::Validation, "mantel: matrices '" + a.tag + "' and '" + b.tag + "' cover different parties");
  if (n < 3) throw Error(ErrorKind::UndefinedCorrelation, "mantel: fewer than 3 parties leave no variance to correlate");

  // b re-indexed to a's party order.
  std::vector<std::size_t> b_index(n);
  for (std::size_t i = 0; i < n; ++i) {
    b_index[i] = static_cast<std::size_t>(std::find(b.parties.begin(), b.parties.end(), a.parties[i]) - b.parties.begin());
  }
  const auto da = a.dense();
  const auto db = b.dense();
  auto b_at = [&](std::size_t i, std::size_t j) { return db[b_index[i] * n + b_index[j]]; };

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      xs.push_back(da[i * n + j]);
      ys.push_back(b_at(i, j));
    }
  }
  double sx = 0.0, sy = 0.0, x_mean = 0.0, y_mean = 0.0;
  const auto xc = centered(xs, sx, x_mean);
  centered(ys, sy, y_mean);
  if (sx == 0.0 || sy == 0.0) throw Error(ErrorKind::UndefinedCorrelation, "mantel: zero variance in a triangle");

  auto permuted_r = [&](const std::vector<std::size_t>& perm) {
    double sxy = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) sxy += xc[k] * (b_at(perm[i], perm[j]) - y_mean);
    }
    return std::clamp(sxy / std::sqrt(sx * sy), -1.0, 1.0);
  };

  MantelResult out;
  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  out.r = permuted_r(identity);
  const double threshold = out.r - 1e-12;

  if (n <= kMaxExactMantelParties) {
    out.mode = MantelMode::Exact;
    std::vector<std::size_t> perm = identity;
    std::size_t total = 0, hits = 0;
    do {
      ++total;
      if (permuted_r(perm) >= threshold) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.n_permutations = total;
    out.p_value = static_cast<double>(hits) / static_cast<double>(total);
    return out;
  }

  if (n_permutations == 0) throw Error(ErrorKind::Argument, "mantel: sampled mode needs n_permutations > 0");
  out.mode = MantelMode::Sampled;
  out.n_permutations = n_permutations;
  std::vector<unsigned char> hit(n_permutations, 0);
  parallel::for_each_index(n_permutations, [&](std::size_t t) {
    std::vector<std::size_t> perm(n);
    counter_permutation(seed, t, perm);
    hit[t] = permuted_r(perm) >= threshold ? 1 : 0;
  });
  const std::size_t hits = std::accumulate(hit.begin(), hit.end(), std::size_t{0});
  out.p_value = static_cast<double>(hits + 1) / static_cast<double>(n_permutations + 1);
  return out;
}

RileCorrelation correlate_scaling_with_rile(const ScalingResult& scaling, const RileScores& rile) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < scaling.parties.size(); ++i) {
    const auto it = rile.scores.find(scaling.parties[i]);
    if (it == rile.scores.end()) {
      throw Error(ErrorKind::Lookup, "no RILE score for party '" + scaling.parties[i] + "'");
    }
    x.push_back(scaling.coordinate[i]);
    y.push_back(it->second);
  }
  if (rile.scores.size() != scaling.parties.size()) {
    throw Error(ErrorKind::Validation, "RILE scores and scaling result cover different parties");
  }
  const auto p = pearson(x, y);
  return {p.r, std::abs(p.r), p.p_value};
}

PearsonResult accuracy_vs_mantel(const std::map<std::string, double>& per_domain_accuracy,
                                 const std::map<std::string, double>& per_domain_mantel) {
  std::vector<double> x, y;
  for (const auto& [domain, acc] : per_domain_accuracy) {
    const auto it = per_domain_mantel.find(domain);
    if (it == per_domain_mantel.end()) {
      throw Error(ErrorKind::Validation, "domain '" + domain + "' has an accuracy but no Mantel value");
    }
    x.push_back(acc);
    y.push_back(it->second);
  }
  if (per_domain_mantel.size() != per_domain_accuracy.size()) {
    throw Error(ErrorKind::Validation, "accuracy and Mantel maps cover different domains");
  }
  return pearson(x, y);
}

}  // namespace mdecomp
