#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numeric paths; each oracle is the textbook definition written
// as plainly as possible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double cosine_distance(const Vec& a, const Vec& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return 1.0 - ab / std::sqrt(aa * bb);
}

/// y = T (x - mean) with T row-major.
inline Vec whiten(const Vec& x, const Vec& mean, const Vec& t) {
  const std::size_t d = x.size();
  Vec y(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) y[i] += t[i * d + j] * (x[j] - mean[j]);
  }
  return y;
}

/// Double loop over all cross pairs (or distinct unordered pairs when `same`).
inline double mean_pair_distance(const std::vector<Vec>& p, const std::vector<Vec>& q, bool same) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = same ? i + 1 : 0; j < q.size(); ++j) {
      sum += cosine_distance(p[i], q[j]);
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

/// Sample covariance (divisor n - 1), row-major.
inline Vec covariance(const std::vector<Vec>& xs) {
  const std::size_t d = xs.front().size();
  Vec mean(d, 0.0);
  for (const auto& x : xs)
    for (std::size_t k = 0; k < d; ++k) mean[k] += x[k] / static_cast<double>(xs.size());
  Vec cov(d * d, 0.0);
  for (const auto& x : xs)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov[i * d + j] += (x[i] - mean[i]) * (x[j] - mean[j]);
  for (double& c : cov) c /= static_cast<double>(xs.size() - 1);
  return cov;
}

struct NaiveMerge {
  double height;
  std::set<std::size_t> members;
};

/// UPGMA recomputing each cluster distance from scratch as the mean over all
/// cross leaf pairs. Ties (within 1e-12) go to the pair with the smallest
/// (least code, second least code) key, like the library's rule.
inline std::vector<NaiveMerge> naive_upgma(const std::vector<std::string>& codes, const Vec& d) {
  const std::size_t n = codes.size();
  std::vector<std::set<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  auto least = [&](const std::set<std::size_t>& c) {
    std::string best = codes[*c.begin()];
    for (auto i : c) best = std::min(best, codes[i]);
    return best;
  };
  auto dist = [&](const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
    double s = 0.0;
    for (auto i : a)
      for (auto j : b) s += d[i * n + j];
    return s / static_cast<double>(a.size() * b.size());
  };
  std::vector<NaiveMerge> merges;
  while (clusters.size() > 1) {
    std::size_t ba = 0, bb = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> best_key;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double v = dist(clusters[a], clusters[b]);
        auto x = least(clusters[a]), y = least(clusters[b]);
        if (y < x) std::swap(x, y);
        const bool tie = std::isfinite(best) && std::abs(v - best) <= 1e-12 * std::max({1.0, std::abs(v), std::abs(best)});
        if ((!tie && v < best) || (tie && std::make_pair(x, y) < best_key)) {
          ba = a, bb = b, best = v, best_key = {x, y};
        }
      }
    }
    std::set<std::size_t> merged = clusters[ba];
    merged.insert(clusters[bb].begin(), clusters[bb].end());
    merges.push_back({best, merged});
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
    clusters[ba] = merged;
  }
  return merges;
}

/// (n sum xy - sum x sum y) / sqrt((n sum x^2 - (sum x)^2)(n sum y^2 - (sum y)^2)).
inline double textbook_pearson(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    syy += y[k] * y[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

/// Mantel p by materialising every permuted matrix. Pearson is computed with
/// the two-pass centered formula; counts r_perm >= r_obs - 1e-12.
inline std::pair<double, double> brute_force_mantel(const Vec& a, const Vec& b, std::size_t n) {
  auto upper = [&](const Vec& m) {
    Vec out;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) out.push_back(m[i * n + j]);
    return out;
  };
  auto r_of = [](const Vec& x, const Vec& y) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sxy += (x[k] - mx) * (y[k] - my);
      sxx += (x[k] - mx) * (x[k] - mx);
      syy += (y[k] - my) * (y[k] - my);
    }
    return sxy / std::sqrt(sxx * syy);
  };
  const Vec xa = upper(a);
  const double r_obs = r_of(xa, upper(b));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t hits = 0, total = 0;
  do {
    Vec permuted(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) permuted[i * n + j] = b[perm[i] * n + perm[j]];
    ++total;
    if (r_of(xa, upper(permuted)) >= r_obs - 1e-12) ++hits;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {r_obs, static_cast<double>(hits) / static_cast<double>(total)};
}

}  // namespace oracle
