#pragma once

// Per-index reliability (Bhattacharyya upper bound) computation for the
// synthetic channels of one polar block, with puncturing modeled as a
// BEC(1) leaf, plus the good-set selectors and random puncture search.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rcpolar/channel.hpp"
#include "rcpolar/polar.hpp"

namespace rcpolar {

struct ReliabilityProfile {
  int m = 0;
  std::string channel_label;
  std::vector<double> z_bounds;  // indexed by u position, 0-based
  double delta = 1e-6;
};

namespace detail {

// Memo key for one polarization-step evaluation: the two child channels'
// canonical content hashes plus the branch.
struct CombineKey {
  uint64_t ha, hb;
  int branch;
  bool operator==(const CombineKey& o) const {
    return ha == o.ha && hb == o.hb && branch == o.branch;
  }
};
struct CombineKeyHash {
  size_t operator()(const CombineKey& k) const {
    uint64_t h = k.ha * 0x9e3779b97f4a7c15ull;
    h ^= k.hb + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= static_cast<uint64_t>(k.branch) + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
  }
};

using CombineCache =
    std::unordered_map<CombineKey, BmsChannel, CombineKeyHash>;

inline BmsChannel combined_degraded(const BmsChannel& a, const BmsChannel& b,
                                    Branch br, int mu, CombineCache& cache) {
  CombineKey key{a.content_hash(), b.content_hash(),
                 br == Branch::Minus ? 0 : 1};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  BmsChannel out = degrade_merge(polar_combine(a, b, br), mu);
  cache.emplace(key, out);
  return out;
}

// Recursive evolution over the contiguous structure: the list covers
// contiguous positions [base, base + len); the first combine pairs
// positions (i, i + len/2). Minus list feeds the first half of u-indices.
inline void evolve_rec(std::vector<BmsChannel>& chans, int mu,
                       CombineCache& cache, std::vector<double>& out,
                       int out_base) {
  int len = static_cast<int>(chans.size());
  if (len == 1) {
    out[out_base] = bhattacharyya(chans[0]);
    return;
  }
  int half = len / 2;
  std::vector<BmsChannel> minus, plus;
  minus.reserve(half);
  plus.reserve(half);
  for (int i = 0; i < half; ++i) {
    minus.push_back(
        combined_degraded(chans[i], chans[i + half], Branch::Minus, mu, cache));
    plus.push_back(
        combined_degraded(chans[i], chans[i + half], Branch::Plus, mu, cache));
  }
  chans.clear();
  chans.shrink_to_fit();
  evolve_rec(minus, mu, cache, out, out_base);
  evolve_rec(plus, mu, cache, out, out_base + half);
}

}  // namespace detail

// z_bounds[i] upper-bounds Z of the i-th synthetic channel (u order).
// Punctured positions are unobserved channel outputs: BEC(1) leaves at
// their channel positions. Degrading quantization after each combine keeps
// every value a one-sided upper bound.
inline ReliabilityProfile evolve_reliability(const BmsChannel& w, int m,
                                             const std::set<int>& punctured_set,
                                             int mu, double delta = 1e-6) {
  if (!is_pow2(m)) throw std::invalid_argument("m must be a power of two");
  for (int i : punctured_set)
    if (i < 0 || i >= m) throw std::invalid_argument("punctured index out of range");
  auto rev = bit_reversal_permutation(m);
  BmsChannel erased = make_bec(1.0);
  std::vector<BmsChannel> leaves;
  leaves.reserve(m);
  for (int p = 0; p < m; ++p)
    leaves.push_back(punctured_set.count(rev[p]) ? erased : w);
  ReliabilityProfile prof;
  prof.m = m;
  prof.channel_label = w.label();
  prof.delta = delta;
  prof.z_bounds.assign(m, 0.0);
  detail::CombineCache cache;
  detail::evolve_rec(leaves, mu, cache, prof.z_bounds, 0);
  return prof;
}

// L = { i : z_bounds[i] <= delta }.
inline std::set<int> select_L(const ReliabilityProfile& prof) {
  std::set<int> out;
  for (int i = 0; i < prof.m; ++i)
    if (prof.z_bounds[i] <= prof.delta) out.insert(i);
  return out;
}

// The `size` most reliable indices, ties broken toward the smaller index.
// Sets *warning if the selection reaches above the delta threshold.
inline std::set<int> select_A(const ReliabilityProfile& prof, int size,
                              bool* warning = nullptr) {
  if (size < 0 || size > prof.m) throw std::invalid_argument("bad info-set size");
  std::vector<int> idx(prof.m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return prof.z_bounds[a] < prof.z_bounds[b];
  });
  std::set<int> out;
  bool warn = false;
  for (int r = 0; r < size; ++r) {
    out.insert(idx[r]);
    if (prof.z_bounds[idx[r]] > prof.delta) warn = true;
  }
  if (warning) *warning = warn;
  return out;
}

// min(1, sum of z over the set): the union bound on block error.
inline double error_bound(const ReliabilityProfile& prof,
                          const std::set<int>& info_set) {
  double s = 0.0;
  for (int i : info_set) s += prof.z_bounds[i];
  return std::min(1.0, s);
}

struct PunctureChoice {
  std::set<int> punctured_set;
  ReliabilityProfile profile;
  double score = 0.0;
};

// Draw `trials` uniformly random puncture patterns of size m - n_target and
// keep the one minimizing the sum of the info_size smallest z_bounds.
// Deterministic given the seed.
inline PunctureChoice choose_puncture(int m, int n_target, int trials,
                                      const BmsChannel& w, int info_size,
                                      uint64_t seed, int mu,
                                      double delta = 1e-6) {
  if (!is_pow2(m)) throw std::invalid_argument("m must be a power of two");
  if (n_target < 1 || n_target > m) throw std::invalid_argument("bad target length");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (info_size < 0 || info_size > m) throw std::invalid_argument("bad info size");
  int n_punct = m - n_target;
  std::mt19937_64 rng(seed);
  PunctureChoice best;
  bool have = false;
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  int effective_trials = (n_punct == 0) ? 1 : trials;
  for (int t = 0; t < effective_trials; ++t) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::set<int> pattern(idx.begin(), idx.begin() + n_punct);
    auto prof = evolve_reliability(w, m, pattern, mu, delta);
    std::vector<double> z = prof.z_bounds;
    std::nth_element(z.begin(), z.begin() + info_size, z.end());
    double score = std::accumulate(z.begin(), z.begin() + info_size, 0.0);
    if (!have || score < best.score) {
      best = {std::move(pattern), std::move(prof), score};
      have = true;
    }
  }
  return best;
}

}  // namespace rcpolar
