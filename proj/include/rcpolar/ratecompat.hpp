#pragma once

// Full rate-compatible scheme assembly: rate profile, per-transmission
// block specs with nested A sets, repetition maps chaining the blocks,
// incremental encoding and backward decoding. Alignment steps of each
// stage are decoded as extra SC layers wrapping the base blocks.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcpolar/alignment.hpp"
#include "rcpolar/channel.hpp"
#include "rcpolar/construction.hpp"
#include "rcpolar/polar.hpp"

namespace rcpolar {

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline long long llgcd(long long a, long long b) {
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Best rational approximation p/q of r with error < tol, by continued
// fractions. Used only to phrase the "smallest valid k" diagnostic.
inline std::pair<long long, long long> rationalize(double r, double tol = 1e-9) {
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = r;
  for (int it = 0; it < 64; ++it) {
    long long a = static_cast<long long>(std::floor(x));
    long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (std::abs(r - static_cast<double>(p1) / static_cast<double>(q1)) < tol)
      break;
    double frac = x - static_cast<double>(a);
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  return {p1, q1};
}

}  // namespace detail

struct RateProfile {
  long long k = 0;
  int num_stages = 0;                      // K
  std::vector<double> rates;               // R_1 > ... > R_K
  std::vector<long long> incremental_lengths;  // n_l
  std::vector<long long> cumulative_lengths;   // nbar_l
};

inline RateProfile rate_profile(long long k, const std::vector<double>& rates) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (rates.empty()) throw std::invalid_argument("need at least one rate");
  for (size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0 && rates[i] <= 1.0))
      throw std::invalid_argument("rates must lie in (0,1]");
    if (i > 0 && !(rates[i] < rates[i - 1]))
      throw std::invalid_argument("rates must be strictly decreasing");
  }
  RateProfile prof;
  prof.k = k;
  prof.num_stages = static_cast<int>(rates.size());
  prof.rates = rates;
  long long prev = 0;
  for (double r : rates) {
    double nbar_real = static_cast<double>(k) / r;
    long long nbar = std::llround(nbar_real);
    if (std::abs(nbar_real - static_cast<double>(nbar)) > 1e-6) {
      long long k_min = 1;
      for (double rr : rates) {
        auto [p, q] = detail::rationalize(rr);
        (void)q;
        k_min = k_min / detail::llgcd(k_min, p) * p;  // lcm of numerators
      }
      throw std::invalid_argument(
          "k/R_i is not an integer; smallest valid k is " + std::to_string(k_min));
    }
    if (nbar <= prev)
      throw std::invalid_argument("cumulative lengths must strictly increase");
    prof.cumulative_lengths.push_back(nbar);
    prof.incremental_lengths.push_back(nbar - prev);
    prev = nbar;
  }
  return prof;
}

// Source coordinate of a repeated value: the extended u-domain index
// `u_idx` of transmission block `stage` (0-based).
struct RepeatSource {
  int stage;
  long long u_idx;
};

struct StageScheme {
  int m = 0;                     // base block length, power of two
  long long n = 0;               // transmitted bits per base block (m minus punctures)
  std::set<int> punctured_set;   // base-block channel positions
  AlignmentSchedule schedule;    // steps applied to this stage (incl. padding)
  long long effective_m = 0;     // m * 2^T
  long long effective_n = 0;     // n * 2^T
  std::vector<std::set<long long>> a_sets;     // A_j^{(l)}, j = l..K
  std::vector<std::vector<double>> z;          // z_j^{(l)}, extended block
  std::vector<PairReport> pair_reports;
  std::vector<std::pair<RepeatSource, long long>> repeat_map;  // l >= 2
};

struct ChainScheme {
  RateProfile profile;
  std::vector<BmsChannel> channels;
  std::vector<StageScheme> stages;
  int expansion_exponent = 0;  // T
  long long k_eff = 0;         // k * 2^T
  double delta = 1e-6;
  int mu = 64;
  int t_max = 8;
  int puncture_trials = 1;
  uint64_t seed = 0;
  // union_bounds[lbar-1] = union bound on session failure when decoding at
  // stage lbar over channel W_lbar, summing over all blocks' unfrozen sets.
  std::vector<double> union_bounds;

  long long expansion() const { return 1ll << expansion_exponent; }
};

namespace detail {

inline std::set<long long> rank_select_ll(const std::vector<double>& z,
                                          long long size) {
  std::vector<long long> idx(z.size());
  std::iota(idx.begin(), idx.end(), 0ll);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](long long a, long long b) { return z[a] < z[b]; });
  return std::set<long long>(idx.begin(), idx.begin() + size);
}

}  // namespace detail

// Ordered bijection I^{(l)} -> A_l^{(l)}: sources are the values dropped
// from the unfrozen sets of blocks 1..l-1 when moving from stage l-1 to
// stage l, enumerated block-major then index-ascending; targets ascend.
inline std::vector<std::pair<RepeatSource, long long>> chain_repeat_map(
    const std::vector<StageScheme>& stages, int ell /* 1-based, >= 2 */) {
  std::vector<RepeatSource> sources;
  for (int j = 1; j < ell; ++j) {
    const auto& prev = stages[j - 1].a_sets[ell - 1 - j];  // A_{l-1}^{(j)}
    const auto& cur = stages[j - 1].a_sets[ell - j];       // A_l^{(j)}
    for (long long i : prev)
      if (!cur.count(i)) sources.push_back({j - 1, i});
  }
  const auto& targets = stages[ell - 1].a_sets[0];  // A_l^{(l)}
  if (sources.size() != targets.size())
    throw std::logic_error("repetition map size mismatch (chain identity violated)");
  std::vector<std::pair<RepeatSource, long long>> map;
  map.reserve(sources.size());
  auto it = targets.begin();
  for (const auto& s : sources) map.push_back({s, *it++});
  return map;
}

inline ChainScheme build_scheme(const std::vector<BmsChannel>& channels,
                                const RateProfile& profile, double delta,
                                int mu, int t_max, int puncture_trials,
                                uint64_t seed) {
  int K = profile.num_stages;
  if (static_cast<int>(channels.size()) != K)
    throw std::invalid_argument("need one channel per stage");
  for (int j = 0; j < K; ++j) {
    double c = capacity(channels[j]);
    if (j > 0 && !(c < capacity(channels[j - 1]) - 1e-12))
      throw std::invalid_argument("channel capacities must be strictly decreasing");
    if (!(c > profile.rates[j]))
      throw std::invalid_argument("rate above capacity at stage " + std::to_string(j + 1));
  }

  ChainScheme scheme;
  scheme.profile = profile;
  scheme.channels = channels;
  scheme.delta = delta;
  scheme.mu = mu;
  scheme.t_max = t_max;
  scheme.puncture_trials = puncture_trials;
  scheme.seed = seed;

  // Base blocks: puncture pattern per stage, then reliability profiles for
  // every channel the stage may be decoded under.
  std::vector<std::vector<ReliabilityProfile>> profs(K);
  std::vector<std::vector<int>> base_sizes(K);
  for (int l = 0; l < K; ++l) {
    long long n = profile.incremental_lengths[l];
    int m = 1;
    while (m < n) m *= 2;
    for (int j = l; j < K; ++j) {
      double sz = static_cast<double>(n) * profile.rates[j];
      long long s = std::llround(sz);
      if (std::abs(sz - static_cast<double>(s)) > 1e-6)
        throw std::invalid_argument("non-integral info-set size n_l * R_j; adjust k");
      base_sizes[l].push_back(static_cast<int>(s));
    }
    auto choice = choose_puncture(m, static_cast<int>(n), puncture_trials,
                                  channels[l], base_sizes[l][0],
                                  detail::splitmix64(seed + static_cast<uint64_t>(l)),
                                  mu, delta);
    StageScheme st;
    st.m = m;
    st.n = n;
    st.punctured_set = choice.punctured_set;
    scheme.stages.push_back(std::move(st));
    profs[l].push_back(std::move(choice.profile));
    for (int j = l + 1; j < K; ++j)
      profs[l].push_back(evolve_reliability(channels[j], m,
                                            scheme.stages[l].punctured_set, mu, delta));
  }

  // Align each stage; then equalize expansion across stages with empty-D
  // padding. Padding can perturb rank selection through exact ties, so
  // iterate to a fixed point.
  std::vector<AlignmentResult> results(K);
  int T = 0;
  for (int l = 0; l < K; ++l) {
    results[l] = align_until_nested(profs[l], base_sizes[l], t_max, delta, 0);
    T = std::max(T, results[l].schedule.t());
  }
  for (int iter = 0;; ++iter) {
    bool uniform = true;
    for (int l = 0; l < K; ++l) {
      if (results[l].schedule.t() < T) {
        results[l] = align_until_nested(profs[l], base_sizes[l], t_max, delta, T);
        T = std::max(T, results[l].schedule.t());
        uniform = false;
      }
    }
    if (uniform) break;
    if (iter > 4 * t_max + 8)
      throw AlignmentError("expansion equalization did not converge");
  }

  scheme.expansion_exponent = T;
  scheme.k_eff = profile.k << T;
  for (int l = 0; l < K; ++l) {
    auto& st = scheme.stages[l];
    st.schedule = std::move(results[l].schedule);
    st.effective_m = static_cast<long long>(st.m) << T;
    st.effective_n = st.n << T;
    st.pair_reports = std::move(results[l].pair_reports);
    st.z = std::move(results[l].z);
    for (const auto& a : results[l].a_sets)
      st.a_sets.emplace_back(a.begin(), a.end());
  }
  if (static_cast<long long>(scheme.stages[0].a_sets[0].size()) != scheme.k_eff)
    throw std::logic_error("stage-1 unfrozen set does not hold k_eff bits");

  for (int l = 2; l <= K; ++l)
    scheme.stages[l - 1].repeat_map = chain_repeat_map(scheme.stages, l);

  for (int lbar = 1; lbar <= K; ++lbar) {
    double s = 0.0;
    for (int l = 1; l <= lbar; ++l) {
      const auto& st = scheme.stages[l - 1];
      const auto& z = st.z[lbar - l];
      for (long long i : st.a_sets[lbar - l]) s += z[i];
    }
    scheme.union_bounds.push_back(std::min(1.0, s));
  }
  return scheme;
}

// --- Encoding -------------------------------------------------------------

namespace detail {

// Split the extended u-vector through the schedule into base-block
// u-vectors, in leaf order (a-subtree first at every step).
inline void deinterleave(const std::vector<uint8_t>& u_ext,
                         const std::vector<AlignmentStep>& steps, int step_idx,
                         std::vector<std::vector<uint8_t>>& out) {
  if (step_idx < 0) {
    out.push_back(u_ext);
    return;
  }
  const auto& step = steps[step_idx];
  std::vector<uint8_t> a(step.n_in, 0), b(step.n_in, 0);
  uint8_t xor_val = 0;
  for (size_t pos = 0; pos < step.position_map.size(); ++pos) {
    const auto& e = step.position_map[pos];
    uint8_t v = u_ext[pos];
    switch (e.kind) {
      case MapKind::CopyA:
        a[e.a_idx] = v;
        break;
      case MapKind::CopyB:
        b[e.b_idx] = v;
        break;
      case MapKind::Xor:
        xor_val = v;
        break;
      case MapKind::Rep:
        b[e.b_idx] = v;
        a[e.a_idx] = xor_val ^ v;
        break;
    }
  }
  deinterleave(a, steps, step_idx - 1, out);
  deinterleave(b, steps, step_idx - 1, out);
}

}  // namespace detail

struct EncodedTransmission {
  std::vector<uint8_t> coded_bits;  // transmitted bits, punctured removed
  std::vector<uint8_t> u_ext;       // extended u-vector (kept for chaining)
};

// Build and encode transmission `ell` (1-based). For ell = 1 the unfrozen
// set carries info_bits; for ell >= 2 it carries repeats of earlier blocks'
// u-values via the repetition map. Everything else is frozen to zero.
inline EncodedTransmission encode_transmission(
    const ChainScheme& scheme, int ell, const std::vector<uint8_t>& info_bits,
    const std::vector<std::vector<uint8_t>>& prior_u_vectors) {
  if (ell < 1 || ell > scheme.profile.num_stages)
    throw std::invalid_argument("stage index out of range");
  const auto& st = scheme.stages[ell - 1];
  std::vector<uint8_t> u_ext(st.effective_m, 0);
  if (ell == 1) {
    if (static_cast<long long>(info_bits.size()) != scheme.k_eff)
      throw std::invalid_argument("expected k_eff info bits");
    auto it = st.a_sets[0].begin();
    for (uint8_t bit : info_bits) u_ext[*it++] = bit & 1;
  } else {
    if (static_cast<int>(prior_u_vectors.size()) < ell - 1)
      throw std::invalid_argument("missing prior u-vectors");
    for (const auto& [src, tgt] : st.repeat_map)
      u_ext[tgt] = prior_u_vectors[src.stage][src.u_idx] & 1;
  }
  std::vector<std::vector<uint8_t>> copies;
  copies.reserve(1ull << scheme.expansion_exponent);
  detail::deinterleave(u_ext, st.schedule.steps,
                       static_cast<int>(st.schedule.steps.size()) - 1, copies);
  EncodedTransmission out;
  out.u_ext = std::move(u_ext);
  out.coded_bits.reserve(st.effective_n);
  for (const auto& u : copies) {
    auto x = polar_encode(u);
    for (int j = 0; j < st.m; ++j)
      if (!st.punctured_set.count(j)) out.coded_bits.push_back(x[j]);
  }
  return out;
}

// --- Decoding -------------------------------------------------------------

// Composite SC decoder: a leaf wraps one base-block StepwiseSc; an inner
// node walks an alignment step's position map, treating XOR positions as a
// check-node layer and repeat positions as the matching variable node.
class AlignedDecoder {
 public:
  explicit AlignedDecoder(std::vector<double> llrs_contig)
      : leaf_(std::make_unique<StepwiseSc>(std::move(llrs_contig))) {}

  AlignedDecoder(std::unique_ptr<AlignedDecoder> a,
                 std::unique_ptr<AlignedDecoder> b, const AlignmentStep* step)
      : a_(std::move(a)), b_(std::move(b)), step_(step) {}

  double peek_llr() {
    if (leaf_) return leaf_->peek_llr();
    const auto& e = step_->position_map.at(pos_);
    switch (e.kind) {
      case MapKind::CopyA:
        return a_->peek_llr();
      case MapKind::CopyB:
        return b_->peek_llr();
      case MapKind::Xor:
        return f_llr(a_->peek_llr(), b_->peek_llr());
      case MapKind::Rep:
        return g_llr(a_->peek_llr(), b_->peek_llr(), xor_bit_);
    }
    throw std::logic_error("unreachable");
  }

  void push_bit(int bit) {
    if (leaf_) {
      leaf_->push_bit(bit);
      return;
    }
    const auto& e = step_->position_map.at(pos_);
    switch (e.kind) {
      case MapKind::CopyA:
        a_->push_bit(bit);
        break;
      case MapKind::CopyB:
        b_->push_bit(bit);
        break;
      case MapKind::Xor:
        xor_bit_ = bit & 1;  // consumed at the paired repeat position
        break;
      case MapKind::Rep:
        b_->push_bit(bit);
        a_->push_bit(xor_bit_ ^ (bit & 1));
        break;
    }
    ++pos_;
  }

 private:
  std::unique_ptr<StepwiseSc> leaf_;
  std::unique_ptr<AlignedDecoder> a_, b_;
  const AlignmentStep* step_ = nullptr;
  size_t pos_ = 0;
  int xor_bit_ = 0;
};

namespace detail {

// llrs_tx: one LLR per transmitted bit of the stage, in transmitted order
// (copies in leaf order, unpunctured channel positions ascending).
inline std::unique_ptr<AlignedDecoder> make_stage_decoder(
    const StageScheme& st, const std::vector<double>& llrs_tx) {
  if (static_cast<long long>(llrs_tx.size()) != st.effective_n)
    throw std::invalid_argument("llr vector length mismatch");
  int copies = 1 << st.schedule.t();
  std::vector<std::unique_ptr<AlignedDecoder>> nodes;
  nodes.reserve(copies);
  size_t cursor = 0;
  for (int c = 0; c < copies; ++c) {
    std::vector<double> llrs_x(st.m, 0.0);  // punctured -> erasure
    for (int j = 0; j < st.m; ++j)
      if (!st.punctured_set.count(j)) llrs_x[j] = llrs_tx[cursor++];
    nodes.push_back(std::make_unique<AlignedDecoder>(llrs_to_contig(llrs_x)));
  }
  for (int s = 0; s < st.schedule.t(); ++s) {
    const AlignmentStep* step = &st.schedule.steps[s];
    std::vector<std::unique_ptr<AlignedDecoder>> merged;
    merged.reserve(nodes.size() / 2);
    for (size_t i = 0; i + 1 < nodes.size(); i += 2)
      merged.push_back(std::make_unique<AlignedDecoder>(
          std::move(nodes[i]), std::move(nodes[i + 1]), step));
    nodes = std::move(merged);
  }
  return std::move(nodes.front());
}

}  // namespace detail

// Decode one stage block: indices in `unfrozen` take SC hard decisions,
// everything else is pushed from `known` (absent entries are frozen zeros).
inline std::vector<uint8_t> decode_stage(
    const StageScheme& st, const std::vector<double>& llrs_tx,
    const std::set<long long>& unfrozen,
    const std::map<long long, uint8_t>& known) {
  auto dec = detail::make_stage_decoder(st, llrs_tx);
  std::vector<uint8_t> u(st.effective_m, 0);
  for (long long i = 0; i < st.effective_m; ++i) {
    if (unfrozen.count(i)) {
      u[i] = dec->peek_llr() < 0.0 ? 1 : 0;
    } else {
      auto it = known.find(i);
      u[i] = it == known.end() ? 0 : (it->second & 1);
    }
    dec->push_bit(u[i]);
  }
  return u;
}

// Backward decoding after `lbar` transmissions: decode block lbar with
// unfrozen set A_lbar^{(lbar)}, then walk earlier blocks injecting values
// recovered through the repetition maps as known bits.
inline std::vector<uint8_t> backward_decode(
    const ChainScheme& scheme, int lbar,
    const std::vector<std::vector<double>>& llrs_per_stage) {
  if (lbar < 1 || lbar > scheme.profile.num_stages)
    throw std::invalid_argument("stage index out of range");
  if (static_cast<int>(llrs_per_stage.size()) < lbar)
    throw std::invalid_argument("missing channel outputs");
  std::vector<std::map<long long, uint8_t>> recovered(lbar);
  std::vector<uint8_t> u1;
  for (int l = lbar; l >= 1; --l) {
    const auto& st = scheme.stages[l - 1];
    const auto& unfrozen = st.a_sets[lbar - l];  // A_lbar^{(l)}
    auto u = decode_stage(st, llrs_per_stage[l - 1], unfrozen, recovered[l - 1]);
    for (const auto& [src, tgt] : st.repeat_map)
      if (src.stage < lbar) recovered[src.stage][src.u_idx] = u[tgt];
    if (l == 1) u1 = std::move(u);
  }
  std::vector<uint8_t> info;
  info.reserve(scheme.k_eff);
  for (long long i : scheme.stages[0].a_sets[0]) info.push_back(u1[i]);
  return info;
}

}  // namespace rcpolar
