#pragma once

// HARQ with incremental redundancy over a built ChainScheme: one genie
// ACK/NACK session per trial, plus a deterministic multi-threaded Monte
// Carlo harness with per-trial RNG substreams.

#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "rcpolar/ratecompat.hpp"

namespace rcpolar {

struct HarqTranscript {
  int true_channel_index = 1;  // 1-based
  int stages_attempted = 0;
  int success_stage = 0;  // 0 = failure after all stages
  std::vector<long long> bits_transmitted;  // per attempted stage
  std::vector<bool> decode_success;         // genie outcome per attempt
  bool info_correct = false;
};

namespace detail {

// Output sampler for one channel: inverse-CDF over the transition rows,
// with the per-symbol LLRs precomputed. Uniform variates come from the top
// 53 bits of the generator so results do not depend on library internals.
struct ChannelSampler {
  std::vector<double> cdf0, cdf1, llr;

  explicit ChannelSampler(const BmsChannel& w) {
    double a0 = 0.0, a1 = 0.0;
    for (int y = 0; y < w.alphabet_size(); ++y) {
      const auto& t = w.transitions()[y];
      a0 += t.p0;
      a1 += t.p1;
      cdf0.push_back(a0);
      cdf1.push_back(a1);
      llr.push_back(llr_of_output(w, y));
    }
    cdf0.back() = cdf1.back() = 1.0;
  }

  double sample_llr(int bit, std::mt19937_64& rng) const {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const auto& cdf = bit ? cdf1 : cdf0;
    size_t y = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (y >= cdf.size()) y = cdf.size() - 1;
    return llr[y];
  }
};

}  // namespace detail

// override_channel, when given, replaces the scheme channel as the physical
// link (the decoder still targets stage true_channel_index's design sets).
inline HarqTranscript run_session(const ChainScheme& scheme,
                                  int true_channel_index,
                                  const std::vector<uint8_t>& info_bits,
                                  std::mt19937_64& rng,
                                  const BmsChannel* override_channel = nullptr) {
  int K = scheme.profile.num_stages;
  if (true_channel_index < 1 || true_channel_index > K)
    throw std::invalid_argument("true channel index out of range");
  detail::ChannelSampler sampler(override_channel
                                     ? *override_channel
                                     : scheme.channels[true_channel_index - 1]);

  HarqTranscript tr;
  tr.true_channel_index = true_channel_index;
  std::vector<std::vector<uint8_t>> prior_u;
  std::vector<std::vector<double>> llrs_per_stage;
  for (int l = 1; l <= K; ++l) {
    auto enc = encode_transmission(scheme, l, info_bits, prior_u);
    prior_u.push_back(std::move(enc.u_ext));
    std::vector<double> llrs;
    llrs.reserve(enc.coded_bits.size());
    for (uint8_t bit : enc.coded_bits) llrs.push_back(sampler.sample_llr(bit, rng));
    tr.bits_transmitted.push_back(static_cast<long long>(llrs.size()));
    llrs_per_stage.push_back(std::move(llrs));
    ++tr.stages_attempted;

    auto decoded = backward_decode(scheme, l, llrs_per_stage);
    bool ok = decoded == info_bits;  // genie-aided ACK/NACK
    tr.decode_success.push_back(ok);
    if (ok) {
      tr.success_stage = l;
      tr.info_correct = true;
      break;
    }
  }
  return tr;
}

struct SimulationConfig {
  const ChainScheme* scheme = nullptr;
  int true_channel_index = 1;
  long long trials = 1;
  uint64_t seed = 0;
  int workers = 1;
};

struct StageStats {
  int stage = 0;
  long long trials_reaching = 0;
  long long failures = 0;
  double fer = 0.0;
  double ci_low = 0.0, ci_high = 1.0;  // Wilson 95%
  double union_bound = 1.0;
};

struct SimulationStats {
  std::vector<StageStats> per_stage;
  long long trials = 0;
  long long successes = 0;
  double mean_bits_on_success = 0.0;
  double throughput = 0.0;  // k_eff / mean bits, over successful sessions
};

namespace detail {

inline void wilson_interval(long long fails, long long n, double& lo, double& hi) {
  if (n == 0) {
    lo = 0.0;
    hi = 1.0;
    return;
  }
  double z = 1.959963984540054;
  double p = static_cast<double>(fails) / static_cast<double>(n);
  double nn = static_cast<double>(n);
  double denom = 1.0 + z * z / nn;
  double center = (p + z * z / (2.0 * nn)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  lo = std::max(0.0, center - half);
  hi = std::min(1.0, center + half);
}

}  // namespace detail

inline SimulationStats monte_carlo(const SimulationConfig& config) {
  if (!config.scheme) throw std::invalid_argument("missing scheme");
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  const ChainScheme& scheme = *config.scheme;
  int K = scheme.profile.num_stages;

  // Per-trial substreams keyed only by (seed, trial) so the reduction is
  // independent of worker count and scheduling.
  std::vector<HarqTranscript> results(config.trials);
  auto run_range = [&](long long lo, long long hi) {
    for (long long t = lo; t < hi; ++t) {
      std::mt19937_64 rng(detail::splitmix64(
          config.seed ^ detail::splitmix64(static_cast<uint64_t>(t) + 1)));
      std::vector<uint8_t> info(scheme.k_eff);
      for (auto& b : info) b = static_cast<uint8_t>(rng() & 1);
      results[t] = run_session(scheme, config.true_channel_index, info, rng);
    }
  };
  int workers = std::max(1, config.workers);
  if (workers == 1 || config.trials < 2) {
    run_range(0, config.trials);
  } else {
    std::vector<std::thread> pool;
    long long chunk = (config.trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      long long lo = w * chunk, hi = std::min<long long>(config.trials, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SimulationStats stats;
  stats.trials = config.trials;
  stats.per_stage.resize(K);
  for (int l = 0; l < K; ++l) {
    stats.per_stage[l].stage = l + 1;
    stats.per_stage[l].union_bound = scheme.union_bounds[l];
  }
  double bits_sum = 0.0;
  for (const auto& tr : results) {  // sequential, order-deterministic
    long long cum = 0;
    for (int l = 0; l < tr.stages_attempted; ++l) {
      ++stats.per_stage[l].trials_reaching;
      if (!tr.decode_success[l]) ++stats.per_stage[l].failures;
      cum += tr.bits_transmitted[l];
    }
    if (tr.success_stage > 0) {
      ++stats.successes;
      bits_sum += static_cast<double>(cum);
    }
  }
  for (auto& s : stats.per_stage) {
    if (s.trials_reaching > 0)
      s.fer = static_cast<double>(s.failures) / static_cast<double>(s.trials_reaching);
    detail::wilson_interval(s.failures, s.trials_reaching, s.ci_low, s.ci_high);
  }
  if (stats.successes > 0) {
    stats.mean_bits_on_success = bits_sum / static_cast<double>(stats.successes);
    stats.throughput =
        static_cast<double>(scheme.k_eff) / stats.mean_bits_on_success;
  }
  return stats;
}

}  // namespace rcpolar
