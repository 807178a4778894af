#pragma once

// Extra polarization steps that align good-index sets across channels not
// ordered by degradation. One step takes two i.i.d. copies of a block,
// XORs positions good only for the worse channel (D, first copy) with
// positions good only for the better channel (D', second copy), and
// repeats the second operand, halving the mismatch.

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcpolar/construction.hpp"

namespace rcpolar {

class AlignmentError : public std::runtime_error {
 public:
  AlignmentError(std::string msg, int pair_lo = -1, int pair_hi = -1,
                 double residual = 0.0)
      : std::runtime_error(std::move(msg)),
        pair_lo(pair_lo),
        pair_hi(pair_hi),
        residual_mismatch(residual) {}
  int pair_lo, pair_hi;       // offending adjacent channel pair (0-based)
  double residual_mismatch;   // mismatch fraction when giving up
};

enum class MapKind { CopyA, CopyB, Xor, Rep };

struct MapEntry {
  MapKind kind;
  int a_idx = -1;  // source in the first copy (CopyA, Xor, Rep)
  int b_idx = -1;  // source in the second copy (CopyB, Xor, Rep)
};

struct AlignmentStep {
  int n_in = 0;
  std::vector<int> d_set;        // sorted, indices into the first copy
  std::vector<int> d_prime_set;  // sorted, same size, second copy
  std::vector<MapEntry> position_map;  // length 2 * n_in
};

struct AlignmentSchedule {
  std::vector<AlignmentStep> steps;
  int t() const { return static_cast<int>(steps.size()); }
  long long expansion() const { return 1ll << steps.size(); }
};

// D = L_next \ L_cur; D' = the |D| members of L_cur \ L_next with smallest
// z under the current channel (ties toward the smaller index).
inline std::pair<std::vector<int>, std::vector<int>> mismatch_sets(
    const std::set<int>& l_next, const std::set<int>& l_cur,
    const std::vector<double>& z_cur) {
  std::vector<int> d;
  for (int i : l_next)
    if (!l_cur.count(i)) d.push_back(i);
  std::vector<int> donors;
  for (int i : l_cur)
    if (!l_next.count(i)) donors.push_back(i);
  if (static_cast<int>(donors.size()) < static_cast<int>(d.size()))
    throw AlignmentError("block length too small to align: donor set smaller than mismatch set");
  std::stable_sort(donors.begin(), donors.end(), [&](int a, int b) {
    return z_cur[a] < z_cur[b];
  });
  donors.resize(d.size());
  std::sort(donors.begin(), donors.end());
  return {std::move(d), std::move(donors)};
}

inline AlignmentStep build_alignment_step(const std::vector<int>& d,
                                          const std::vector<int>& d_prime,
                                          int n_in) {
  if (d.size() != d_prime.size()) throw std::invalid_argument("|D| != |D'|");
  if (!std::is_sorted(d.begin(), d.end()) ||
      !std::is_sorted(d_prime.begin(), d_prime.end()))
    throw std::invalid_argument("D and D' must be sorted");
  for (size_t i = 0; i < d.size(); ++i) {
    if (d[i] < 0 || d[i] >= n_in || d_prime[i] < 0 || d_prime[i] >= n_in)
      throw std::invalid_argument("alignment index out of range");
    if (i + 1 < d.size() && (d[i] == d[i + 1] || d_prime[i] == d_prime[i + 1]))
      throw std::invalid_argument("duplicate alignment index");
  }
  AlignmentStep step;
  step.n_in = n_in;
  step.d_set = d;
  step.d_prime_set = d_prime;
  step.position_map.reserve(2 * n_in);
  int ca = 0, cb = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    for (; ca < d[i]; ++ca) step.position_map.push_back({MapKind::CopyA, ca, -1});
    for (; cb < d_prime[i]; ++cb) step.position_map.push_back({MapKind::CopyB, -1, cb});
    step.position_map.push_back({MapKind::Xor, d[i], d_prime[i]});
    step.position_map.push_back({MapKind::Rep, d[i], d_prime[i]});
    ca = d[i] + 1;
    cb = d_prime[i] + 1;
  }
  for (; ca < n_in; ++ca) step.position_map.push_back({MapKind::CopyA, ca, -1});
  for (; cb < n_in; ++cb) step.position_map.push_back({MapKind::CopyB, -1, cb});
  return step;
}

// Combined Z bounds after one step: XOR gets the minus bound
// z_a + z_b - z_a*z_b, the repeat gets the plus bound z_a*z_b.
inline std::vector<double> propagate_reliability(const AlignmentStep& step,
                                                 const std::vector<double>& z_a,
                                                 const std::vector<double>& z_b) {
  if (static_cast<int>(z_a.size()) != step.n_in ||
      static_cast<int>(z_b.size()) != step.n_in)
    throw std::invalid_argument("reliability vector length mismatch");
  std::vector<double> out;
  out.reserve(2 * step.n_in);
  for (const auto& e : step.position_map) {
    switch (e.kind) {
      case MapKind::CopyA:
        out.push_back(z_a[e.a_idx]);
        break;
      case MapKind::CopyB:
        out.push_back(z_b[e.b_idx]);
        break;
      case MapKind::Xor: {
        double za = z_a[e.a_idx], zb = z_b[e.b_idx];
        out.push_back(std::clamp(za + zb - za * zb, 0.0, 1.0));
        break;
      }
      case MapKind::Rep:
        out.push_back(std::clamp(z_a[e.a_idx] * z_b[e.b_idx], 0.0, 1.0));
        break;
    }
  }
  return out;
}

struct PairReport {
  int steps_used = 0;
  double initial_mismatch = 0.0;  // |D| / n at the first violation
  double final_mismatch = 0.0;
};

struct AlignmentResult {
  AlignmentSchedule schedule;
  std::vector<std::vector<double>> z;  // per channel, extended block
  std::vector<std::set<int>> a_sets;   // per channel, rank-selected, nested
  std::vector<PairReport> pair_reports;  // one per adjacent pair
};

namespace detail {

inline std::set<int> rank_select(const std::vector<double>& z, int size) {
  ReliabilityProfile p;
  p.m = static_cast<int>(z.size());
  p.z_bounds = z;
  return select_A(p, size);
}

inline std::set<int> threshold_select(const std::vector<double>& z, double delta) {
  std::set<int> out;
  for (int i = 0; i < static_cast<int>(z.size()); ++i)
    if (z[i] <= delta) out.insert(i);
  return out;
}

}  // namespace detail

// Applies alignment steps until the rank-selected A sets are nested across
// all adjacent channel pairs. Sizes and block length double with each
// step. D is taken from the threshold sets; if those are already nested
// but the rank selection is not (boundary ties), the rank sets drive the
// step instead. min_total_steps pads the schedule with empty-D doubling
// steps, used by the scheme builder to equalize expansion across stages.
inline AlignmentResult align_until_nested(
    const std::vector<ReliabilityProfile>& profiles,
    const std::vector<int>& required_sizes, int t_max, double delta,
    int min_total_steps = 0) {
  int nch = static_cast<int>(profiles.size());
  if (nch == 0 || static_cast<int>(required_sizes.size()) != nch)
    throw std::invalid_argument("profiles/sizes mismatch");
  AlignmentResult res;
  res.z.reserve(nch);
  int n = profiles[0].m;
  for (const auto& p : profiles) {
    if (p.m != n) throw std::invalid_argument("profiles on different block lengths");
    res.z.push_back(p.z_bounds);
  }
  std::vector<long long> sizes(required_sizes.begin(), required_sizes.end());
  res.pair_reports.assign(std::max(0, nch - 1), {});

  auto apply_step = [&](AlignmentStep step) {
    for (auto& z : res.z) z = propagate_reliability(step, z, z);
    res.schedule.steps.push_back(std::move(step));
    n *= 2;
    for (auto& s : sizes) s *= 2;
  };

  for (;;) {
    std::vector<std::set<int>> a_sets(nch);
    for (int j = 0; j < nch; ++j)
      a_sets[j] = detail::rank_select(res.z[j], static_cast<int>(sizes[j]));
    int bad = -1;
    for (int j = 0; j + 1 < nch; ++j) {
      if (!std::includes(a_sets[j].begin(), a_sets[j].end(),
                         a_sets[j + 1].begin(), a_sets[j + 1].end())) {
        bad = j;
        break;
      }
    }
    if (bad < 0) {
      if (res.schedule.t() >= min_total_steps) {
        res.a_sets = std::move(a_sets);
        for (int j = 0; j + 1 < nch; ++j) {
          auto l_cur = detail::threshold_select(res.z[j], delta);
          auto l_next = detail::threshold_select(res.z[j + 1], delta);
          int cnt = 0;
          for (int i : l_next)
            if (!l_cur.count(i)) ++cnt;
          res.pair_reports[j].final_mismatch =
              static_cast<double>(cnt) / static_cast<double>(n);
        }
        return res;
      }
      apply_step(build_alignment_step({}, {}, n));
      continue;
    }

    auto l_cur = detail::threshold_select(res.z[bad], delta);
    auto l_next = detail::threshold_select(res.z[bad + 1], delta);
    auto [d, dp] = mismatch_sets(l_next, l_cur, res.z[bad]);
    if (d.empty()) {
      // Threshold sets already nested; resolve the rank-set violation
      // directly.
      std::tie(d, dp) = mismatch_sets(a_sets[bad + 1], a_sets[bad], res.z[bad]);
    }
    if (d.empty())
      throw AlignmentError("alignment stalled: nesting violated with empty mismatch set",
                           bad, bad + 1);
    auto& rep = res.pair_reports[bad];
    if (rep.steps_used == 0)
      rep.initial_mismatch = static_cast<double>(d.size()) / static_cast<double>(n);
    if (rep.steps_used >= t_max)
      throw AlignmentError(
          "alignment failed: pair (" + std::to_string(bad + 1) + "," +
              std::to_string(bad + 2) + ") still mismatched after t_max=" +
              std::to_string(t_max) + " steps",
          bad, bad + 1,
          static_cast<double>(d.size()) / static_cast<double>(n));
    ++rep.steps_used;
    apply_step(build_alignment_step(d, dp, n));
  }
}

}  // namespace rcpolar
