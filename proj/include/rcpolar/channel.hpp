#pragma once

// Finite-alphabet binary-input memoryless symmetric channels, stored in a
// canonical form (output symbols sorted by decreasing likelihood ratio,
// equal-ratio symbols merged), plus the channel-level transforms that code
// construction runs on: single polarization steps and degrading
// quantization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace rcpolar {

struct Transition {
  double p0 = 0.0;  // P(y | input 0)
  double p1 = 0.0;  // P(y | input 1)
};

enum class ChannelKind { Bec, Bsc, Explicit };

namespace detail {

// LR(a) > LR(b) as a cross product, valid for non-negative probabilities.
inline bool lr_greater(const Transition& a, const Transition& b) {
  return a.p0 * b.p1 > b.p0 * a.p1;
}

inline bool lr_equal(const Transition& a, const Transition& b) {
  double x = a.p0 * b.p1;
  double y = b.p0 * a.p1;
  return std::abs(x - y) <= 1e-13 * (x + y) + 1e-300;
}

// Capacity contribution of one output symbol under uniform input, in bits.
inline double sym_capacity_term(double p0, double p1) {
  double s = p0 + p1;
  if (s <= 0.0) return 0.0;
  double t = 0.0;
  if (p0 > 0.0) t += 0.5 * p0 * std::log2(2.0 * p0 / s);
  if (p1 > 0.0) t += 0.5 * p1 * std::log2(2.0 * p1 / s);
  return t;
}

}  // namespace detail

class BmsChannel {
 public:
  BmsChannel(std::vector<Transition> transitions, std::string label,
             ChannelKind kind = ChannelKind::Explicit, double param = 0.0)
      : label_(std::move(label)), kind_(kind), param_(param) {
    canonicalize(std::move(transitions));
  }

  const std::vector<Transition>& transitions() const { return transitions_; }
  int alphabet_size() const { return static_cast<int>(transitions_.size()); }
  const std::string& label() const { return label_; }
  ChannelKind kind() const { return kind_; }
  double param() const { return param_; }

  // Checks the BMS invariants: rows sum to 1, probabilities in range, and
  // the mirror symmetry of the canonical form (the involution pairs symbol
  // i with symbol size-1-i).
  void validate(double tol = 1e-9) const {
    double s0 = 0.0, s1 = 0.0;
    for (const auto& t : transitions_) {
      if (t.p0 < -1e-15 || t.p0 > 1.0 + 1e-12 || t.p1 < -1e-15 ||
          t.p1 > 1.0 + 1e-12)
        throw std::domain_error("channel probability out of [0,1]");
      s0 += t.p0;
      s1 += t.p1;
    }
    if (std::abs(s0 - 1.0) > 1e-12 || std::abs(s1 - 1.0) > 1e-12)
      throw std::domain_error("channel rows do not sum to 1");
    int n = alphabet_size();
    for (int i = 0; i < n; ++i) {
      const auto& a = transitions_[i];
      const auto& b = transitions_[n - 1 - i];
      if (std::abs(a.p0 - b.p1) > tol || std::abs(a.p1 - b.p0) > tol)
        throw std::domain_error("channel is not symmetric");
    }
  }

  uint64_t content_hash() const {
    // FNV-1a over the canonical transition bytes; used to memoize combines.
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double v) {
      uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
      }
    };
    for (const auto& t : transitions_) {
      mix(t.p0);
      mix(t.p1);
    }
    return h;
  }

 private:
  void canonicalize(std::vector<Transition> raw) {
    std::vector<Transition> kept;
    kept.reserve(raw.size());
    for (const auto& t : raw)
      if (t.p0 > 0.0 || t.p1 > 0.0) kept.push_back(t);
    std::sort(kept.begin(), kept.end(),
              [](const Transition& a, const Transition& b) {
                if (detail::lr_greater(a, b)) return true;
                if (detail::lr_greater(b, a)) return false;
                return a.p0 > b.p0;  // stable total order among equal ratios
              });
    transitions_.clear();
    for (const auto& t : kept) {
      if (!transitions_.empty() && detail::lr_equal(transitions_.back(), t)) {
        transitions_.back().p0 += t.p0;
        transitions_.back().p1 += t.p1;
      } else {
        transitions_.push_back(t);
      }
    }
  }

  std::vector<Transition> transitions_;
  std::string label_;
  ChannelKind kind_;
  double param_;

  friend bool approx_equal(const BmsChannel& a, const BmsChannel& b,
                           double tol);
};

inline bool approx_equal(const BmsChannel& a, const BmsChannel& b,
                         double tol = 1e-12) {
  if (a.alphabet_size() != b.alphabet_size()) return false;
  for (int i = 0; i < a.alphabet_size(); ++i) {
    if (std::abs(a.transitions_[i].p0 - b.transitions_[i].p0) > tol)
      return false;
    if (std::abs(a.transitions_[i].p1 - b.transitions_[i].p1) > tol)
      return false;
  }
  return true;
}

inline BmsChannel make_bec(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument("erasure probability must be in [0,1]");
  std::vector<Transition> t;
  t.push_back({1.0 - eps, 0.0});
  t.push_back({eps, eps});
  t.push_back({0.0, 1.0 - eps});
  return BmsChannel(std::move(t), "BEC(" + std::to_string(eps) + ")",
                    ChannelKind::Bec, eps);
}

inline BmsChannel make_bsc(double p) {
  if (!(p >= 0.0 && p <= 0.5))
    throw std::invalid_argument("crossover probability must be in [0,0.5]");
  std::vector<Transition> t;
  t.push_back({1.0 - p, p});
  t.push_back({p, 1.0 - p});
  return BmsChannel(std::move(t), "BSC(" + std::to_string(p) + ")",
                    ChannelKind::Bsc, p);
}

inline double bhattacharyya(const BmsChannel& w) {
  double z = 0.0;
  for (const auto& t : w.transitions()) z += std::sqrt(t.p0 * t.p1);
  return std::min(z, 1.0);
}

inline double capacity(const BmsChannel& w) {
  double c = 0.0;
  for (const auto& t : w.transitions())
    c += detail::sym_capacity_term(t.p0, t.p1);
  return std::clamp(c, 0.0, 1.0);
}

enum class Branch { Minus, Plus };

// One polarization step between two (possibly distinct) channels.
// Minus: channel of u1 = x1^x2 given (y1,y2). Plus: channel of u2 = x2
// given (y1,y2,u1). Output alphabets are canonicalized product alphabets.
inline BmsChannel polar_combine(const BmsChannel& wa, const BmsChannel& wb,
                                Branch branch) {
  const auto& ta = wa.transitions();
  const auto& tb = wb.transitions();
  std::vector<Transition> out;
  if (branch == Branch::Minus) {
    out.reserve(ta.size() * tb.size());
    for (const auto& a : ta)
      for (const auto& b : tb)
        out.push_back({0.5 * (a.p0 * b.p0 + a.p1 * b.p1),
                       0.5 * (a.p1 * b.p0 + a.p0 * b.p1)});
  } else {
    out.reserve(2 * ta.size() * tb.size());
    for (int u1 = 0; u1 < 2; ++u1)
      for (const auto& a : ta)
        for (const auto& b : tb) {
          double a_if0 = (u1 == 0) ? a.p0 : a.p1;  // x1 = u1 ^ u2
          double a_if1 = (u1 == 0) ? a.p1 : a.p0;
          out.push_back({0.5 * a_if0 * b.p0, 0.5 * a_if1 * b.p1});
        }
  }
  return BmsChannel(std::move(out),
                    branch == Branch::Minus ? "-" : "+");
}

// Greedy degrading merge: represents the symmetric channel as conjugate
// symbol pairs sorted by likelihood ratio and repeatedly merges the
// adjacent pair with the smallest capacity loss until at most mu output
// symbols remain. The result is degraded with respect to the input.
inline BmsChannel degrade_merge(const BmsChannel& w, int mu) {
  if (mu < 2 || (mu % 2) != 0)
    throw std::invalid_argument("mu must be an even integer >= 2");
  if (w.alphabet_size() <= mu) return w;

  // Conjugate-pair representatives (a, b) with a >= b, LR-descending.
  // A self-conjugate (erasure-like) symbol is split into two halves.
  struct Pair {
    double a, b;
  };
  std::vector<Pair> pairs;
  const auto& tr = w.transitions();
  int n = static_cast<int>(tr.size());
  for (int i = 0; i < n / 2; ++i) pairs.push_back({tr[i].p0, tr[i].p1});
  if (n % 2 == 1) {
    double e = tr[n / 2].p0;
    pairs.push_back({e / 2.0, e / 2.0});
  }

  int target_pairs = mu / 2;
  int alive_count = static_cast<int>(pairs.size());
  std::vector<int> prev(alive_count), next(alive_count);
  std::vector<int> version(alive_count, 0);
  std::vector<bool> alive(alive_count, true);
  for (int i = 0; i < alive_count; ++i) {
    prev[i] = i - 1;
    next[i] = (i + 1 < alive_count) ? i + 1 : -1;
  }

  auto pair_cap = [](const Pair& p) {
    return 2.0 * detail::sym_capacity_term(p.a, p.b);
  };
  auto merge_loss = [&](int i, int j) {
    Pair m{pairs[i].a + pairs[j].a, pairs[i].b + pairs[j].b};
    return pair_cap(pairs[i]) + pair_cap(pairs[j]) - pair_cap(m);
  };

  struct HeapEntry {
    double loss;
    int left;
    int vl, vr;
    bool operator>(const HeapEntry& o) const { return loss > o.loss; }
  };
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  auto push_candidate = [&](int i) {
    int j = next[i];
    if (i < 0 || j < 0) return;
    heap.push({merge_loss(i, j), i, version[i], version[j]});
  };
  for (int i = 0; i + 1 < alive_count; ++i) push_candidate(i);

  int remaining = alive_count;
  while (remaining > target_pairs) {
    HeapEntry e = heap.top();
    heap.pop();
    int i = e.left, j = next[i];
    if (!alive[i] || j < 0 || e.vl != version[i] || e.vr != version[j])
      continue;
    pairs[i].a += pairs[j].a;
    pairs[i].b += pairs[j].b;
    alive[j] = false;
    next[i] = next[j];
    if (next[j] >= 0) prev[next[j]] = i;
    ++version[i];
    --remaining;
    push_candidate(i);
    if (prev[i] >= 0) push_candidate(prev[i]);
  }

  std::vector<Transition> out;
  out.reserve(2 * remaining);
  for (int i = 0; i < alive_count; ++i) {
    if (!alive[i]) continue;
    out.push_back({pairs[i].a, pairs[i].b});
    out.push_back({pairs[i].b, pairs[i].a});
  }
  return BmsChannel(std::move(out), w.label() + "|deg");
}

}  // namespace rcpolar
