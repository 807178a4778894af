#pragma once

// Arikan transform (G = B F^{ox log2 m}) and successive cancellation
// decoding for one polar block. Internally we work in the "contiguous"
// domain c = u F^{ox log2 m}; the transmitted word is x[j] = c[rev(j)],
// which equals u B F^{ox} since B commutes with F^{ox}.

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "rcpolar/channel.hpp"

namespace rcpolar {

inline bool is_pow2(int m) { return m > 0 && (m & (m - 1)) == 0; }

inline std::vector<int> bit_reversal_permutation(int m) {
  if (!is_pow2(m)) throw std::invalid_argument("length must be a power of two");
  int levels = std::countr_zero(static_cast<unsigned>(m));
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) {
    int r = 0;
    for (int b = 0; b < levels; ++b) r |= ((i >> b) & 1) << (levels - 1 - b);
    perm[i] = r;
  }
  return perm;
}

// x = u * G over GF(2), Theta(m log m); the transform is an involution.
inline std::vector<uint8_t> polar_encode(const std::vector<uint8_t>& u) {
  int m = static_cast<int>(u.size());
  if (!is_pow2(m)) throw std::invalid_argument("length must be a power of two");
  std::vector<uint8_t> c = u;
  for (int len = m; len >= 2; len /= 2) {
    int half = len / 2;
    for (int blk = 0; blk < m; blk += len)
      for (int i = 0; i < half; ++i) c[blk + i] ^= c[blk + i + half];
  }
  auto rev = bit_reversal_permutation(m);
  std::vector<uint8_t> x(m);
  for (int j = 0; j < m; ++j) x[j] = c[rev[j]];
  return x;
}

struct PolarBlockSpec {
  int m = 0;                    // block length, power of two
  std::set<int> punctured_set;  // channel positions never transmitted
  std::set<int> info_set;       // u-domain data positions

  void validate() const {
    if (!is_pow2(m)) throw std::invalid_argument("m must be a power of two");
    for (int i : punctured_set)
      if (i < 0 || i >= m) throw std::invalid_argument("punctured index out of range");
    for (int i : info_set)
      if (i < 0 || i >= m) throw std::invalid_argument("info index out of range");
  }
};

// Exact LLR-domain node operations: f is the check-node combine, g the
// variable-node combine given the partial-sum bit.
inline double f_llr(double a, double b) {
  double sign = ((a < 0) != (b < 0)) ? -1.0 : 1.0;
  if (std::isinf(a)) return sign * std::min(std::abs(a), std::abs(b));
  if (std::isinf(b)) return sign * std::abs(a);
  double mn = std::min(std::abs(a), std::abs(b));
  if (mn > 40.0) return sign * mn;  // tanh saturates; avoids atanh(1)
  return 2.0 * std::atanh(std::tanh(a / 2.0) * std::tanh(b / 2.0));
}

inline double g_llr(double a, double b, int bit) {
  double s = bit ? -a : a;
  if (std::isinf(s) && std::isinf(b) && ((s > 0) != (b > 0))) return 0.0;
  return b + s;
}

// Iterative SC decoder over the contiguous structure. Per decision phase it
// refreshes only the LLR levels invalidated by the last partial-sum update
// (determined by the trailing zeros of the phase index). The caller drives
// it one u-bit at a time via peek_llr / push_bit, so composite decoders can
// interleave their own layers.
class StepwiseSc {
 public:
  // llrs_contig: channel LLRs already permuted into the contiguous domain
  // (position p holds the LLR of coded bit c[p]).
  explicit StepwiseSc(std::vector<double> llrs_contig)
      : m_(static_cast<int>(llrs_contig.size())) {
    if (!is_pow2(m_)) throw std::invalid_argument("length must be a power of two");
    levels_ = std::countr_zero(static_cast<unsigned>(m_));
    L_.resize(levels_ + 1);
    C_.resize(levels_ + 1);
    for (int lam = 0; lam <= levels_; ++lam) {
      L_[lam].assign(m_ >> lam, 0.0);
      C_[lam][0].assign(m_ >> lam, 0);
      C_[lam][1].assign(m_ >> lam, 0);
    }
    L_[0] = std::move(llrs_contig);
  }

  int length() const { return m_; }
  int phase() const { return phase_; }

  double peek_llr() {
    if (phase_ >= m_) throw std::logic_error("decoder exhausted");
    if (!computed_) {
      compute();
      computed_ = true;
    }
    return L_[levels_][0];
  }

  void push_bit(int bit) {
    peek_llr();  // keep the LLR arrays consistent with this phase
    C_[levels_][phase_ & 1][0] = static_cast<uint8_t>(bit & 1);
    if (phase_ & 1) propagate();
    ++phase_;
    computed_ = false;
  }

  // Codeword in the contiguous domain; valid once all m_ bits are pushed.
  const std::vector<uint8_t>& codeword_contig() const {
    if (phase_ != m_) throw std::logic_error("decoder not finished");
    return C_[0][0];
  }

 private:
  void compute() {
    if (phase_ == 0) {
      for (int lam = 1; lam <= levels_; ++lam) f_level(lam);
      return;
    }
    int t = std::countr_zero(static_cast<unsigned>(phase_));
    int lam_g = levels_ - t;
    g_level(lam_g);
    for (int lam = lam_g + 1; lam <= levels_; ++lam) f_level(lam);
  }

  void f_level(int lam) {
    int n = m_ >> lam;
    for (int i = 0; i < n; ++i)
      L_[lam][i] = f_llr(L_[lam - 1][i], L_[lam - 1][i + n]);
  }

  void g_level(int lam) {
    int n = m_ >> lam;
    for (int i = 0; i < n; ++i)
      L_[lam][i] = g_llr(L_[lam - 1][i], L_[lam - 1][i + n], C_[lam][0][i]);
  }

  void propagate() {
    // Fold partial sums upward while the local phase at the level is odd.
    int lam = levels_;
    uint64_t psi = static_cast<uint64_t>(phase_);
    while (lam >= 1 && (psi & 1)) {
      int n = m_ >> lam;
      int lane = static_cast<int>((psi >> 1) & 1);
      for (int i = 0; i < n; ++i) {
        C_[lam - 1][lane][i] = C_[lam][0][i] ^ C_[lam][1][i];
        C_[lam - 1][lane][i + n] = C_[lam][1][i];
      }
      psi >>= 1;
      --lam;
    }
  }

  int m_;
  int levels_;
  int phase_ = 0;
  bool computed_ = false;
  std::vector<std::vector<double>> L_;
  std::vector<std::array<std::vector<uint8_t>, 2>> C_;
};

inline double llr_of_output(const BmsChannel& w, int y) {
  if (y < 0 || y >= w.alphabet_size()) throw std::out_of_range("unknown output symbol");
  const auto& t = w.transitions()[y];
  if (t.p1 == 0.0 && t.p0 == 0.0) throw std::domain_error("impossible symbol");
  if (t.p1 == 0.0) return std::numeric_limits<double>::infinity();
  if (t.p0 == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(t.p0 / t.p1);
}

// Permute channel-domain LLRs (position j observes x[j]) into the
// contiguous domain used by StepwiseSc.
inline std::vector<double> llrs_to_contig(const std::vector<double>& llrs_x) {
  auto rev = bit_reversal_permutation(static_cast<int>(llrs_x.size()));
  std::vector<double> out(llrs_x.size());
  for (size_t p = 0; p < llrs_x.size(); ++p) out[p] = llrs_x[rev[p]];
  return out;
}

// Plain single-block SC decode. llrs are in channel (x) order; punctured
// positions carry llr 0. known_values must cover every frozen index.
inline std::vector<uint8_t> sc_decode(const std::vector<double>& llrs,
                                      const PolarBlockSpec& spec,
                                      const std::map<int, uint8_t>& known_values) {
  spec.validate();
  if (static_cast<int>(llrs.size()) != spec.m)
    throw std::invalid_argument("llr vector length mismatch");
  StepwiseSc dec(llrs_to_contig(llrs));
  std::vector<uint8_t> u(spec.m, 0);
  for (int i = 0; i < spec.m; ++i) {
    if (spec.info_set.count(i)) {
      u[i] = dec.peek_llr() < 0.0 ? 1 : 0;  // tie (llr == 0) resolves to 0
    } else {
      auto it = known_values.find(i);
      if (it == known_values.end())
        throw std::invalid_argument("missing known value for frozen index");
      u[i] = it->second & 1;
    }
    dec.push_bit(u[i]);
  }
  return u;
}

}  // namespace rcpolar
