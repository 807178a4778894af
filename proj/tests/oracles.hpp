#pragma once

// Independent reference implementations used only by tests: brute-force
// Bhattacharyya parameters from the joint distribution, the exact BEC
// erasure recursion, and dense-matrix polar encoding.

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "rcpolar/channel.hpp"
#include "rcpolar/polar.hpp"

namespace oracles {

// Exact Z(U_i | U^{1:i-1}, Y^{1:m}) for every i by enumerating the joint
// distribution. leaves[j] is the channel observing coded bit x[j]
// (punctured positions = BEC(1)). Exponential in m; keep m <= 8 and
// alphabets tiny.
inline std::vector<double> brute_force_z(const std::vector<rcpolar::BmsChannel>& leaves) {
  int m = static_cast<int>(leaves.size());
  long long y_space = 1;
  std::vector<int> asz(m);
  for (int j = 0; j < m; ++j) {
    asz[j] = leaves[j].alphabet_size();
    y_space *= asz[j];
  }
  long long u_space = 1ll << m;
  // joint[u][y] = P(U = u, Y = y) = 2^-m * prod_j W_j(y_j | x_j)
  std::vector<std::vector<double>> joint(u_space, std::vector<double>(y_space));
  double prior = std::ldexp(1.0, -m);
  for (long long uv = 0; uv < u_space; ++uv) {
    std::vector<uint8_t> u(m);
    for (int i = 0; i < m; ++i) u[i] = (uv >> i) & 1;
    auto x = rcpolar::polar_encode(u);
    for (long long yv = 0; yv < y_space; ++yv) {
      long long rem = yv;
      double p = prior;
      for (int j = 0; j < m; ++j) {
        int y = static_cast<int>(rem % asz[j]);
        rem /= asz[j];
        const auto& t = leaves[j].transitions()[y];
        p *= x[j] ? t.p1 : t.p0;
      }
      joint[uv][yv] = p;
    }
  }
  std::vector<double> z(m, 0.0);
  for (int i = 0; i < m; ++i) {
    long long suffixes = 1ll << (m - 1 - i);
    for (long long pre = 0; pre < (1ll << i); ++pre) {
      for (long long yv = 0; yv < y_space; ++yv) {
        double s0 = 0.0, s1 = 0.0;
        for (long long suf = 0; suf < suffixes; ++suf) {
          long long u0 = pre | (suf << (i + 1));
          s0 += joint[u0][yv];
          s1 += joint[u0 | (1ll << i)][yv];
        }
        z[i] += 2.0 * std::sqrt(s0 * s1);
      }
    }
  }
  return z;
}

// Leaf channels in coded-bit order for a (W, puncture) construction.
inline std::vector<rcpolar::BmsChannel> make_leaves(const rcpolar::BmsChannel& w,
                                                    int m,
                                                    const std::set<int>& punct) {
  std::vector<rcpolar::BmsChannel> leaves;
  for (int j = 0; j < m; ++j)
    leaves.push_back(punct.count(j) ? rcpolar::make_bec(1.0) : w);
  return leaves;
}

// Exact erasure-probability recursion over the same structure the library
// evolves: leaves in contiguous order, first combine pairs (i, i + len/2),
// minus half feeding the lower u-indices.
inline std::vector<double> bec_recursion(const std::vector<double>& eps_contig) {
  int len = static_cast<int>(eps_contig.size());
  if (len == 1) return eps_contig;
  int half = len / 2;
  std::vector<double> minus(half), plus(half);
  for (int i = 0; i < half; ++i) {
    double a = eps_contig[i], b = eps_contig[i + half];
    minus[i] = a + b - a * b;
    plus[i] = a * b;
  }
  auto lo = bec_recursion(minus);
  auto hi = bec_recursion(plus);
  lo.insert(lo.end(), hi.begin(), hi.end());
  return lo;
}

inline std::vector<double> bec_exact_z(double eps, int m, const std::set<int>& punct) {
  auto rev = rcpolar::bit_reversal_permutation(m);
  std::vector<double> leaves(m);
  for (int p = 0; p < m; ++p) leaves[p] = punct.count(rev[p]) ? 1.0 : eps;
  return bec_recursion(leaves);
}

// x = u * B * F^{ox log2 m} by dense GF(2) matrix multiplication.
inline std::vector<uint8_t> dense_encode(const std::vector<uint8_t>& u) {
  int m = static_cast<int>(u.size());
  // F^{ox}: kron power of [[1,0],[1,1]].
  std::vector<std::vector<uint8_t>> f{{1}};
  for (int sz = 1; sz < m; sz *= 2) {
    std::vector<std::vector<uint8_t>> next(2 * sz, std::vector<uint8_t>(2 * sz, 0));
    for (int r = 0; r < sz; ++r)
      for (int c = 0; c < sz; ++c) {
        next[r][c] = f[r][c];
        next[r + sz][c] = f[r][c];
        next[r + sz][c + sz] = f[r][c];
      }
    f = std::move(next);
  }
  auto rev = rcpolar::bit_reversal_permutation(m);
  std::vector<uint8_t> x(m, 0);
  for (int c = 0; c < m; ++c) {
    uint8_t acc = 0;
    for (int r = 0; r < m; ++r) acc ^= u[r] & f[rev[r]][c];  // row r of B*F is row rev(r) of F
    x[c] = acc;
  }
  return x;
}

}  // namespace oracles
