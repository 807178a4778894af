#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rcpolar/polar.hpp"

using namespace rcpolar;

TEST_CASE("bit_reversal_permutation") {
  CHECK(bit_reversal_permutation(2) == std::vector<int>{0, 1});
  CHECK(bit_reversal_permutation(4) == std::vector<int>{0, 2, 1, 3});
  CHECK(bit_reversal_permutation(8) == std::vector<int>{0, 4, 2, 6, 1, 5, 3, 7});
  CHECK_THROWS_AS(bit_reversal_permutation(6), std::invalid_argument);
  CHECK_THROWS_AS(bit_reversal_permutation(0), std::invalid_argument);
}

TEST_CASE("polar_encode basics") {
  CHECK(polar_encode({0, 0, 0, 0}) == std::vector<uint8_t>{0, 0, 0, 0});
  CHECK(polar_encode({1, 0}) == std::vector<uint8_t>{1, 0});
  CHECK(polar_encode({0, 1}) == std::vector<uint8_t>{1, 1});
  CHECK(polar_encode({0, 0, 0, 1}) == std::vector<uint8_t>{1, 1, 1, 1});
  CHECK_THROWS_AS(polar_encode({0, 1, 0}), std::invalid_argument);
}

TEST_CASE("polar_encode matches the dense matrix") {
  for (int m : {2, 4, 8}) {
    for (long long uv = 0; uv < (1ll << m); ++uv) {
      std::vector<uint8_t> u(m);
      for (int i = 0; i < m; ++i) u[i] = (uv >> i) & 1;
      CHECK(polar_encode(u) == oracles::dense_encode(u));
    }
  }
  std::mt19937_64 rng(3);
  for (int it = 0; it < 50; ++it) {
    std::vector<uint8_t> u(16);
    for (auto& b : u) b = rng() & 1;
    CHECK(polar_encode(u) == oracles::dense_encode(u));
  }
}

TEST_CASE("polar_encode is an involution") {
  std::mt19937_64 rng(11);
  for (int m : {2, 8, 64, 256, 1024}) {
    std::vector<uint8_t> u(m);
    for (auto& b : u) b = rng() & 1;
    CHECK(polar_encode(polar_encode(u)) == u);
  }
}

TEST_CASE("llr_of_output") {
  auto bec = make_bec(0.4);
  CHECK(std::isinf(llr_of_output(bec, 0)));
  CHECK(llr_of_output(bec, 0) > 0);
  CHECK(llr_of_output(bec, 1) == 0.0);
  CHECK(llr_of_output(bec, 2) == -std::numeric_limits<double>::infinity());
  auto bsc = make_bsc(0.11);
  CHECK(llr_of_output(bsc, 0) == Catch::Approx(std::log(0.89 / 0.11)).margin(1e-12));
  CHECK(llr_of_output(bsc, 0) == Catch::Approx(2.090).margin(1e-3));
  CHECK_THROWS_AS(llr_of_output(bsc, 2), std::out_of_range);
}

TEST_CASE("llr node operations handle infinities") {
  double inf = std::numeric_limits<double>::infinity();
  CHECK(f_llr(inf, 3.0) == Catch::Approx(3.0));
  CHECK(f_llr(-inf, 3.0) == Catch::Approx(-3.0));
  CHECK(f_llr(inf, -inf) == -inf);
  CHECK(f_llr(inf, inf) == inf);
  CHECK(f_llr(2.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(f_llr(2.0, 3.0) ==
        Catch::Approx(2.0 * std::atanh(std::tanh(1.0) * std::tanh(1.5))));
  CHECK(std::isfinite(f_llr(100.0, 90.0)));
  CHECK(f_llr(100.0, 90.0) == Catch::Approx(90.0).margin(1e-9));
  CHECK(g_llr(2.0, 3.0, 0) == Catch::Approx(5.0));
  CHECK(g_llr(2.0, 3.0, 1) == Catch::Approx(1.0));
  CHECK(g_llr(inf, -inf, 0) == 0.0);
  CHECK(g_llr(inf, -inf, 1) == -inf);
}

TEST_CASE("sc_decode: two-bit hand trace") {
  // Index 0 frozen to 0, so x = (u2, u2); an erasure on the first output
  // and a clean 0 on the second resolve u2 = 0.
  PolarBlockSpec spec;
  spec.m = 2;
  spec.info_set = {1};
  double inf = std::numeric_limits<double>::infinity();
  auto u = sc_decode({0.0, inf}, spec, {{0, 0}});
  CHECK(u == std::vector<uint8_t>{0, 0});
  // And a clean 1 on the second output gives u2 = 1.
  u = sc_decode({0.0, -inf}, spec, {{0, 0}});
  CHECK(u == std::vector<uint8_t>{0, 1});
}

TEST_CASE("sc_decode: all indices frozen returns known values") {
  PolarBlockSpec spec;
  spec.m = 4;
  std::map<int, uint8_t> known{{0, 1}, {1, 0}, {2, 1}, {3, 1}};
  auto u = sc_decode({-3.0, 2.0, 0.5, -1.0}, spec, known);
  CHECK(u == std::vector<uint8_t>{1, 0, 1, 1});
}

TEST_CASE("sc_decode: noiseless round trip") {
  std::mt19937_64 rng(17);
  for (int m : {2, 4, 16, 64, 256}) {
    PolarBlockSpec spec;
    spec.m = m;
    std::vector<uint8_t> u(m, 0);
    std::map<int, uint8_t> known;
    for (int i = 0; i < m; ++i) {
      if (rng() % 2) {
        spec.info_set.insert(i);
        u[i] = rng() & 1;
      } else {
        known[i] = rng() & 1;
        u[i] = known[i];
      }
    }
    auto x = polar_encode(u);
    std::vector<double> llrs(m);
    for (int j = 0; j < m; ++j) llrs[j] = x[j] ? -40.0 : 40.0;
    CHECK(sc_decode(llrs, spec, known) == u);
  }
}

TEST_CASE("sc_decode: missing frozen value is rejected") {
  PolarBlockSpec spec;
  spec.m = 2;
  spec.info_set = {1};
  CHECK_THROWS_AS(sc_decode({1.0, 1.0}, spec, {}), std::invalid_argument);
}

TEST_CASE("sc_decode is deterministic") {
  PolarBlockSpec spec;
  spec.m = 8;
  spec.info_set = {3, 5, 6, 7};
  std::map<int, uint8_t> known{{0, 0}, {1, 0}, {2, 0}, {4, 0}};
  std::vector<double> llrs{0.3, -0.2, 0.0, 1.5, -0.7, 0.1, 0.0, -2.0};
  auto a = sc_decode(llrs, spec, known);
  auto b = sc_decode(llrs, spec, known);
  CHECK(a == b);
}
