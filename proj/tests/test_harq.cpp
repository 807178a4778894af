#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rcpolar/harq.hpp"
#include "rcpolar/serialization.hpp"

using namespace rcpolar;

namespace {

ChainScheme two_stage_bec() {
  auto profile = rate_profile(24, {0.6, 0.4});
  return build_scheme({make_bec(0.3), make_bec(0.5)}, profile, 1e-2, 8, 8, 2,
                      99);
}

}  // namespace

TEST_CASE("run_session on a near-noiseless link") {
  auto profile = rate_profile(16, {0.5, 0.25});
  auto scheme = build_scheme({make_bec(0.02), make_bec(0.5)}, profile, 1e-2, 8,
                             8, 1, 3);
  std::mt19937_64 rng(1);
  std::vector<uint8_t> info(scheme.k_eff);
  for (auto& b : info) b = rng() & 1;
  auto tr = run_session(scheme, 1, info, rng);
  CHECK(tr.success_stage == 1);
  CHECK(tr.stages_attempted == 1);
  CHECK(tr.bits_transmitted ==
        std::vector<long long>{scheme.stages[0].effective_n});
  CHECK(tr.info_correct);
}

TEST_CASE("run_session replay determinism") {
  auto scheme = two_stage_bec();
  std::vector<uint8_t> info(scheme.k_eff);
  std::mt19937_64 seeder(9);
  for (auto& b : info) b = seeder() & 1;
  std::mt19937_64 r1(42), r2(42);
  auto a = run_session(scheme, 2, info, r1);
  auto b = run_session(scheme, 2, info, r2);
  CHECK(a.success_stage == b.success_stage);
  CHECK(a.stages_attempted == b.stages_attempted);
  CHECK(a.bits_transmitted == b.bits_transmitted);
  CHECK(a.decode_success == b.decode_success);
}

TEST_CASE("session accounting matches the profile") {
  auto scheme = two_stage_bec();
  std::mt19937_64 rng(4);
  std::vector<uint8_t> info(scheme.k_eff);
  for (auto& b : info) b = rng() & 1;
  auto tr = run_session(scheme, 2, info, rng);
  long long cum = 0;
  for (int l = 0; l < tr.stages_attempted; ++l) {
    CHECK(tr.bits_transmitted[l] == scheme.stages[l].effective_n);
    cum += tr.bits_transmitted[l];
  }
  long long expect = scheme.profile.cumulative_lengths[tr.stages_attempted - 1]
                     << scheme.expansion_exponent;
  CHECK(cum == expect);
}

TEST_CASE("monte_carlo: trials=1 equals the single transcript") {
  auto scheme = two_stage_bec();
  SimulationConfig cfg;
  cfg.scheme = &scheme;
  cfg.true_channel_index = 2;
  cfg.trials = 1;
  cfg.seed = 7;
  auto stats = monte_carlo(cfg);
  long long reached = stats.per_stage[0].trials_reaching;
  CHECK(reached == 1);
  CHECK(stats.successes + stats.per_stage.back().failures >= 1);
}

TEST_CASE("monte_carlo determinism and worker independence") {
  auto scheme = two_stage_bec();
  SimulationConfig cfg;
  cfg.scheme = &scheme;
  cfg.true_channel_index = 2;
  cfg.trials = 60;
  cfg.seed = 11;
  cfg.workers = 1;
  auto a = monte_carlo(cfg);
  auto b = monte_carlo(cfg);
  cfg.workers = 4;
  auto c = monte_carlo(cfg);
  CHECK(stats_to_csv(a) == stats_to_csv(b));
  CHECK(stats_to_csv(a) == stats_to_csv(c));
  CHECK(stats_to_json(a).dump() == stats_to_json(c).dump());
}

TEST_CASE("Wilson interval sanity") {
  double lo, hi;
  detail::wilson_interval(0, 100, lo, hi);
  CHECK(lo <= 1e-12);
  CHECK(hi > 0.0);
  CHECK(hi < 0.05);
  detail::wilson_interval(50, 100, lo, hi);
  CHECK(lo < 0.5);
  CHECK(hi > 0.5);
  CHECK(hi - lo < 0.25);
  detail::wilson_interval(100, 100, lo, hi);
  CHECK(hi == 1.0);
  CHECK(lo > 0.95);
}

TEST_CASE("FER improves on a better channel") {
  // Single-stage rate-0.25 code; compare BEC(0.5) link vs BEC(0.35) link by
  // overriding the sampling channel.
  auto profile = rate_profile(32, {0.25});
  auto scheme = build_scheme({make_bec(0.5)}, profile, 1e-2, 8, 8, 1, 13);
  auto fer_at = [&](double eps) {
    auto w = make_bec(eps);
    int fails = 0;
    for (int t = 0; t < 200; ++t) {
      std::mt19937_64 rng(detail::splitmix64(1000 + t));
      std::vector<uint8_t> info(scheme.k_eff);
      for (auto& b : info) b = rng() & 1;
      auto tr = run_session(scheme, 1, info, rng, &w);
      if (!tr.info_correct) ++fails;
    }
    return fails / 200.0;
  };
  CHECK(fer_at(0.35) <= fer_at(0.5) + 0.05);
}

TEST_CASE("hopeless link fails after all stages") {
  auto scheme = two_stage_bec();
  auto dead = make_bec(1.0);
  std::mt19937_64 rng(3);
  std::vector<uint8_t> info(scheme.k_eff, 0);
  info[0] = 1;  // any nonzero word defeats the all-zero SC output
  auto tr = run_session(scheme, 2, info, rng, &dead);
  CHECK(tr.success_stage == 0);
  CHECK(tr.stages_attempted == 2);
  CHECK_FALSE(tr.info_correct);
}

TEST_CASE("channel round trip through JSON") {
  for (const auto& w : {make_bec(0.37), make_bsc(0.11)}) {
    auto j = channel_to_json(w);
    auto back = channel_from_json(j);
    CHECK(approx_equal(w, back, 1e-12));
    CHECK(back.kind() == w.kind());
  }
  BmsChannel ex({{0.5, 0.1}, {0.3, 0.1}, {0.1, 0.3}, {0.1, 0.5}}, "quad");
  auto back = channel_from_json(channel_to_json(ex));
  CHECK(approx_equal(ex, back, 1e-12));
}
