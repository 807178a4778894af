// Command-line front end: reliability construction, scheme building, HARQ
// simulation, and alignment reports, all driven by one JSON config file.
// Exit codes: 0 success, 2 validation error, 3 alignment failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "rcpolar/rcpolar.hpp"

using rcpolar::json;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
};

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
    throw std::invalid_argument("TOML configs are not supported; use JSON");
  json j;
  f >> j;
  return j;
}

std::vector<rcpolar::BmsChannel> parse_channels(const json& cfg) {
  std::vector<rcpolar::BmsChannel> out;
  for (const auto& c : cfg.at("channels")) out.push_back(rcpolar::channel_from_json(c));
  if (out.empty()) throw std::invalid_argument("config lists no channels");
  return out;
}

uint64_t effective_seed(const json& cfg, const CliOptions& opt) {
  if (opt.seed) return *opt.seed;
  return cfg.value("seed", uint64_t{0});
}

rcpolar::ChainScheme build_from_config(const json& cfg, const CliOptions& opt) {
  auto channels = parse_channels(cfg);
  auto profile = rcpolar::rate_profile(cfg.at("k").get<long long>(),
                                       cfg.at("rates").get<std::vector<double>>());
  return rcpolar::build_scheme(channels, profile, cfg.value("delta", 1e-6),
                               cfg.value("mu", 64), cfg.value("t_max", 8),
                               cfg.value("puncture_trials", 1),
                               effective_seed(cfg, opt));
}

std::string config_echo(const json& cfg, uint64_t seed) {
  json echo = cfg;
  echo["seed"] = seed;
  return "# config: " + echo.dump() + "\n";
}

int cmd_construct(const json& cfg, const CliOptions& opt) {
  auto channels = parse_channels(cfg);
  int m = cfg.at("m").get<int>();
  std::set<int> punct;
  for (const auto& i : cfg.value("punctured_set", std::vector<int>{}))
    punct.insert(i - 1);  // file indices are 1-based
  if (!rcpolar::is_pow2(m))
    throw std::invalid_argument("m must be a power of two (puncture down from the next power instead)");
  std::string out = config_echo(cfg, effective_seed(cfg, opt));
  for (size_t c = 0; c < channels.size(); ++c) {
    auto prof = rcpolar::evolve_reliability(channels[c], m, punct,
                                            cfg.value("mu", 64),
                                            cfg.value("delta", 1e-6));
    if (channels.size() > 1) out += "# channel: " + channels[c].label() + "\n";
    out += rcpolar::profile_to_csv(prof);
  }
  if (opt.out_path.empty())
    std::cout << out;
  else
    rcpolar::write_file(opt.out_path, out);
  return 0;
}

int cmd_build_scheme(const json& cfg, const CliOptions& opt) {
  auto scheme = build_from_config(cfg, opt);
  json j = scheme_to_json(scheme);
  j["config"] = cfg;
  std::string text = j.dump(2) + "\n";
  if (opt.out_path.empty())
    std::cout << text;
  else
    rcpolar::write_file(opt.out_path, text);
  std::cout << "expansion_exponent T = " << scheme.expansion_exponent << "\n";
  for (size_t l = 0; l < scheme.stages.size(); ++l) {
    double loss = 0.0;
    for (const auto& pr : scheme.stages[l].pair_reports)
      if (pr.steps_used > 0) loss += std::ldexp(1.0, -pr.steps_used);
    std::cout << "stage " << (l + 1) << ": alignment rate loss <= " << loss
              << ", error bound " << scheme.union_bounds[l] << "\n";
  }
  return 0;
}

int cmd_simulate(const json& cfg, const CliOptions& opt) {
  auto scheme = build_from_config(cfg, opt);
  rcpolar::SimulationConfig sim;
  sim.scheme = &scheme;
  sim.true_channel_index = cfg.value("true_channel_index", 1);
  sim.trials = cfg.value("trials", 1ll);
  sim.seed = effective_seed(cfg, opt);
  sim.workers = opt.workers ? *opt.workers
                            : cfg.value("workers",
                                        static_cast<int>(std::max(
                                            1u, std::thread::hardware_concurrency())));
  auto stats = rcpolar::monte_carlo(sim);
  std::string csv = config_echo(cfg, sim.seed) + rcpolar::stats_to_csv(stats);
  json summary = rcpolar::stats_to_json(stats);
  summary["config"] = cfg;
  summary["seed"] = sim.seed;
  if (opt.out_path.empty()) {
    std::cout << csv;
  } else {
    rcpolar::write_file(opt.out_path, csv);
    rcpolar::write_file(opt.out_path + ".json", summary.dump(2) + "\n");
  }
  return 0;
}

int cmd_align_report(const json& cfg, const CliOptions& opt) {
  auto scheme = build_from_config(cfg, opt);
  std::cout << "expansion_exponent T = " << scheme.expansion_exponent << "\n";
  for (size_t l = 0; l < scheme.stages.size(); ++l) {
    const auto& st = scheme.stages[l];
    std::cout << "stage " << (l + 1) << ": t = " << st.schedule.t() << "\n";
    for (size_t p = 0; p < st.pair_reports.size(); ++p) {
      const auto& pr = st.pair_reports[p];
      std::cout << "  pair (" << (l + 1 + p) << "," << (l + 2 + p)
                << "): steps " << pr.steps_used << ", initial mismatch "
                << pr.initial_mismatch << ", final mismatch "
                << pr.final_mismatch << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-compatible polar coding toolbox"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name
  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON experiment config")->required();
  app.add_option("--out", opt.out_path, "output file path");
  uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "override config seed");
  int workers_flag = 0;
  auto* workers_opt = app.add_option("--workers", workers_flag, "worker thread count");
  auto* c_construct = app.add_subcommand("construct", "reliability profile CSV");
  auto* c_build = app.add_subcommand("build-scheme", "build and save a scheme");
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo HARQ simulation");
  auto* c_align = app.add_subcommand("align-report", "per-pair alignment report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*seed_opt) opt.seed = seed_flag;
  if (*workers_opt) opt.workers = workers_flag;

  try {
    json cfg = load_config(opt.config_path);
    if (c_construct->parsed()) return cmd_construct(cfg, opt);
    if (c_build->parsed()) return cmd_build_scheme(cfg, opt);
    if (c_sim->parsed()) return cmd_simulate(cfg, opt);
    if (c_align->parsed()) return cmd_align_report(cfg, opt);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const rcpolar::AlignmentError& e) {
    std::cerr << "alignment failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
