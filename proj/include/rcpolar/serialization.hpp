#pragma once

// JSON / CSV boundaries: channel descriptors, scheme files, reliability
// CSVs, and simulation results. Indices are 1-based in files, 0-based in
// memory. Output is byte-stable given identical inputs.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rcpolar/harq.hpp"

namespace rcpolar {

using nlohmann::json;

namespace detail {

// Fixed-format float rendering keeps files byte-stable and diffable.
inline std::string fmt_double(double v, int prec = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

template <typename Set>
inline json set_to_json_1based(const Set& s) {
  json arr = json::array();
  for (auto i : s) arr.push_back(static_cast<long long>(i) + 1);
  return arr;
}

}  // namespace detail

inline json channel_to_json(const BmsChannel& w) {
  json j;
  switch (w.kind()) {
    case ChannelKind::Bec:
      j["kind"] = "bec";
      j["eps"] = w.param();
      break;
    case ChannelKind::Bsc:
      j["kind"] = "bsc";
      j["p"] = w.param();
      break;
    case ChannelKind::Explicit: {
      j["kind"] = "explicit";
      json tr = json::array();
      for (const auto& t : w.transitions()) tr.push_back({t.p0, t.p1});
      j["transitions"] = tr;
      j["label"] = w.label();
      break;
    }
  }
  return j;
}

inline BmsChannel channel_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "bec") return make_bec(j.at("eps").get<double>());
  if (kind == "bsc") return make_bsc(j.at("p").get<double>());
  if (kind == "explicit") {
    std::vector<Transition> tr;
    for (const auto& row : j.at("transitions"))
      tr.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    BmsChannel w(std::move(tr), j.value("label", std::string("explicit")));
    w.validate();
    return w;
  }
  throw std::invalid_argument("unknown channel kind: " + kind);
}

inline json scheme_to_json(const ChainScheme& scheme) {
  json j;
  j["k"] = scheme.profile.k;
  j["k_eff"] = scheme.k_eff;
  j["rates"] = scheme.profile.rates;
  j["incremental_lengths"] = scheme.profile.incremental_lengths;
  j["expansion_exponent"] = scheme.expansion_exponent;
  j["delta"] = scheme.delta;
  j["mu"] = scheme.mu;
  j["t_max"] = scheme.t_max;
  j["puncture_trials"] = scheme.puncture_trials;
  j["seed"] = scheme.seed;
  j["union_bounds"] = scheme.union_bounds;
  json chans = json::array();
  for (const auto& w : scheme.channels) chans.push_back(channel_to_json(w));
  j["channels"] = chans;
  json stages = json::array();
  for (const auto& st : scheme.stages) {
    json s;
    s["m"] = st.m;
    s["n"] = st.n;
    s["punctured_set"] = detail::set_to_json_1based(st.punctured_set);
    json steps = json::array();
    for (const auto& step : st.schedule.steps) {
      json d = json::array(), dp = json::array();
      for (int i : step.d_set) d.push_back(i + 1);
      for (int i : step.d_prime_set) dp.push_back(i + 1);
      steps.push_back({{"n_in", step.n_in}, {"d", d}, {"d_prime", dp}});
    }
    s["alignment"] = steps;
    json asets = json::array();
    for (const auto& a : st.a_sets) asets.push_back(detail::set_to_json_1based(a));
    s["a_sets"] = asets;
    json rmap = json::array();
    for (const auto& [src, tgt] : st.repeat_map)
      rmap.push_back({{"stage", src.stage + 1},
                      {"u_index", src.u_idx + 1},
                      {"target", tgt + 1}});
    s["repeat_map"] = rmap;
    stages.push_back(std::move(s));
  }
  j["stages"] = stages;
  return j;
}

inline std::string profile_to_csv(const ReliabilityProfile& prof) {
  std::ostringstream out;
  out << "index,z_bound\n";
  for (int i = 0; i < prof.m; ++i)
    out << (i + 1) << "," << detail::fmt_double(prof.z_bounds[i]) << "\n";
  return out.str();
}

inline std::string stats_to_csv(const SimulationStats& stats) {
  std::ostringstream out;
  out << "stage,trials_reaching,failures,fer,ci_low,ci_high,union_bound\n";
  for (const auto& s : stats.per_stage)
    out << s.stage << "," << s.trials_reaching << "," << s.failures << ","
        << detail::fmt_double(s.fer) << "," << detail::fmt_double(s.ci_low)
        << "," << detail::fmt_double(s.ci_high) << ","
        << detail::fmt_double(s.union_bound) << "\n";
  return out.str();
}

inline json stats_to_json(const SimulationStats& stats) {
  json j;
  j["trials"] = stats.trials;
  j["successes"] = stats.successes;
  j["mean_bits_on_success"] = stats.mean_bits_on_success;
  j["throughput"] = stats.throughput;
  json per = json::array();
  for (const auto& s : stats.per_stage)
    per.push_back({{"stage", s.stage},
                   {"trials_reaching", s.trials_reaching},
                   {"failures", s.failures},
                   {"fer", s.fer},
                   {"ci_low", s.ci_low},
                   {"ci_high", s.ci_high},
                   {"union_bound", s.union_bound}});
  j["per_stage"] = per;
  return j;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

}  // namespace rcpolar
