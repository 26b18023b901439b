#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aquanet/aquanet.hpp"

namespace aquanet::testing {

inline std::filesystem::path scenario_dir() { return {AQUANET_SCENARIO_DIR}; }

inline Document fixture_document(const std::string& name) {
  std::ifstream in(scenario_dir() / name);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Document::parse(buf.str());
}

inline Scenario load_fixture(const std::string& name) {
  return load_scenario(scenario_dir() / name);
}

inline Scenario scenario_from(const Document& doc, const std::string& name = "inline") {
  return parse_scenario(doc.dump(), name);
}

// Smallest useful scenario skeleton for programmatic tests.
inline Document scenario_skeleton(std::uint64_t seed, Timestamp horizon) {
  return Document{{"seed", seed},
                  {"horizon_s", horizon},
                  {"consumption_period_s", 600},
                  {"lans", Document::array()}};
}

inline Document lan_with_hosts(const std::string& id, const std::string& region,
                               Document hosts) {
  return Document{{"id", id}, {"region", region}, {"hosts", std::move(hosts)}};
}

// Consumption accrued inside [from, to), in exact flow-seconds.
inline FlowSeconds window_flow_seconds(const ConsumptionSeries& series, Timestamp from,
                                       Timestamp to, Seconds period) {
  FlowSeconds sum = 0;
  for (const auto& p : series) {
    if (p.start >= from && p.start + period <= to) sum += p.flow_seconds;
  }
  return sum;
}

inline FlowSeconds total_flow_seconds(const ConsumptionSeries& series) {
  FlowSeconds sum = 0;
  for (const auto& p : series) sum += p.flow_seconds;
  return sum;
}

}  // namespace aquanet::testing
