#ifndef NOC_SCENARIO_HPP
#define NOC_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "noc/engine.hpp"
#include "noc/traffic.hpp"

namespace noc {

struct RunConfig {
  std::optional<std::uint64_t> max_cycles;
  bool until_delivered = true;
  std::uint64_t seed = 1;
  std::string output_prefix;
  std::optional<std::uint64_t> deadlock_window;

  bool operator==(const RunConfig&) const = default;
};

// A whole batch run described by one plain-text file: network parameters,
// topology, workload and run control. See README for the format.
struct Scenario {
  NetworkParams params;
  TopologySpec topo;
  std::vector<FlowSpec> flows;
  RunConfig run;

  bool operator==(const Scenario&) const = default;
};

// Parses the sectioned key = value format. Throws ParseError when the text
// cannot be read at all, ValidationError when values are out of range or
// references dangle; both carry every issue found with its line number.
Scenario parse_scenario(const std::string& text);

// Canonical rendering; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

// Builds the network for a scenario, applying seed / deadlock window / echo.
Network instantiate(const Scenario& s);

}  // namespace noc

#endif  // NOC_SCENARIO_HPP
