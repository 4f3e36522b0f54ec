#ifndef NOC_TRAFFIC_HPP
#define NOC_TRAFFIC_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "noc/flit.hpp"

namespace noc {

// Injection schedules. Periodic flows model constant-bit-rate traffic;
// bernoulli and on/off cover the variable-bit-rate side. A bernoulli draw is
// only taken on cycles where the source is free to start a packet, so traces
// stay reproducible for a given seed.
struct PeriodicSchedule {
  std::uint64_t period = 1;
  std::uint64_t offset = 0;
  bool operator==(const PeriodicSchedule&) const = default;
};

struct BernoulliSchedule {
  double probability = 0.0;  // packet-start probability per eligible cycle
  bool operator==(const BernoulliSchedule&) const = default;
};

struct OnOffSchedule {
  std::uint64_t burst_cycles = 1;  // saturating injection while on
  std::uint64_t gap_cycles = 0;
  bool operator==(const OnOffSchedule&) const = default;
};

using Schedule = std::variant<PeriodicSchedule, BernoulliSchedule, OnOffSchedule>;

enum class TrafficClass { Realtime, Multimedia };

struct FlowSpec {
  std::uint32_t flow_id = 0;
  std::string name;
  Address origin;
  Address dest;
  unsigned packet_flits = 2;  // header + payload + tail
  Schedule schedule = PeriodicSchedule{};
  std::optional<std::uint64_t> packet_count;  // nullopt = unbounded
  TrafficClass traffic_class = TrafficClass::Multimedia;

  bool operator==(const FlowSpec&) const = default;
};

void validate_flow(const FlowSpec& flow, const NetworkParams& params);

// Does this flow start a packet at `cycle`, assuming the source is idle?
// Periodic flows fire at offset + n*period; bernoulli flows consume one draw
// from the generator; on/off flows saturate during the on window.
bool next_injection(const FlowSpec& flow, std::uint64_t cycle, std::mt19937_64& rng);

// Demanded flit rate of one flow, in flits per cycle.
double flow_rate(const FlowSpec& flow);

// Offered load: each flow charges its rate to every channel on its XY path;
// the result is the load on the most loaded channel, as a fraction of the
// channel bandwidth b. Values above 1 mean the scenario is oversubscribed.
double offered_load(const std::vector<FlowSpec>& flows, double bandwidth);

}  // namespace noc

#endif  // NOC_TRAFFIC_HPP
