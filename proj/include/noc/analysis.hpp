#ifndef NOC_ANALYSIS_HPP
#define NOC_ANALYSIS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noc/engine.hpp"
#include "noc/traffic.hpp"

namespace noc {

// Inputs of the closed-form latency expressions.
struct PathModel {
  unsigned hops = 1;          // routers traversed between origin and destination
  unsigned router_delay = 2;  // cycles per router
  double packet_flits = 0.0;  // packet length crossing the channel
  double bandwidth = 1.0;     // flits per cycle

  void validate() const;
};

// Inputs of the worst-case packet latency bound.
struct WclParams {
  std::vector<unsigned> competitors_per_hop;  // flows on each hop's output channel
  unsigned same_dest_packets = 0;  // packets from other nodes to the same destination
  unsigned packet_flits = 1;
  unsigned buffer_flits = 1;

  void validate() const;
};

// Request/reply transaction decomposition; all terms are opaque inputs.
struct TransactionModel {
  std::uint64_t wait_request = 0;
  std::uint64_t request = 0;
  std::uint64_t wait_reply = 0;
  std::uint64_t reply = 0;
  std::uint64_t core = 0;

  std::uint64_t network_part() const {
    return wait_request + request + wait_reply + reply;
  }
};

// Contention-free packet latency: hop traversal plus channel crossing time.
double latency_base(const PathModel& m);

// Best-effort wormhole estimate under offered load: the flow only sees the
// bandwidth other flows left over. Returns nullopt (saturated) once the
// occupied bandwidth reaches the channel bandwidth.
std::optional<double> latency_be(const PathModel& m, double bandwidth_occupied);

// Flit-interleaving estimate with N competing flows: the packet effectively
// crosses the channel N times, independent of offered load.
double latency_interleave(const PathModel& m, unsigned competing_flows);

struct CurvePoint {
  double offered_load = 0.0;
  std::optional<double> be_latency;  // nullopt = saturated
  double interleave_latency = 0.0;
};

std::vector<CurvePoint> sweep_offered_load(const PathModel& m, unsigned competing_flows,
                                           const std::vector<double>& loads);

// Worst-case header latency: each hop serves the header within one full
// arbitration round of its competitors, two cycles per grant.
std::uint64_t header_wcl(const std::vector<unsigned>& competitors_per_hop);

// Worst-case added latency of payload and tail once the header established
// the path, with k same-destination packets interleaving against ours.
std::uint64_t payload_wcl(unsigned same_dest_packets, unsigned packet_flits);

// Full packet bound: header term + payload term + both NI buffers.
std::uint64_t packet_wcl(const WclParams& w);

// Completion slots of each packet when one channel serves the given packets
// under wormhole switching (packets hold the channel until their tail) and
// under flit interleaving (one flit per live packet per round, in priority
// order). Slot numbering starts at 1.
struct ScheduleComparison {
  std::vector<std::uint64_t> wormhole;
  std::vector<std::uint64_t> interleave;
};

ScheduleComparison schedule_compare(const std::vector<unsigned>& packet_lengths);

std::uint64_t transaction_latency(const TransactionModel& t);

// Static per-flow bound inputs derived from a scenario: competitors per hop
// are the flows whose XY paths use the same output channel, and the
// same-destination count covers every other flow aimed at the same router
// node. Sound as long as each flow keeps one packet in flight.
std::map<std::uint32_t, WclParams> derive_wcl_params(const NetworkParams& params,
                                                     const std::vector<FlowSpec>& flows);

struct BoundCheck {
  std::uint64_t packet_id = 0;
  std::uint32_t flow_id = 0;
  std::uint64_t measured = 0;
  std::uint64_t bound = 0;
  std::int64_t slack = 0;
  bool violated = false;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  std::size_t violations = 0;
};

BoundReport validate_bound(const SimResult& result,
                           const std::map<std::uint32_t, WclParams>& per_flow);

// CSV renderings ("saturated" flag column for the curve; "violated" for the
// bound report).
std::string curve_csv(const std::vector<CurvePoint>& curve);
std::string bound_report_csv(const BoundReport& report);

}  // namespace noc

#endif  // NOC_ANALYSIS_HPP
