#ifndef NOC_ENGINE_HPP
#define NOC_ENGINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "noc/network_interface.hpp"
#include "noc/router.hpp"
#include "noc/traffic.hpp"

namespace noc {

// A width x height mesh of routers. NN/SS/EE/WW carry the inter-router
// links dictated by grid adjacency; the remaining usable ports host network
// interfaces. By default every free port gets an NI; local_ports_per_router
// caps that to the first n free ports in index order, and per-router
// overrides pick explicit ports.
struct TopologySpec {
  unsigned width = 2;
  unsigned height = 2;
  std::optional<unsigned> local_ports_per_router;
  std::map<std::pair<unsigned, unsigned>, std::vector<PortId>> local_ports_override;

  bool operator==(const TopologySpec&) const = default;
};

// Mesh ports required by grid position.
std::vector<PortId> mesh_ports_at(const TopologySpec& topo, Coord at);
// NI addresses implied by the topology, in deterministic order.
std::vector<Address> nis_of(const TopologySpec& topo, const NetworkParams& params);

struct LatencyRecord {
  std::uint64_t packet_id = 0;
  std::uint32_t flow_id = 0;
  Address src;
  Address dst;
  unsigned hops = 0;
  std::uint64_t inject_cycle = 0;          // header entered the NI output FIFO
  std::uint64_t network_entry_cycle = 0;   // header latched by the first router
  std::uint64_t header_arrival_cycle = 0;  // header entered the destination input FIFO
  std::uint64_t tail_arrival_cycle = 0;    // tail read out by the destination core
  std::uint64_t latency_cycles = 0;        // tail_arrival - inject
};

struct ChannelStat {
  std::string name;
  std::uint64_t busy_cycles = 0;
};

struct SimResult {
  std::vector<LatencyRecord> records;
  std::vector<ChannelStat> channels;
  std::uint64_t total_cycles = 0;
  std::uint64_t seed = 0;
  std::string config_echo;
  std::vector<std::uint64_t> undelivered_packets;  // injected but not fully delivered
  std::uint64_t reorder_events = 0;  // out-of-sequence flits seen at any sink
};

std::string latency_csv(const SimResult& result);
std::string utilization_csv(const SimResult& result);

struct StopCondition {
  std::optional<std::uint64_t> max_cycles;
  bool until_delivered = true;
};

// The whole simulated system: routers, NIs, channels, traffic sources and
// sinks, advanced by a global two-phase clock. Each step's edge phase commits
// all moves decided in the previous settle phase against pre-cycle state, so
// evaluation order between routers is unobservable. One instance is
// single-threaded and fully deterministic for a given seed.
class Network {
 public:
  Network(NetworkParams params, TopologySpec topo, std::vector<FlowSpec> flows,
          std::uint64_t seed);

  void step();
  SimResult run(const StopCondition& stop);

  std::uint64_t cycle() const { return cycle_; }
  const Router& router_at(Coord c) const;
  const Nic& nic_at(const Address& a) const;
  std::uint64_t flits_injected() const { return injected_; }
  std::uint64_t flits_delivered() const { return delivered_; }
  std::uint64_t flits_in_flight() const;
  std::uint64_t core_deliveries_at(const Address& nic) const;

  void set_trace(TraceFn trace) { trace_ = std::move(trace); }
  // Optional occupancy time-series: one "cycle,nic,fifo,occupancy" row per
  // NI FIFO per cycle while attached.
  void set_occupancy_stream(std::ostream* out) { occupancy_out_ = out; }
  void set_check_invariants(bool on) { check_invariants_ = on; }
  void set_deadlock_window(std::uint64_t cycles) { deadlock_window_ = cycles; }
  std::uint64_t deadlock_window() const { return deadlock_window_; }
  void set_config_echo(std::string echo) { config_echo_ = std::move(echo); }

  const NetworkParams& params() const { return params_; }
  const TopologySpec& topology() const { return topo_; }
  const std::vector<FlowSpec>& flows() const { return flows_; }

 private:
  struct NicNode {
    Nic nic;
    std::size_t router = 0;
    PortId port = PortId::NN;
    // both core-side directions are paced by core_cycles_per_word
    std::uint64_t next_core_send = 0;
    std::uint64_t next_core_receive = 0;
    // source side
    std::vector<std::size_t> flow_ids;
    std::size_t next_flow = 0;  // round-robin start among local flows
    struct ActivePacket {
      std::size_t flow = 0;
      std::uint64_t packet_id = 0;
      std::uint32_t next_seq = 0;
      std::uint32_t total = 0;
    };
    std::optional<ActivePacket> active;
    // sink side: expected next sequence per origin stream
    struct RxStream {
      std::uint64_t packet_id = 0;
      std::uint32_t expect_seq = 0;
      bool open = false;
    };
    std::map<Address, RxStream> rx;
    std::uint64_t deliveries = 0;
    NicNode(Nic n) : nic(std::move(n)) {}
  };

  struct FlowRuntime {
    FlowSpec spec;
    std::uint64_t packets_started = 0;
    std::uint64_t pending_starts = 0;  // periodic starts waiting for a free source
    std::vector<std::pair<Coord, PortId>> path;
    bool exhausted() const {
      return spec.packet_count && packets_started >= *spec.packet_count &&
             pending_starts == 0;
    }
  };

  struct Link {  // directed router-to-router channel
    std::size_t from_router, to_router;
    PortId from_port, to_port;
    std::size_t channel;
    bool staged = false;
  };

  std::size_t router_index(Coord c) const;
  std::size_t nic_index(const Address& a) const;
  std::size_t add_channel(std::string name);
  void settle();
  void commit_edge();
  void poll_sources();
  void stream_active_packets();
  void record_from_router_commit(const SimFlit& flit);
  void record_core_receive(NicNode& node, const SimFlit& flit);
  void verify_invariants() const;

  NetworkParams params_;
  TopologySpec topo_;
  std::vector<FlowSpec> flows_;
  std::vector<Router> routers_;
  std::vector<NicNode> nics_;
  std::vector<Link> links_;
  std::map<Address, std::size_t> nic_by_addr_;
  std::vector<FlowRuntime> flow_rt_;

  std::vector<ChannelStat> channels_;
  std::vector<std::size_t> nic_in_channel_;   // router -> NI
  std::vector<std::size_t> nic_out_channel_;  // NI -> router

  std::map<std::uint64_t, LatencyRecord> open_records_;
  std::vector<LatencyRecord> closed_records_;

  std::uint64_t cycle_ = 0;
  std::uint64_t next_packet_id_ = 0;
  std::uint64_t injected_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t reorder_events_ = 0;
  std::uint64_t last_progress_ = 0;
  std::uint64_t deadlock_window_ = 0;
  std::uint64_t seed_ = 0;
  std::mt19937_64 rng_;
  TraceFn trace_;
  std::ostream* occupancy_out_ = nullptr;
  bool check_invariants_ = false;
  std::string config_echo_;
};

// Validates the topology and every flow endpoint, then builds the reset
// network. Throws TopologyError on an inconsistent layout or a flow that
// references a port hosting no NI.
Network build_network(const NetworkParams& params, const TopologySpec& topo,
                      const std::vector<FlowSpec>& flows, std::uint64_t seed = 1);

}  // namespace noc

#endif  // NOC_ENGINE_HPP
