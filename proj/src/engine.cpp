#include "noc/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace noc {

namespace {

std::string channel_name_router(Coord from, PortId out, Coord to) {
  std::ostringstream os;
  os << "R(" << to_string(from) << ")." << port_name(out) << "->R(" << to_string(to)
     << ")";
  return os.str();
}

}  // namespace

std::vector<PortId> mesh_ports_at(const TopologySpec& topo, Coord at) {
  std::vector<PortId> ports;
  if (at.y + 1 < topo.height) ports.push_back(PortId::NN);
  if (at.x + 1 < topo.width) ports.push_back(PortId::EE);
  if (at.y > 0) ports.push_back(PortId::SS);
  if (at.x > 0) ports.push_back(PortId::WW);
  return ports;
}

std::vector<Address> nis_of(const TopologySpec& topo, const NetworkParams& params) {
  for (const auto& [coord, ports] : topo.local_ports_override) {
    (void)ports;
    if (coord.first >= topo.width || coord.second >= topo.height) {
      throw TopologyError("local port override names router " +
                          std::to_string(coord.first) + "," +
                          std::to_string(coord.second) + " outside the " +
                          std::to_string(topo.width) + "x" +
                          std::to_string(topo.height) + " mesh");
    }
  }
  std::vector<Address> nis;
  for (unsigned y = 0; y < topo.height; ++y) {
    for (unsigned x = 0; x < topo.width; ++x) {
      Coord at{x, y};
      std::set<std::size_t> taken;
      for (PortId p : mesh_ports_at(topo, at)) {
        if (port_index(p) >= params.ports_per_router) {
          throw TopologyError("router " + to_string(at) + " needs mesh port " +
                              port_name(p) + " but only " +
                              std::to_string(params.ports_per_router) +
                              " ports are configured");
        }
        taken.insert(port_index(p));
      }

      auto it = topo.local_ports_override.find({x, y});
      if (it != topo.local_ports_override.end()) {
        std::set<std::size_t> used;
        for (PortId p : it->second) {
          std::size_t i = port_index(p);
          if (i >= params.ports_per_router) {
            throw TopologyError("router " + to_string(at) + ": local port " +
                                port_name(p) + " is beyond ports_per_router");
          }
          if (taken.count(i)) {
            throw TopologyError("router " + to_string(at) + ": port " + port_name(p) +
                                " already carries a mesh link");
          }
          if (!used.insert(i).second) {
            throw TopologyError("router " + to_string(at) + ": duplicate NI on port " +
                                port_name(p));
          }
          nis.push_back(Address{x, y, static_cast<unsigned>(i)});
        }
        continue;
      }

      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < params.ports_per_router; ++i) {
        if (!taken.count(i)) free.push_back(i);
      }
      std::size_t want = topo.local_ports_per_router
                             ? *topo.local_ports_per_router
                             : free.size();
      if (want > free.size()) {
        throw TopologyError("router " + to_string(at) + " has only " +
                            std::to_string(free.size()) + " free ports, " +
                            std::to_string(want) + " NIs requested");
      }
      for (std::size_t i = 0; i < want; ++i) {
        nis.push_back(Address{x, y, static_cast<unsigned>(free[i])});
      }
    }
  }
  return nis;
}

std::string latency_csv(const SimResult& result) {
  std::ostringstream os;
  os << "packet_id,flow_id,src,dst,hops,inject,net_entry,header_arr,tail_arr,latency\n";
  for (const LatencyRecord& r : result.records) {
    os << r.packet_id << "," << r.flow_id << "," << r.src.x << ":" << r.src.y << ":"
       << r.src.h << "," << r.dst.x << ":" << r.dst.y << ":" << r.dst.h << ","
       << r.hops << "," << r.inject_cycle << "," << r.network_entry_cycle << ","
       << r.header_arrival_cycle << "," << r.tail_arrival_cycle << ","
       << r.latency_cycles << "\n";
  }
  return os.str();
}

std::string utilization_csv(const SimResult& result) {
  std::ostringstream os;
  os << "channel,cycles_busy,total_cycles,utilization\n";
  char buf[32];
  for (const ChannelStat& c : result.channels) {
    double util = result.total_cycles
                      ? static_cast<double>(c.busy_cycles) /
                            static_cast<double>(result.total_cycles)
                      : 0.0;
    std::snprintf(buf, sizeof(buf), "%.6f", util);
    os << c.name << "," << c.busy_cycles << "," << result.total_cycles << "," << buf
       << "\n";
  }
  return os.str();
}

Network::Network(NetworkParams params, TopologySpec topo, std::vector<FlowSpec> flows,
                 std::uint64_t seed)
    : params_(std::move(params)), topo_(std::move(topo)), flows_(std::move(flows)),
      seed_(seed), rng_(seed) {
  params_.validate();
  if (topo_.width < 1 || topo_.height < 1) {
    throw TopologyError("mesh must have at least one router per axis");
  }
  if (topo_.width > params_.coord_limit() || topo_.height > params_.coord_limit()) {
    throw TopologyError("a " + std::to_string(topo_.width) + "x" +
                        std::to_string(topo_.height) + " mesh does not fit in " +
                        std::to_string(params_.coord_bits) + " coordinate bits");
  }

  for (unsigned y = 0; y < topo_.height; ++y) {
    for (unsigned x = 0; x < topo_.width; ++x) {
      routers_.emplace_back(Coord{x, y}, params_);
    }
  }

  // inter-router channels, both directions
  for (unsigned y = 0; y < topo_.height; ++y) {
    for (unsigned x = 0; x < topo_.width; ++x) {
      Coord at{x, y};
      for (PortId p : mesh_ports_at(topo_, at)) {
        PortDelta d = mesh_delta(p);
        Coord other{static_cast<unsigned>(static_cast<int>(x) + d.dx),
                    static_cast<unsigned>(static_cast<int>(y) + d.dy)};
        Link link;
        link.from_router = router_index(at);
        link.to_router = router_index(other);
        link.from_port = p;
        link.to_port = opposite(p);
        link.channel = add_channel(channel_name_router(at, p, other));
        links_.push_back(link);
      }
    }
  }

  for (const Address& addr : nis_of(topo_, params_)) {
    NicNode node{Nic(addr, params_)};
    node.router = router_index(Coord{addr.x, addr.y});
    node.port = port_from_index(addr.h);
    nic_by_addr_[addr] = nics_.size();
    nic_out_channel_.push_back(
        add_channel("NI(" + to_string(addr) + ")->R(" + std::to_string(addr.x) + "," +
                    std::to_string(addr.y) + ")"));
    nic_in_channel_.push_back(
        add_channel("R(" + std::to_string(addr.x) + "," + std::to_string(addr.y) +
                    ")." + port_name(node.port) + "->NI(" + to_string(addr) + ")"));
    nics_.push_back(std::move(node));
  }

  unsigned max_flits = 2;
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    FlowSpec& flow = flows_[i];
    validate_flow(flow, params_);
    auto src = nic_by_addr_.find(flow.origin);
    if (src == nic_by_addr_.end()) {
      throw TopologyError("flow " + flow.name + ": no NI at origin " +
                          to_string(flow.origin));
    }
    if (!nic_by_addr_.count(flow.dest)) {
      throw TopologyError("flow " + flow.name + ": no NI at destination " +
                          to_string(flow.dest));
    }
    FlowRuntime rt;
    rt.spec = flow;
    rt.path = xy_path(flow.origin, flow.dest, params_.ports_per_router);
    flow_rt_.push_back(std::move(rt));
    nics_[src->second].flow_ids.push_back(i);
    max_flits = std::max(max_flits, flow.packet_flits);
  }

  // Guard window for the stall detector: ten times a rough per-packet bound.
  std::uint64_t rough = 2ull * (topo_.width + topo_.height + 2) * flows_.size() +
                        2ull * flows_.size() * max_flits + 2ull * params_.buffer_flits;
  deadlock_window_ = std::max<std::uint64_t>(1000, 10 * rough);
}

std::size_t Network::router_index(Coord c) const {
  return static_cast<std::size_t>(c.y) * topo_.width + c.x;
}

std::size_t Network::nic_index(const Address& a) const {
  auto it = nic_by_addr_.find(a);
  if (it == nic_by_addr_.end()) {
    throw TopologyError("no NI at " + to_string(a));
  }
  return it->second;
}

std::size_t Network::add_channel(std::string name) {
  channels_.push_back(ChannelStat{std::move(name), 0});
  return channels_.size() - 1;
}

const Router& Network::router_at(Coord c) const { return routers_[router_index(c)]; }

const Nic& Network::nic_at(const Address& a) const { return nics_[nic_index(a)].nic; }

std::uint64_t Network::flits_in_flight() const {
  std::uint64_t n = 0;
  for (const Router& r : routers_) n += r.occupancy();
  for (const NicNode& node : nics_) n += node.nic.occupancy();
  return n;
}

std::uint64_t Network::core_deliveries_at(const Address& nic) const {
  return nics_[nic_index(nic)].deliveries;
}

void Network::poll_sources() {
  // periodic fires accrue even while the source is busy streaming
  for (FlowRuntime& rt : flow_rt_) {
    if (!std::holds_alternative<PeriodicSchedule>(rt.spec.schedule)) continue;
    if (rt.spec.packet_count &&
        rt.packets_started + rt.pending_starts >= *rt.spec.packet_count) {
      continue;
    }
    if (next_injection(rt.spec, cycle_, rng_)) ++rt.pending_starts;
  }

  for (NicNode& node : nics_) {
    if (node.active || node.flow_ids.empty()) continue;
    for (std::size_t i = 0; i < node.flow_ids.size(); ++i) {
      std::size_t idx = (node.next_flow + i) % node.flow_ids.size();
      FlowRuntime& rt = flow_rt_[node.flow_ids[idx]];
      if (rt.spec.packet_count && rt.packets_started >= *rt.spec.packet_count) continue;

      bool start = false;
      if (std::holds_alternative<PeriodicSchedule>(rt.spec.schedule)) {
        if (rt.pending_starts > 0) {
          --rt.pending_starts;
          start = true;
        }
      } else {
        start = next_injection(rt.spec, cycle_, rng_);
      }
      if (!start) continue;

      node.active = NicNode::ActivePacket{node.flow_ids[idx], next_packet_id_++, 0,
                                          rt.spec.packet_flits};
      ++rt.packets_started;
      node.next_flow = (idx + 1) % node.flow_ids.size();
      break;
    }
  }
}

void Network::stream_active_packets() {
  for (NicNode& node : nics_) {
    if (!node.active) continue;
    if (cycle_ < node.next_core_send) continue;
    if (!node.nic.can_stage_core_send()) continue;

    NicNode::ActivePacket& pkt = *node.active;
    const FlowSpec& spec = flow_rt_[pkt.flow].spec;
    SimFlit sf;
    sf.flit.ctrl = pkt.next_seq == 0 || pkt.next_seq + 1 == pkt.total;
    sf.flit.origin = node.nic.address();
    sf.flit.dest = spec.dest;
    sf.flit.data = make_data(params_, sf.flit.ctrl ? pkt.packet_id : pkt.next_seq);
    sf.packet = pkt.packet_id;
    sf.flow = static_cast<std::uint32_t>(pkt.flow);  // runtime index, not flow_id
    sf.seq = pkt.next_seq;
    node.nic.stage_core_send(sf);
    node.next_core_send = cycle_ + params_.core_cycles_per_word;

    if (++pkt.next_seq == pkt.total) node.active.reset();
  }
}

void Network::settle() {
  poll_sources();
  stream_active_packets();
  for (NicNode& node : nics_) {
    if (cycle_ >= node.next_core_receive && node.nic.can_stage_core_receive()) {
      node.nic.stage_core_receive();
      node.next_core_receive = cycle_ + params_.core_cycles_per_word;
    }
  }

  // Network moves ripple backwards along paths within one settle phase: a
  // read frees an output, which lets its arbiter grant, which frees an input,
  // which lets the upstream write. Decisions only switch on, so this loop
  // reaches a unique fixed point.
  bool changed = true;
  while (changed) {
    changed = false;

    for (std::size_t n = 0; n < nics_.size(); ++n) {
      NicNode& node = nics_[n];
      Router& router = routers_[node.router];
      if (auto flit = node.nic.injectable()) {
        if (router.offer_write(node.port, *flit)) {
          node.nic.stage_to_router();
          channels_[nic_out_channel_[n]].busy_cycles++;
          changed = true;
        }
      }
      if (router.out_readable(node.port) && node.nic.can_stage_from_router()) {
        node.nic.stage_from_router(*router.out_reg(node.port));
        router.mark_read(node.port);
        channels_[nic_in_channel_[n]].busy_cycles++;
        changed = true;
      }
    }

    for (Link& link : links_) {
      if (link.staged) continue;
      Router& from = routers_[link.from_router];
      Router& to = routers_[link.to_router];
      if (!from.out_readable(link.from_port)) continue;
      if (!to.offer_write(link.to_port, *from.out_reg(link.from_port))) continue;
      from.mark_read(link.from_port);
      link.staged = true;
      channels_[link.channel].busy_cycles++;
      changed = true;
    }

    for (Router& router : routers_) {
      if (router.arbitrate(cycle_, trace_)) changed = true;
    }
  }
  for (Link& link : links_) link.staged = false;
}

void Network::record_from_router_commit(const SimFlit& flit) {
  if (flit.seq != 0) return;
  auto it = open_records_.find(flit.packet);
  if (it != open_records_.end()) it->second.header_arrival_cycle = cycle_;
}

void Network::record_core_receive(NicNode& node, const SimFlit& flit) {
  NicNode::RxStream& rx = node.rx[flit.flit.origin];
  if (!rx.open) {
    if (!(flit.flit.ctrl && flit.seq == 0)) {
      ++reorder_events_;
    }
    rx.open = true;
    rx.packet_id = flit.packet;
    rx.expect_seq = flit.seq + 1;
  } else {
    if (flit.packet != rx.packet_id || flit.seq != rx.expect_seq) {
      ++reorder_events_;
      rx.packet_id = flit.packet;
    }
    rx.expect_seq = flit.seq + 1;
  }

  if (flit.flit.ctrl && flit.seq + 1 == flow_rt_[flit.flow].spec.packet_flits) {
    rx.open = false;
    auto it = open_records_.find(flit.packet);
    if (it != open_records_.end()) {
      it->second.tail_arrival_cycle = cycle_;
      it->second.latency_cycles = cycle_ - it->second.inject_cycle;
      closed_records_.push_back(it->second);
      open_records_.erase(it);
    }
  }
}

void Network::commit_edge() {
  std::size_t moves = 0;
  for (Router& router : routers_) {
    moves += router.commit(cycle_, trace_);
  }
  for (NicNode& node : nics_) {
    Nic::Committed done = node.nic.commit();
    if (done.core_sent) {
      ++injected_;
      ++moves;
      if (done.core_sent->seq == 0) {
        const FlowRuntime& rt = flow_rt_[done.core_sent->flow];
        LatencyRecord rec;
        rec.packet_id = done.core_sent->packet;
        rec.flow_id = rt.spec.flow_id;
        rec.src = rt.spec.origin;
        rec.dst = rt.spec.dest;
        rec.hops = static_cast<unsigned>(rt.path.size());
        rec.inject_cycle = cycle_;
        open_records_[rec.packet_id] = rec;
      }
    }
    if (done.to_router) {
      ++moves;
      if (done.to_router->seq == 0) {
        auto it = open_records_.find(done.to_router->packet);
        if (it != open_records_.end()) it->second.network_entry_cycle = cycle_;
      }
    }
    if (done.from_router) {
      ++moves;
      record_from_router_commit(*done.from_router);
    }
    if (done.core_received) {
      ++delivered_;
      ++node.deliveries;
      ++moves;
      record_core_receive(node, *done.core_received);
    }
  }
  if (moves > 0) last_progress_ = cycle_;
}

void Network::verify_invariants() const {
  if (injected_ != delivered_ + flits_in_flight()) {
    throw Error("flit conservation broken at cycle " + std::to_string(cycle_) + ": " +
                std::to_string(injected_) + " injected, " + std::to_string(delivered_) +
                " delivered, " + std::to_string(flits_in_flight()) + " in flight");
  }
  for (const Router& router : routers_) {
    for (std::size_t o = 0; o < params_.ports_per_router; ++o) {
      if (!router.arbiter(port_from_index(o))
               .is_permutation_of_active(params_.ports_per_router)) {
        throw Error("arbiter priorities of router " + to_string(router.coords()) +
                    " output " + port_name(port_from_index(o)) +
                    " are not a permutation");
      }
    }
  }
}

void Network::step() {
  settle();
  ++cycle_;
  commit_edge();
  if (occupancy_out_) {
    for (const NicNode& node : nics_) {
      const Address& a = node.nic.address();
      *occupancy_out_ << cycle_ << "," << a.x << ":" << a.y << ":" << a.h << ",input,"
                      << node.nic.input_fifo().size() << "\n";
      *occupancy_out_ << cycle_ << "," << a.x << ":" << a.y << ":" << a.h << ",output,"
                      << node.nic.output_fifo().size() << "\n";
    }
  }
  if (check_invariants_) verify_invariants();
  if (flits_in_flight() > 0 && cycle_ - last_progress_ > deadlock_window_) {
    throw DeadlockSuspected("no flit moved for " + std::to_string(deadlock_window_) +
                            " cycles at cycle " + std::to_string(cycle_) + " with " +
                            std::to_string(flits_in_flight()) + " flits in flight");
  }
}

SimResult Network::run(const StopCondition& stop) {
  if (!stop.max_cycles && !stop.until_delivered) {
    throw Error("run needs a max cycle count or an until-delivered stop");
  }
  if (stop.until_delivered && !stop.max_cycles) {
    for (const FlowRuntime& rt : flow_rt_) {
      if (!rt.spec.packet_count) {
        throw Error("flow " + rt.spec.name +
                    " is unbounded; until-delivered runs need max_cycles");
      }
    }
  }

  for (;;) {
    if (stop.max_cycles && cycle_ >= *stop.max_cycles) break;
    if (stop.until_delivered) {
      bool sources_done = true;
      for (const FlowRuntime& rt : flow_rt_) {
        if (!rt.spec.packet_count || rt.packets_started < *rt.spec.packet_count ||
            rt.pending_starts > 0) {
          sources_done = false;
          break;
        }
      }
      bool streams_done = true;
      for (const NicNode& node : nics_) {
        if (node.active) {
          streams_done = false;
          break;
        }
      }
      if (sources_done && streams_done && flits_in_flight() == 0) break;
    }
    step();
  }

  SimResult result;
  result.records = closed_records_;
  std::sort(result.records.begin(), result.records.end(),
            [](const LatencyRecord& a, const LatencyRecord& b) {
              return a.packet_id < b.packet_id;
            });
  result.channels = channels_;
  result.total_cycles = cycle_;
  result.seed = seed_;
  result.config_echo = config_echo_;
  result.reorder_events = reorder_events_;
  for (const auto& [id, rec] : open_records_) {
    (void)rec;
    result.undelivered_packets.push_back(id);
  }
  for (const NicNode& node : nics_) {
    if (node.active) result.undelivered_packets.push_back(node.active->packet_id);
  }
  std::sort(result.undelivered_packets.begin(), result.undelivered_packets.end());
  result.undelivered_packets.erase(
      std::unique(result.undelivered_packets.begin(), result.undelivered_packets.end()),
      result.undelivered_packets.end());
  return result;
}

Network build_network(const NetworkParams& params, const TopologySpec& topo,
                      const std::vector<FlowSpec>& flows, std::uint64_t seed) {
  return Network(params, topo, flows, seed);
}

}  // namespace noc
