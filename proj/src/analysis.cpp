#include "noc/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "noc/router.hpp"

namespace noc {

void PathModel::validate() const {
  if (hops < 1) throw Error("path model: hops must be >= 1");
  if (router_delay < 1) throw Error("path model: router delay must be >= 1");
  if (packet_flits < 0.0) throw Error("path model: packet length must be >= 0");
  if (bandwidth <= 0.0) throw Error("path model: bandwidth must be positive");
}

void WclParams::validate() const {
  for (unsigned n : competitors_per_hop) {
    if (n < 1) throw Error("bound inputs: every hop has at least the analyzed flow");
  }
  if (packet_flits < 1) throw Error("bound inputs: packet_flits must be >= 1");
  if (buffer_flits < 1) throw Error("bound inputs: buffer_flits must be >= 1");
}

double latency_base(const PathModel& m) {
  m.validate();
  return static_cast<double>(m.hops) * m.router_delay + m.packet_flits / m.bandwidth;
}

std::optional<double> latency_be(const PathModel& m, double bandwidth_occupied) {
  m.validate();
  if (bandwidth_occupied < 0.0) throw Error("occupied bandwidth must be >= 0");
  if (bandwidth_occupied >= m.bandwidth) return std::nullopt;  // saturated
  return static_cast<double>(m.hops) * m.router_delay +
         m.packet_flits / (m.bandwidth - bandwidth_occupied);
}

double latency_interleave(const PathModel& m, unsigned competing_flows) {
  m.validate();
  if (competing_flows < 1) throw Error("competing flows must be >= 1");
  return static_cast<double>(m.hops) * m.router_delay +
         static_cast<double>(competing_flows) * (m.packet_flits / m.bandwidth);
}

std::vector<CurvePoint> sweep_offered_load(const PathModel& m, unsigned competing_flows,
                                           const std::vector<double>& loads) {
  std::vector<CurvePoint> curve;
  curve.reserve(loads.size());
  double interleave = latency_interleave(m, competing_flows);
  for (double load : loads) {
    CurvePoint pt;
    pt.offered_load = load;
    pt.be_latency = latency_be(m, load * m.bandwidth);
    pt.interleave_latency = interleave;
    curve.push_back(pt);
  }
  return curve;
}

std::uint64_t header_wcl(const std::vector<unsigned>& competitors_per_hop) {
  std::uint64_t total = 0;
  for (unsigned n : competitors_per_hop) {
    if (n < 1) throw Error("every hop counts at least the analyzed flow");
    total += 2ull * n;
  }
  return total;
}

std::uint64_t payload_wcl(unsigned same_dest_packets, unsigned packet_flits) {
  if (packet_flits < 1) throw Error("packet_flits must be >= 1");
  return 2ull * same_dest_packets * (packet_flits - 1ull);
}

std::uint64_t packet_wcl(const WclParams& w) {
  w.validate();
  return header_wcl(w.competitors_per_hop) +
         payload_wcl(w.same_dest_packets, w.packet_flits) + 2ull * w.buffer_flits;
}

ScheduleComparison schedule_compare(const std::vector<unsigned>& packet_lengths) {
  for (unsigned len : packet_lengths) {
    if (len < 1) throw Error("packet lengths must be >= 1");
  }
  ScheduleComparison cmp;
  cmp.wormhole.resize(packet_lengths.size());
  cmp.interleave.resize(packet_lengths.size());

  std::uint64_t slot = 0;
  for (std::size_t i = 0; i < packet_lengths.size(); ++i) {
    slot += packet_lengths[i];
    cmp.wormhole[i] = slot;  // prefix sums: each packet holds the channel
  }

  std::vector<unsigned> remaining = packet_lengths;
  std::uint64_t live = packet_lengths.size();
  slot = 0;
  while (live > 0) {
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (remaining[i] == 0) continue;
      ++slot;
      if (--remaining[i] == 0) {
        cmp.interleave[i] = slot;
        --live;
      }
    }
  }
  return cmp;
}

std::uint64_t transaction_latency(const TransactionModel& t) {
  return t.network_part() + t.core;
}

std::map<std::uint32_t, WclParams> derive_wcl_params(const NetworkParams& params,
                                                     const std::vector<FlowSpec>& flows) {
  // every directed output channel a flow's path uses, including the final
  // local port toward the destination NI
  std::vector<std::vector<std::pair<Coord, PortId>>> paths;
  paths.reserve(flows.size());
  for (const FlowSpec& flow : flows) {
    paths.push_back(xy_path(flow.origin, flow.dest, params.ports_per_router));
  }

  auto uses_channel = [&](std::size_t flow_idx, Coord at, PortId out) {
    for (const auto& [coord, port] : paths[flow_idx]) {
      if (coord == at && port == out) return true;
    }
    return false;
  };

  std::map<std::uint32_t, WclParams> result;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    WclParams w;
    w.packet_flits = flows[i].packet_flits;
    w.buffer_flits = params.buffer_flits;
    for (const auto& [coord, out] : paths[i]) {
      unsigned n = 0;
      for (std::size_t j = 0; j < flows.size(); ++j) {
        if (uses_channel(j, coord, out)) ++n;
      }
      w.competitors_per_hop.push_back(n);
    }
    unsigned k = 0;
    for (std::size_t j = 0; j < flows.size(); ++j) {
      if (j != i && flows[j].dest.x == flows[i].dest.x &&
          flows[j].dest.y == flows[i].dest.y) {
        ++k;
      }
    }
    w.same_dest_packets = k;
    result[flows[i].flow_id] = w;
  }
  return result;
}

BoundReport validate_bound(const SimResult& result,
                           const std::map<std::uint32_t, WclParams>& per_flow) {
  BoundReport report;
  for (const LatencyRecord& rec : result.records) {
    auto it = per_flow.find(rec.flow_id);
    if (it == per_flow.end()) {
      throw Error("no bound inputs for flow " + std::to_string(rec.flow_id));
    }
    BoundCheck check;
    check.packet_id = rec.packet_id;
    check.flow_id = rec.flow_id;
    check.measured = rec.latency_cycles;
    check.bound = packet_wcl(it->second);
    check.slack = static_cast<std::int64_t>(check.bound) -
                  static_cast<std::int64_t>(check.measured);
    check.violated = check.slack < 0;
    if (check.violated) ++report.violations;
    report.checks.push_back(check);
  }
  return report;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "offered_load,be_latency,interleave_latency,saturated\n";
  char buf[64];
  for (const CurvePoint& pt : curve) {
    std::snprintf(buf, sizeof(buf), "%.6f", pt.offered_load);
    os << buf << ",";
    if (pt.be_latency) {
      std::snprintf(buf, sizeof(buf), "%.6f", *pt.be_latency);
      os << buf;
    }
    os << ",";
    std::snprintf(buf, sizeof(buf), "%.6f", pt.interleave_latency);
    os << buf << "," << (pt.be_latency ? 0 : 1) << "\n";
  }
  return os.str();
}

std::string bound_report_csv(const BoundReport& report) {
  std::ostringstream os;
  os << "packet_id,measured,bound,slack,violated\n";
  for (const BoundCheck& c : report.checks) {
    os << c.packet_id << "," << c.measured << "," << c.bound << "," << c.slack << ","
       << (c.violated ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace noc
