#include "noc/traffic.hpp"

#include <map>
#include <utility>

#include "noc/router.hpp"

namespace noc {

void validate_flow(const FlowSpec& flow, const NetworkParams& params) {
  if (flow.origin == flow.dest) {
    throw Error("flow " + flow.name + ": origin and destination are the same NI");
  }
  if (flow.packet_flits < 2 ||
      flow.packet_flits > params.effective_max_packet_flits()) {
    throw Error("flow " + flow.name + ": packet_flits must be in [2," +
                std::to_string(params.effective_max_packet_flits()) + "]");
  }
  if (const auto* p = std::get_if<PeriodicSchedule>(&flow.schedule)) {
    if (p->period < 1) throw Error("flow " + flow.name + ": period must be >= 1");
  } else if (const auto* b = std::get_if<BernoulliSchedule>(&flow.schedule)) {
    if (b->probability < 0.0 || b->probability > 1.0) {
      throw Error("flow " + flow.name + ": probability must be in [0,1]");
    }
  } else if (const auto* o = std::get_if<OnOffSchedule>(&flow.schedule)) {
    if (o->burst_cycles < 1) {
      throw Error("flow " + flow.name + ": burst_cycles must be >= 1");
    }
  }
}

bool next_injection(const FlowSpec& flow, std::uint64_t cycle, std::mt19937_64& rng) {
  if (const auto* p = std::get_if<PeriodicSchedule>(&flow.schedule)) {
    return cycle >= p->offset && (cycle - p->offset) % p->period == 0;
  }
  if (const auto* b = std::get_if<BernoulliSchedule>(&flow.schedule)) {
    if (b->probability <= 0.0) return false;
    if (b->probability >= 1.0) return true;
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng) < b->probability;
  }
  const auto& o = std::get<OnOffSchedule>(flow.schedule);
  return cycle % (o.burst_cycles + o.gap_cycles) < o.burst_cycles;
}

double flow_rate(const FlowSpec& flow) {
  if (const auto* p = std::get_if<PeriodicSchedule>(&flow.schedule)) {
    return static_cast<double>(flow.packet_flits) / static_cast<double>(p->period);
  }
  if (const auto* b = std::get_if<BernoulliSchedule>(&flow.schedule)) {
    return static_cast<double>(flow.packet_flits) * b->probability;
  }
  const auto& o = std::get<OnOffSchedule>(flow.schedule);
  return static_cast<double>(o.burst_cycles) /
         static_cast<double>(o.burst_cycles + o.gap_cycles);
}

double offered_load(const std::vector<FlowSpec>& flows, double bandwidth) {
  if (bandwidth <= 0.0) throw Error("offered_load: bandwidth must be positive");

  // key: channel between (router, output port) pairs along XY paths; the
  // source and sink NI channels are included as well
  std::map<std::pair<std::pair<unsigned, unsigned>, int>, double> load;
  double worst = 0.0;
  for (const FlowSpec& flow : flows) {
    double rate = flow_rate(flow);
    auto charge = [&](unsigned x, unsigned y, int channel) {
      double& slot = load[{{x, y}, channel}];
      slot += rate;
      if (slot > worst) worst = slot;
    };
    charge(flow.origin.x, flow.origin.y, -1 - static_cast<int>(flow.origin.h));
    for (const auto& [coord, out] : xy_path(flow.origin, flow.dest)) {
      charge(coord.x, coord.y, static_cast<int>(port_index(out)));
    }
  }
  return worst / bandwidth;
}

}  // namespace noc
