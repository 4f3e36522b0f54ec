#include "noc/router.hpp"

#include <algorithm>
#include <sstream>

namespace noc {

std::string to_string(const Coord& c) {
  std::ostringstream os;
  os << c.x << "," << c.y;
  return os.str();
}

PortId route_request(Coord router, const Address& dest, unsigned ports_per_router) {
  if (dest.x != router.x) {
    return dest.x > router.x ? PortId::EE : PortId::WW;
  }
  if (dest.y != router.y) {
    return dest.y > router.y ? PortId::NN : PortId::SS;
  }
  if (dest.h >= ports_per_router) {
    throw InvalidLocalPort("destination " + to_string(dest) +
                           " selects local port " + std::to_string(dest.h) +
                           " on a router with " + std::to_string(ports_per_router) +
                           " ports");
  }
  return port_from_index(dest.h);
}

std::vector<std::pair<Coord, PortId>> xy_path(const Address& origin, const Address& dest,
                                              unsigned ports_per_router) {
  std::vector<std::pair<Coord, PortId>> path;
  Coord at{origin.x, origin.y};
  for (;;) {
    PortId out = route_request(at, dest, ports_per_router);
    path.emplace_back(at, out);
    if (!is_mesh_port(out) || (at.x == dest.x && at.y == dest.y)) break;
    PortDelta d = mesh_delta(out);
    at.x = static_cast<unsigned>(static_cast<int>(at.x) + d.dx);
    at.y = static_cast<unsigned>(static_cast<int>(at.y) + d.dy);
  }
  return path;
}

ArbiterState ArbiterState::reset(const NetworkParams& params) {
  // Mesh channels rank above the core-facing ones so that flits already in
  // the network keep moving; the full order is fixed for reproducibility.
  static constexpr PortId kResetOrder[kMaxPorts] = {
      PortId::NN, PortId::SS, PortId::EE, PortId::WW,
      PortId::NE, PortId::NW, PortId::SE, PortId::SW};

  ArbiterState st;
  for (PortId p : kResetOrder) {
    if (port_index(p) < params.ports_per_router) st.priority.push_back(p);
  }
  for (std::size_t i = 0; i < kMaxPorts; ++i) {
    PortId p = port_from_index(i);
    if (i < params.ports_per_router) {
      st.counter[i] = params.burst_for(p);
      st.counter_reload[i] = st.counter[i];
    }
  }
  return st;
}

bool ArbiterState::is_permutation_of_active(unsigned ports_per_router) const {
  if (priority.size() != ports_per_router) return false;
  std::array<bool, kMaxPorts> seen{};
  for (PortId p : priority) {
    std::size_t i = port_index(p);
    if (i >= ports_per_router || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

ArbiterDecision arbiter_step(const ArbiterState& state,
                             const std::vector<PortId>& requests, bool output_busy) {
  ArbiterDecision out{state, std::nullopt};
  if (output_busy || requests.empty()) return out;

  auto requested = [&](PortId p) {
    return std::find(requests.begin(), requests.end(), p) != requests.end();
  };

  auto it = std::find_if(state.priority.begin(), state.priority.end(), requested);
  if (it == state.priority.end()) return out;

  PortId winner = *it;
  out.grant = winner;
  out.state.granted = winner;

  std::size_t wi = port_index(winner);
  auto& counter = out.state.counter[wi];
  if (is_mesh_port(winner) && counter.has_value() && *counter > 0) {
    --*counter;  // burst continues, ranks untouched
    return out;
  }
  if (counter.has_value()) counter = out.state.counter_reload[wi];

  // winner drops to the lowest rank; everyone below moves up one
  auto pos = std::find(out.state.priority.begin(), out.state.priority.end(), winner);
  out.state.priority.erase(pos);
  out.state.priority.push_back(winner);
  return out;
}

std::size_t CrossbarMatching::size() const {
  std::size_t n = 0;
  for (const auto& m : input_for_output) {
    if (m) ++n;
  }
  return n;
}

bool CrossbarMatching::is_partial_permutation() const {
  std::array<int, kMaxPorts> uses_in{};
  std::array<int, kMaxPorts> uses_out{};
  for (std::size_t o = 0; o < kMaxPorts; ++o) {
    if (input_for_output[o]) {
      std::size_t i = port_index(*input_for_output[o]);
      ++uses_in[i];
      ++uses_out[o];
      if (!output_for_input[i] || port_index(*output_for_input[i]) != o) return false;
    }
  }
  for (std::size_t i = 0; i < kMaxPorts; ++i) {
    if (output_for_input[i]) {
      std::size_t o = port_index(*output_for_input[i]);
      if (!input_for_output[o] || port_index(*input_for_output[o]) != i) return false;
    }
    if (uses_in[i] > 1 || uses_out[i] > 1) return false;
  }
  return true;
}

CrossbarMatching allocator_apply(const GrantMap& grants) {
  CrossbarMatching m;
  for (std::size_t o = 0; o < kMaxPorts; ++o) {
    if (!grants[o]) continue;
    PortId in = *grants[o];
    std::size_t i = port_index(in);
    if (m.output_for_input[i]) {
      throw DuplicateInput(std::string("input ") + port_name(in) +
                           " claimed by outputs " +
                           port_name(*m.output_for_input[i]) + " and " +
                           port_name(port_from_index(o)));
    }
    m.input_for_output[o] = in;
    m.output_for_input[i] = port_from_index(o);
  }
  return m;
}

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::Latch: return "latch";
    case TraceKind::Grant: return "grant";
    case TraceKind::Forward: return "forward";
    case TraceKind::Rd: return "rd";
    case TraceKind::WaitSet: return "wait_set";
    case TraceKind::WaitClear: return "wait_clear";
  }
  return "?";
}

std::string format_trace(const TraceEvent& ev) {
  std::ostringstream os;
  os << ev.cycle << " R(" << to_string(ev.router) << ") " << port_name(ev.port) << " "
     << trace_kind_name(ev.kind) << " " << ev.flit;
  return os.str();
}

Router::Router(Coord xy, const NetworkParams& params)
    : coords_(xy), ports_(params.ports_per_router),
      ports_per_router_(params.ports_per_router), params_(params) {
  for (std::size_t o = 0; o < kMaxPorts; ++o) {
    arb_[o] = ArbiterState::reset(params);
  }
}

bool Router::in_wait(PortId p) const {
  const auto& in = in_[port_index(p)];
  return in.reg.has_value() && !granted_[port_index(p)];
}

bool Router::out_nd(PortId p) const { return out_[port_index(p)].nd; }

const std::optional<SimFlit>& Router::out_reg(PortId p) const {
  return out_[port_index(p)].reg;
}

const InputPortState& Router::input(PortId p) const { return in_[port_index(p)]; }

const ArbiterState& Router::arbiter(PortId out) const { return arb_[port_index(out)]; }

bool Router::can_accept(PortId in) const {
  std::size_t i = port_index(in);
  if (!active(in) || pending_latch_[i].has_value()) return false;
  return !in_[i].reg.has_value() || granted_[i];
}

bool Router::offer_write(PortId in, const SimFlit& flit) {
  if (!can_accept(in)) return false;
  pending_latch_[port_index(in)] = flit;
  return true;
}

bool Router::out_readable(PortId out) const {
  std::size_t o = port_index(out);
  return out_[o].reg.has_value() && !pending_read_[o];
}

void Router::mark_read(PortId out) {
  std::size_t o = port_index(out);
  if (!out_[o].reg.has_value()) {
    throw HandshakeViolation("RD on empty output " + std::string(port_name(out)) +
                             " of router " + to_string(coords_));
  }
  pending_read_[o] = true;
}

bool Router::arbitrate(std::uint64_t cycle, const TraceFn& trace) {
  bool changed = false;
  for (std::size_t o = 0; o < ports_; ++o) {
    if (pending_forward_[o]) continue;
    bool busy = out_[o].reg.has_value() && !pending_read_[o];
    if (busy) continue;

    std::vector<PortId> requests;
    for (std::size_t i = 0; i < ports_; ++i) {
      const auto& in = in_[i];
      if (in.reg.has_value() && !granted_[i] && in.pending_request &&
          port_index(*in.pending_request) == o) {
        requests.push_back(port_from_index(i));
      }
    }
    if (requests.empty()) continue;

    ArbiterDecision d = arbiter_step(arb_[o], requests, false);
    arb_[o] = d.state;
    if (d.grant) {
      pending_forward_[o] = d.grant;
      granted_[port_index(*d.grant)] = true;
      changed = true;
      if (trace) {
        trace({cycle, coords_, port_from_index(o), TraceKind::Grant,
               render_flit(in_[port_index(*d.grant)].reg->flit, params_)});
      }
    }
  }
  return changed;
}

void Router::latch(PortId p, const SimFlit& flit, std::uint64_t cycle,
                   const TraceFn& trace) {
  std::size_t i = port_index(p);
  auto& in = in_[i];
  in.reg = flit;
  in.wait = true;
  in.pending_request = route_request(coords_, flit.flit.dest, ports_per_router_);
  if (trace) {
    trace({cycle, coords_, p, TraceKind::Latch, render_flit(flit.flit, params_)});
    trace({cycle, coords_, p, TraceKind::WaitSet, ""});
  }
}

std::size_t Router::commit(std::uint64_t cycle, const TraceFn& trace) {
  std::size_t moves = 0;
  // reads drain output registers first
  for (std::size_t o = 0; o < ports_; ++o) {
    if (pending_read_[o]) {
      if (trace) {
        trace({cycle, coords_, port_from_index(o), TraceKind::Rd,
               render_flit(out_[o].reg->flit, params_)});
      }
      out_[o].reg.reset();
      out_[o].nd = false;
      arb_[o].granted.reset();
      ++moves;
    }
  }

  // granted flits cross the switch into the freed output registers
  CrossbarMatching matching = allocator_apply(pending_forward_);
  std::array<std::optional<SimFlit>, kMaxPorts> in_regs;
  for (std::size_t i = 0; i < kMaxPorts; ++i) in_regs[i] = in_[i].reg;
  auto moved = crossbar_transfer(matching, in_regs);
  for (std::size_t o = 0; o < ports_; ++o) {
    if (!matching.input_for_output[o]) continue;
    std::size_t i = port_index(*matching.input_for_output[o]);
    out_[o].reg = moved[o];
    out_[o].nd = true;
    in_[i].reg.reset();
    in_[i].wait = false;
    in_[i].pending_request.reset();
    ++moves;
    if (trace) {
      trace({cycle, coords_, port_from_index(o), TraceKind::Forward,
             render_flit(out_[o].reg->flit, params_)});
      trace({cycle, coords_, port_from_index(i), TraceKind::WaitClear, ""});
    }
  }

  // freshly written flits land in the drained input registers
  for (std::size_t i = 0; i < ports_; ++i) {
    if (pending_latch_[i]) {
      latch(port_from_index(i), *pending_latch_[i], cycle, trace);
      pending_latch_[i].reset();
      ++moves;
    }
  }

  pending_forward_ = {};
  pending_read_ = {};
  granted_ = {};
  return moves;
}

std::size_t Router::occupancy() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < ports_; ++i) {
    if (in_[i].reg) ++n;
    if (out_[i].reg) ++n;
  }
  return n;
}

std::array<Router::PortView, kMaxPorts> Router::cycle(
    const std::array<PortDrive, kMaxPorts>& drive) {
  commit(++harness_cycle_, nullptr);

  std::array<PortView, kMaxPorts> view;
  for (std::size_t p = 0; p < ports_; ++p) {
    view[p].nd = out_[p].nd;
    if (out_[p].reg) view[p].flit = out_[p].reg->flit;
  }

  for (std::size_t p = 0; p < ports_; ++p) {
    if (drive[p].read_ready && out_readable(port_from_index(p))) {
      mark_read(port_from_index(p));
    }
  }
  while (arbitrate()) {
  }
  for (std::size_t p = 0; p < ports_; ++p) {
    if (!drive[p].write) continue;
    if (!offer_write(port_from_index(p), SimFlit{*drive[p].write, 0, 0, 0})) {
      throw HandshakeViolation("WR on port " + std::string(port_name(port_from_index(p))) +
                               " while WAIT asserted");
    }
  }
  for (std::size_t p = 0; p < ports_; ++p) {
    view[p].wait = !can_accept(port_from_index(p));
  }
  return view;
}

}  // namespace noc
