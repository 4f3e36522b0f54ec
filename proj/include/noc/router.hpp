#ifndef NOC_ROUTER_HPP
#define NOC_ROUTER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noc/flit.hpp"

namespace noc {

struct Coord {
  unsigned x = 0;
  unsigned y = 0;

  auto operator<=>(const Coord&) const = default;
};

std::string to_string(const Coord& c);  // "x,y"

// Dimension-order routing: the X coordinate is corrected before Y; equal
// coordinates select the local port named by the destination's h field.
// Throws InvalidLocalPort when the flit is home but h is not a usable port.
PortId route_request(Coord router, const Address& dest,
                     unsigned ports_per_router = kMaxPorts);

// Every router a flit visits on the way from origin to dest, paired with the
// output port it leaves through. The last entry is the destination router
// with its local port.
std::vector<std::pair<Coord, PortId>> xy_path(const Address& origin,
                                              const Address& dest,
                                              unsigned ports_per_router = kMaxPorts);

// Rotating-priority arbiter with per-channel burst credit. Mesh ports may win
// several grants in a row (one per credit, plus the grant that reloads the
// counter) before being demoted to the lowest rank; other ports are demoted
// after every grant.
struct ArbiterState {
  std::vector<PortId> priority;  // rank 0 = highest; permutation of active ports
  std::array<std::optional<unsigned>, kMaxPorts> counter;         // remaining credit
  std::array<std::optional<unsigned>, kMaxPorts> counter_reload;  // initial values
  std::optional<PortId> granted;  // input whose flit currently holds the output

  static ArbiterState reset(const NetworkParams& params);
  bool is_permutation_of_active(unsigned ports_per_router) const;
};

struct ArbiterDecision {
  ArbiterState state;
  std::optional<PortId> grant;
};

// One arbitration opportunity. While the output is busy no grant fires and
// the state is untouched; otherwise the highest-ranked requester wins and the
// priority/counter bookkeeping advances.
ArbiterDecision arbiter_step(const ArbiterState& state,
                             const std::vector<PortId>& requests,
                             bool output_busy);

// Grants collected from all arbiters of a router, indexed by output port.
using GrantMap = std::array<std::optional<PortId>, kMaxPorts>;

// Conflict-free crossbar configuration: a partial matching between inputs
// and outputs.
struct CrossbarMatching {
  std::array<std::optional<PortId>, kMaxPorts> input_for_output;
  std::array<std::optional<PortId>, kMaxPorts> output_for_input;

  std::size_t size() const;
  bool is_partial_permutation() const;
};

// Applies all grants in parallel. Throws DuplicateInput if two outputs claim
// the same input, which would indicate a broken arbiter.
CrossbarMatching allocator_apply(const GrantMap& grants);

// Combinational switch: output o carries inputs[i] iff (i,o) is matched.
template <typename T>
std::array<std::optional<T>, kMaxPorts> crossbar_transfer(
    const CrossbarMatching& matching,
    const std::array<std::optional<T>, kMaxPorts>& inputs) {
  std::array<std::optional<T>, kMaxPorts> outputs;
  for (std::size_t o = 0; o < kMaxPorts; ++o) {
    if (matching.input_for_output[o]) {
      outputs[o] = inputs[port_index(*matching.input_for_output[o])];
    }
  }
  return outputs;
}

struct InputPortState {
  std::optional<SimFlit> reg;
  bool wait = false;  // holds a flit that has not been granted yet
  std::optional<PortId> pending_request;  // output asked for by routing control
};

struct OutputPortState {
  std::optional<SimFlit> reg;
  bool nd = false;  // register holds an undelivered flit
};

enum class TraceKind { Latch, Grant, Forward, Rd, WaitSet, WaitClear };
const char* trace_kind_name(TraceKind k);

struct TraceEvent {
  std::uint64_t cycle = 0;
  Coord router;
  PortId port = PortId::NN;
  TraceKind kind = TraceKind::Latch;
  std::string flit;
};

using TraceFn = std::function<void(const TraceEvent&)>;

std::string format_trace(const TraceEvent& ev);

// One router as a deterministic per-cycle state machine. A clock cycle splits
// in two: the edge phase commits every data move that was decided in the
// previous settle phase (register latches happen here), and the settle phase
// takes the cycle's decisions -- downstream reads, arbitration, accepted
// writes. An uncontended flit written in cycle t is readable at its output
// register in cycle t+2.
class Router {
 public:
  Router(Coord xy, const NetworkParams& params);

  Coord coords() const { return coords_; }
  unsigned ports() const { return ports_; }

  bool in_wait(PortId p) const;
  bool out_nd(PortId p) const;
  const std::optional<SimFlit>& out_reg(PortId p) const;
  const InputPortState& input(PortId p) const;
  const ArbiterState& arbiter(PortId out) const;

  // -- settle phase ----------------------------------------------------
  // An input accepts a write when its register is empty, was granted this
  // settle phase, or will drain at the coming edge; one write per cycle.
  bool can_accept(PortId in) const;
  bool offer_write(PortId in, const SimFlit& flit);  // false = WAIT asserted
  bool out_readable(PortId out) const;  // ND set and not yet claimed
  void mark_read(PortId out);           // downstream commits to the RD
  // Runs every output's arbiter once against the current requests. Returns
  // true when a new grant fired (an output marked read this phase counts as
  // free). Safe to call repeatedly within one settle phase.
  bool arbitrate(std::uint64_t cycle = 0, const TraceFn& trace = nullptr);

  // -- edge phase ------------------------------------------------------
  // Applies reads, crossbar forwards and input latches decided in the last
  // settle phase, in that order, then clears the per-cycle decision state.
  // Returns how many register moves happened.
  std::size_t commit(std::uint64_t cycle, const TraceFn& trace = nullptr);

  // Flits resident in this router's registers.
  std::size_t occupancy() const;

  // Single-router harness: drives one full clock with explicit channel
  // signals. `write` models the WR strobe of the attached channel and
  // `read_ready` models a downstream that consumes ND data this cycle.
  // The returned view carries the cycle's data-phase ND/flit values and the
  // settled WAIT. Throws HandshakeViolation on a write while WAIT is up.
  struct PortDrive {
    std::optional<Flit> write;
    bool read_ready = false;
  };
  struct PortView {
    bool wait = false;
    bool nd = false;
    std::optional<Flit> flit;
  };
  std::array<PortView, kMaxPorts> cycle(const std::array<PortDrive, kMaxPorts>& drive);

 private:
  bool active(PortId p) const { return port_index(p) < ports_; }
  void latch(PortId p, const SimFlit& flit, std::uint64_t cycle, const TraceFn& trace);

  Coord coords_;
  unsigned ports_;
  unsigned ports_per_router_;
  std::array<InputPortState, kMaxPorts> in_;
  std::array<OutputPortState, kMaxPorts> out_;
  std::array<ArbiterState, kMaxPorts> arb_;

  // settle-phase decisions, consumed by commit()
  std::array<std::optional<SimFlit>, kMaxPorts> pending_latch_;
  GrantMap pending_forward_;
  std::array<bool, kMaxPorts> pending_read_{};
  std::array<bool, kMaxPorts> granted_{};

  std::uint64_t harness_cycle_ = 0;
  NetworkParams params_;
};

}  // namespace noc

#endif  // NOC_ROUTER_HPP
