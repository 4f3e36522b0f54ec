#include "noc/network_interface.hpp"

namespace noc {

unsigned buffer_size(unsigned core_write_read_cycles, unsigned min_net_latency_cycles) {
  if (core_write_read_cycles < 1 || min_net_latency_cycles < 1) {
    throw InvalidTiming("buffer sizing needs both timings >= 1 cycle");
  }
  unsigned size = (core_write_read_cycles + min_net_latency_cycles - 1) /
                  min_net_latency_cycles;
  return size < 1 ? 1 : size;
}

Nic::Nic(Address self, const NetworkParams& params)
    : self_(self), params_(params), input_(params.buffer_flits),
      output_(params.buffer_flits) {}

void Nic::core_send(const DataWord& word, const Address& dest, Framing framing) {
  Flit flit;
  flit.ctrl = framing != Framing::Payload;
  flit.origin = self_;
  flit.dest = dest;
  flit.data = normalize_data(params_, word);
  output_.push(SimFlit{flit, 0, 0, 0});  // throws FifoFull: end-to-end backpressure
}

CoreDelivery Nic::core_receive() {
  SimFlit f = input_.pop();
  return CoreDelivery{f.flit.data, f.flit.origin, f.flit.ctrl};
}

bool Nic::can_stage_from_router() const {
  return !staged_from_router_.has_value() && !input_.full();
}

void Nic::stage_from_router(const SimFlit& flit) {
  if (!can_stage_from_router()) {
    throw HandshakeViolation("RD staged while the input FIFO of NI " +
                             to_string(self_) + " is full");
  }
  staged_from_router_ = flit;
}

std::optional<SimFlit> Nic::injectable() const {
  if (staged_to_router_ || output_.empty()) return std::nullopt;
  return output_.front();
}

void Nic::stage_to_router() {
  if (staged_to_router_ || output_.empty()) {
    throw HandshakeViolation("WR staged without a flit at NI " + to_string(self_));
  }
  staged_to_router_ = true;
}

bool Nic::can_stage_core_send() const {
  return !staged_core_send_.has_value() && !output_.full();
}

void Nic::stage_core_send(const SimFlit& flit) {
  if (!can_stage_core_send()) {
    throw FifoFull("core write staged while the output FIFO of NI " +
                   to_string(self_) + " is full");
  }
  staged_core_send_ = flit;
}

bool Nic::can_stage_core_receive() const {
  return !staged_core_receive_ && !input_.empty();
}

void Nic::stage_core_receive() {
  if (!can_stage_core_receive()) {
    throw FifoEmpty("core read staged while the input FIFO of NI " +
                    to_string(self_) + " is empty");
  }
  staged_core_receive_ = true;
}

Nic::Committed Nic::commit() {
  Committed done;
  // pops first so a full FIFO still honours the staged-at-capacity rule:
  // space was checked against the pre-edge occupancy
  if (staged_core_receive_) {
    done.core_received = input_.pop();
    staged_core_receive_ = false;
  }
  if (staged_to_router_) {
    done.to_router = output_.pop();
    staged_to_router_ = false;
  }
  if (staged_from_router_) {
    input_.push(*staged_from_router_);
    done.from_router = staged_from_router_;
    staged_from_router_.reset();
  }
  if (staged_core_send_) {
    output_.push(*staged_core_send_);
    done.core_sent = staged_core_send_;
    staged_core_send_.reset();
  }
  return done;
}

NicRouterOut nic_cycle(Nic& nic, const NicRouterIn& in) {
  nic.commit();

  if (in.nd && !in.flit.has_value()) {
    throw HandshakeViolation("ND asserted with no flit on the channel");
  }

  NicRouterOut out;
  if (in.nd && nic.can_stage_from_router()) {
    nic.stage_from_router(*in.flit);
    out.rd = true;
  }
  if (!in.wait) {
    if (auto flit = nic.injectable()) {
      nic.stage_to_router();
      out.write = flit;
    }
  }
  return out;
}

}  // namespace noc
