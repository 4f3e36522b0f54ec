#ifndef NOC_NETWORK_INTERFACE_HPP
#define NOC_NETWORK_INTERFACE_HPP

#include <cstdint>
#include <deque>
#include <optional>

#include "noc/flit.hpp"

namespace noc {

// NI FIFO sizing rule: the buffer must cover the core's write/read pace
// relative to the best network latency. A result of 1 means plain registers
// suffice instead of a FIFO memory.
unsigned buffer_size(unsigned core_write_read_cycles, unsigned min_net_latency_cycles);

template <typename T>
class BoundedFifo {
 public:
  explicit BoundedFifo(std::size_t depth) : depth_(depth) {}

  bool empty() const { return q_.empty(); }
  bool full() const { return q_.size() >= depth_; }
  std::size_t size() const { return q_.size(); }
  std::size_t depth() const { return depth_; }

  void push(const T& v) {
    if (full()) throw FifoFull("push into full FIFO of depth " + std::to_string(depth_));
    q_.push_back(v);
  }

  T pop() {
    if (empty()) throw FifoEmpty("pop from empty FIFO");
    T v = q_.front();
    q_.pop_front();
    return v;
  }

  const T& front() const {
    if (empty()) throw FifoEmpty("front of empty FIFO");
    return q_.front();
  }

  bool try_push(const T& v) {
    if (full()) return false;
    q_.push_back(v);
    return true;
  }

  std::optional<T> try_pop() {
    if (empty()) return std::nullopt;
    T v = q_.front();
    q_.pop_front();
    return v;
  }

 private:
  std::deque<T> q_;
  std::size_t depth_;
};

enum class Framing { Header, Payload, Tail };

// What the core sees when it reads from the NI: the destination fields have
// been stripped, only data, origin and the control framing remain.
struct CoreDelivery {
  DataWord word;
  Address origin;
  bool control = false;
};

// Network interface between one core and one router port: an output FIFO
// (core to network), an input FIFO (network to core), flit assembly on the
// way in and destination stripping on the way out. The FIFO full/empty flags
// are the end-to-end flow control.
class Nic {
 public:
  Nic(Address self, const NetworkParams& params);

  const Address& address() const { return self_; }

  // core-side interface
  void core_send(const DataWord& word, const Address& dest, Framing framing);
  CoreDelivery core_receive();

  const BoundedFifo<SimFlit>& input_fifo() const { return input_; }
  const BoundedFifo<SimFlit>& output_fifo() const { return output_; }

  // -- settle phase ------------------------------------------------------
  // Decisions taken against the FIFO state as of the last edge; each commits
  // at the next edge. At most one flit moves per direction per cycle.
  bool can_stage_from_router() const;              // input FIFO has room
  void stage_from_router(const SimFlit& flit);     // RD issued to the router
  std::optional<SimFlit> injectable() const;       // next flit for the router
  void stage_to_router();                          // router accepted the WR
  bool can_stage_core_send() const;                // output FIFO has room
  void stage_core_send(const SimFlit& flit);
  bool can_stage_core_receive() const;             // input FIFO nonempty
  void stage_core_receive();

  // -- edge phase ----------------------------------------------------------
  struct Committed {
    std::optional<SimFlit> from_router;  // entered the input FIFO
    std::optional<SimFlit> to_router;    // left the output FIFO
    std::optional<SimFlit> core_sent;    // entered the output FIFO
    std::optional<SimFlit> core_received;  // delivered to the core
  };
  Committed commit();

  std::size_t occupancy() const { return input_.size() + output_.size(); }

 private:
  Address self_;
  NetworkParams params_;
  BoundedFifo<SimFlit> input_;
  BoundedFifo<SimFlit> output_;

  std::optional<SimFlit> staged_from_router_;
  bool staged_to_router_ = false;
  std::optional<SimFlit> staged_core_send_;
  bool staged_core_receive_ = false;
};

// Channel-level view of one NI/router boundary for standalone use: `nd` and
// `flit` describe the router's local output register, `wait` its local input
// port. The returned strobes commit at the next edge on both sides.
struct NicRouterIn {
  bool nd = false;
  std::optional<SimFlit> flit;
  bool wait = false;
};

struct NicRouterOut {
  bool rd = false;
  std::optional<SimFlit> write;
};

NicRouterOut nic_cycle(Nic& nic, const NicRouterIn& in);

}  // namespace noc

#endif  // NOC_NETWORK_INTERFACE_HPP
