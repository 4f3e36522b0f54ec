#ifndef NOC_FLIT_HPP
#define NOC_FLIT_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noc/errors.hpp"

namespace noc {

// Eight router ports named by compass direction. NN/SS/EE/WW link
// neighbouring routers in the mesh; any port may instead host a local core
// through a network interface.
enum class PortId : std::uint8_t {
  NN = 0,
  NE = 1,
  EE = 2,
  SE = 3,
  SS = 4,
  SW = 5,
  WW = 6,
  NW = 7,
};

inline constexpr std::size_t kMaxPorts = 8;

constexpr std::size_t port_index(PortId p) { return static_cast<std::size_t>(p); }
PortId port_from_index(std::size_t i);
const char* port_name(PortId p);
std::optional<PortId> port_from_name(std::string_view name);

// true for the four ports that carry inter-router mesh links
constexpr bool is_mesh_port(PortId p) {
  return p == PortId::NN || p == PortId::SS || p == PortId::EE || p == PortId::WW;
}
PortId opposite(PortId p);

struct PortDelta {
  int dx = 0;
  int dy = 0;
};
PortDelta mesh_delta(PortId p);  // NN/SS/EE/WW only

// Design-time configuration of the whole network.
struct NetworkParams {
  unsigned coord_bits = 1;        // coordinates span [0, 2^coord_bits)
  unsigned data_bits = 32;        // width of the flit data field
  unsigned ports_per_router = 8;  // 5..8
  unsigned buffer_flits = 4;      // NI FIFO depth
  unsigned max_packet_flits = 0;  // 0 = default (128 * buffer_flits)
  unsigned router_delay = 2;      // per-router forwarding delay used by the models
  unsigned core_cycles_per_word = 1;  // core-side read/write pace at the NI
  // Initial arbiter burst credit per mesh input port. A port absent from the
  // map uses the default of ports_per_router - 1; non-mesh ports never carry
  // a counter.
  std::map<PortId, unsigned> grant_burst;

  unsigned coord_limit() const { return 1u << coord_bits; }
  unsigned effective_max_packet_flits() const {
    return max_packet_flits ? max_packet_flits : 128u * buffer_flits;
  }
  std::optional<unsigned> burst_for(PortId p) const;
  void validate() const;  // throws Error on out-of-range configuration

  bool operator==(const NetworkParams&) const = default;
};

// Full network address: router coordinates plus the local port hosting the
// core. h is always expressed in 3 bits regardless of ports_per_router.
struct Address {
  unsigned x = 0;
  unsigned y = 0;
  unsigned h = 0;

  auto operator<=>(const Address&) const = default;
};

std::string to_string(const Address& a);  // "x,y,h"

// Data field of a flit: least-significant 64-bit limb first, sized to cover
// data_bits exactly with unused top bits clear.
using DataWord = std::vector<std::uint64_t>;

std::size_t data_limbs(unsigned data_bits);
DataWord make_data(const NetworkParams& params, std::uint64_t value);
DataWord normalize_data(const NetworkParams& params, DataWord word);
bool data_bit(const DataWord& word, unsigned i);
void set_data_bit(DataWord& word, unsigned i, bool v);
std::string data_hex(const DataWord& word, unsigned data_bits);

// One network word. Header and tail flits carry ctrl set; their data field
// is opaque protocol payload that routers never interpret.
struct Flit {
  bool ctrl = false;
  Address origin;
  Address dest;
  DataWord data;

  bool operator==(const Flit&) const = default;
};

// Flit plus simulation bookkeeping that travels outside the wire format.
struct SimFlit {
  Flit flit;
  std::uint64_t packet = 0;
  std::uint32_t flow = 0;
  std::uint32_t seq = 0;
};

struct Packet {
  Flit header;
  std::vector<Flit> payload;
  Flit tail;

  std::size_t flit_count() const { return payload.size() + 2; }
  std::vector<Flit> flits() const;
};

// encoded width: 1 + 2(2p+3) + d
unsigned flit_width(const NetworkParams& params);

// Encoded flits are exposed most-significant bit first: index 0 holds the
// control bit, followed by origin x/y/h, destination x/y/h, then data.
using BitVec = std::vector<bool>;

BitVec encode_flit(const Flit& flit, const NetworkParams& params);
Flit decode_flit(const BitVec& bits, const NetworkParams& params);

Packet make_packet(const Address& origin, const Address& dest,
                   const std::vector<DataWord>& payload_words,
                   const NetworkParams& params, std::uint64_t header_word = 0,
                   std::uint64_t tail_word = 0);

// Debug rendering: C|Xo,Yo,Ho|Xd,Yd,Hd|DATAhex
std::string render_flit(const Flit& flit, const NetworkParams& params);

}  // namespace noc

#endif  // NOC_FLIT_HPP
