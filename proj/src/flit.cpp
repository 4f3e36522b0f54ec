#include "noc/flit.hpp"

#include <sstream>

namespace noc {

namespace {

const char* kPortNames[kMaxPorts] = {"NN", "NE", "EE", "SE", "SS", "SW", "WW", "NW"};

void append_bits(BitVec& bits, std::uint64_t value, unsigned width) {
  for (unsigned i = 0; i < width; ++i) {
    bits.push_back(((value >> (width - 1 - i)) & 1u) != 0);
  }
}

std::uint64_t read_bits(const BitVec& bits, std::size_t& pos, unsigned width) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) {
    v = (v << 1) | (bits[pos++] ? 1u : 0u);
  }
  return v;
}

void check_address(const Address& a, const NetworkParams& params, const char* which) {
  if (a.x >= params.coord_limit() || a.y >= params.coord_limit()) {
    throw CoordinateOverflow(std::string(which) + " coordinate (" + to_string(a) +
                             ") does not fit in " + std::to_string(params.coord_bits) +
                             " bits per axis");
  }
  if (a.h >= kMaxPorts) {
    throw CoordinateOverflow(std::string(which) + " local port " + std::to_string(a.h) +
                             " does not fit in 3 bits");
  }
}

}  // namespace

PortId port_from_index(std::size_t i) {
  if (i >= kMaxPorts) throw Error("port index out of range: " + std::to_string(i));
  return static_cast<PortId>(i);
}

const char* port_name(PortId p) { return kPortNames[port_index(p)]; }

std::optional<PortId> port_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMaxPorts; ++i) {
    if (name == kPortNames[i]) return static_cast<PortId>(i);
  }
  return std::nullopt;
}

PortId opposite(PortId p) {
  switch (p) {
    case PortId::NN: return PortId::SS;
    case PortId::SS: return PortId::NN;
    case PortId::EE: return PortId::WW;
    case PortId::WW: return PortId::EE;
    case PortId::NE: return PortId::SW;
    case PortId::SW: return PortId::NE;
    case PortId::SE: return PortId::NW;
    case PortId::NW: return PortId::SE;
  }
  throw Error("bad port id");
}

PortDelta mesh_delta(PortId p) {
  switch (p) {
    case PortId::NN: return {0, 1};
    case PortId::SS: return {0, -1};
    case PortId::EE: return {1, 0};
    case PortId::WW: return {-1, 0};
    default: throw Error(std::string("port ") + port_name(p) + " is not a mesh link");
  }
}

std::optional<unsigned> NetworkParams::burst_for(PortId p) const {
  if (!is_mesh_port(p)) return std::nullopt;
  auto it = grant_burst.find(p);
  if (it != grant_burst.end()) return it->second;
  return ports_per_router - 1;
}

void NetworkParams::validate() const {
  if (coord_bits < 1 || coord_bits > 16) {
    throw Error("coord_bits must be in [1,16], got " + std::to_string(coord_bits));
  }
  if (data_bits < 1) throw Error("data_bits must be >= 1");
  if (ports_per_router < 5 || ports_per_router > 8) {
    throw Error("ports_per_router must be in [5,8], got " +
                std::to_string(ports_per_router));
  }
  if (buffer_flits < 1) throw Error("buffer_flits must be >= 1");
  if (effective_max_packet_flits() < 1) throw Error("max_packet_flits must be >= 1");
  if (router_delay < 1) throw Error("router_delay must be >= 1");
  if (core_cycles_per_word < 1) throw Error("core_cycles_per_word must be >= 1");
  for (const auto& [port, credit] : grant_burst) {
    (void)credit;
    if (!is_mesh_port(port)) {
      throw Error(std::string("grant_burst applies only to mesh ports, got ") +
                  port_name(port));
    }
  }
}

std::string to_string(const Address& a) {
  std::ostringstream os;
  os << a.x << "," << a.y << "," << a.h;
  return os.str();
}

std::size_t data_limbs(unsigned data_bits) { return (data_bits + 63u) / 64u; }

DataWord make_data(const NetworkParams& params, std::uint64_t value) {
  DataWord word(data_limbs(params.data_bits), 0);
  word[0] = value;
  return normalize_data(params, std::move(word));
}

DataWord normalize_data(const NetworkParams& params, DataWord word) {
  word.resize(data_limbs(params.data_bits), 0);
  unsigned top_bits = params.data_bits % 64u;
  if (top_bits != 0) {
    word.back() &= (top_bits == 64) ? ~0ull : ((1ull << top_bits) - 1ull);
  }
  return word;
}

bool data_bit(const DataWord& word, unsigned i) {
  std::size_t limb = i / 64u;
  if (limb >= word.size()) return false;
  return ((word[limb] >> (i % 64u)) & 1ull) != 0;
}

void set_data_bit(DataWord& word, unsigned i, bool v) {
  std::size_t limb = i / 64u;
  if (limb >= word.size()) word.resize(limb + 1, 0);
  if (v) {
    word[limb] |= (1ull << (i % 64u));
  } else {
    word[limb] &= ~(1ull << (i % 64u));
  }
}

std::string data_hex(const DataWord& word, unsigned data_bits) {
  unsigned nibbles = (data_bits + 3u) / 4u;
  std::string out(nibbles, '0');
  for (unsigned n = 0; n < nibbles; ++n) {
    unsigned v = 0;
    for (unsigned b = 0; b < 4; ++b) {
      unsigned bit = n * 4 + b;
      if (bit < data_bits && data_bit(word, bit)) v |= (1u << b);
    }
    out[nibbles - 1 - n] = "0123456789abcdef"[v];
  }
  return out;
}

std::vector<Flit> Packet::flits() const {
  std::vector<Flit> all;
  all.reserve(flit_count());
  all.push_back(header);
  all.insert(all.end(), payload.begin(), payload.end());
  all.push_back(tail);
  return all;
}

unsigned flit_width(const NetworkParams& params) {
  return 1u + 2u * (2u * params.coord_bits + 3u) + params.data_bits;
}

BitVec encode_flit(const Flit& flit, const NetworkParams& params) {
  check_address(flit.origin, params, "origin");
  check_address(flit.dest, params, "destination");

  BitVec bits;
  bits.reserve(flit_width(params));
  bits.push_back(flit.ctrl);
  append_bits(bits, flit.origin.x, params.coord_bits);
  append_bits(bits, flit.origin.y, params.coord_bits);
  append_bits(bits, flit.origin.h, 3);
  append_bits(bits, flit.dest.x, params.coord_bits);
  append_bits(bits, flit.dest.y, params.coord_bits);
  append_bits(bits, flit.dest.h, 3);
  for (unsigned i = 0; i < params.data_bits; ++i) {
    bits.push_back(data_bit(flit.data, params.data_bits - 1 - i));
  }
  return bits;
}

Flit decode_flit(const BitVec& bits, const NetworkParams& params) {
  if (bits.size() != flit_width(params)) {
    throw LengthMismatch("expected " + std::to_string(flit_width(params)) +
                         " bits, got " + std::to_string(bits.size()));
  }
  Flit flit;
  std::size_t pos = 0;
  flit.ctrl = bits[pos++];
  flit.origin.x = static_cast<unsigned>(read_bits(bits, pos, params.coord_bits));
  flit.origin.y = static_cast<unsigned>(read_bits(bits, pos, params.coord_bits));
  flit.origin.h = static_cast<unsigned>(read_bits(bits, pos, 3));
  flit.dest.x = static_cast<unsigned>(read_bits(bits, pos, params.coord_bits));
  flit.dest.y = static_cast<unsigned>(read_bits(bits, pos, params.coord_bits));
  flit.dest.h = static_cast<unsigned>(read_bits(bits, pos, 3));
  flit.data.assign(data_limbs(params.data_bits), 0);
  for (unsigned i = 0; i < params.data_bits; ++i) {
    set_data_bit(flit.data, params.data_bits - 1 - i, bits[pos++]);
  }
  return flit;
}

Packet make_packet(const Address& origin, const Address& dest,
                   const std::vector<DataWord>& payload_words,
                   const NetworkParams& params, std::uint64_t header_word,
                   std::uint64_t tail_word) {
  if (payload_words.size() + 2 > params.effective_max_packet_flits()) {
    throw PacketTooLarge("packet of " + std::to_string(payload_words.size() + 2) +
                         " flits exceeds the design-time maximum of " +
                         std::to_string(params.effective_max_packet_flits()));
  }
  check_address(origin, params, "origin");
  check_address(dest, params, "destination");

  Packet pkt;
  pkt.header = Flit{true, origin, dest, make_data(params, header_word)};
  pkt.payload.reserve(payload_words.size());
  for (const DataWord& word : payload_words) {
    pkt.payload.push_back(Flit{false, origin, dest, normalize_data(params, word)});
  }
  pkt.tail = Flit{true, origin, dest, make_data(params, tail_word)};
  return pkt;
}

std::string render_flit(const Flit& flit, const NetworkParams& params) {
  std::ostringstream os;
  os << (flit.ctrl ? '1' : '0') << '|' << to_string(flit.origin) << '|'
     << to_string(flit.dest) << '|' << data_hex(flit.data, params.data_bits);
  return os.str();
}

}  // namespace noc
