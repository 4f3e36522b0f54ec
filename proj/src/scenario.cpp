#include "noc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace noc {

namespace {

struct KeyVal {
  int line = 0;
  std::string key;
  std::string value;
};

struct Section {
  int line = 0;
  std::string name;
  std::vector<KeyVal> entries;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

class Reader {
 public:
  Reader(std::vector<ParseIssue>& parse, std::vector<ParseIssue>& validation)
      : parse_(parse), validation_(validation) {}

  void parse_issue(int line, const std::string& msg) { parse_.push_back({line, msg}); }
  void invalid(int line, const std::string& msg) { validation_.push_back({line, msg}); }

  std::optional<std::uint64_t> number(const KeyVal& kv) {
    std::uint64_t v = 0;
    const char* first = kv.value.data();
    const char* last = first + kv.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) {
      parse_issue(kv.line, "'" + kv.value + "' is not a number for key " + kv.key);
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> real(const KeyVal& kv) {
    try {
      std::size_t used = 0;
      double v = std::stod(kv.value, &used);
      if (used != kv.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      parse_issue(kv.line, "'" + kv.value + "' is not a real number for key " + kv.key);
      return std::nullopt;
    }
  }

  std::optional<Address> address(const KeyVal& kv) {
    auto parts = split(kv.value, ',');
    if (parts.size() != 3) {
      parse_issue(kv.line, "address '" + kv.value + "' must be x,y,h");
      return std::nullopt;
    }
    unsigned vals[3];
    for (int i = 0; i < 3; ++i) {
      auto n = number(KeyVal{kv.line, kv.key, parts[i]});
      if (!n) return std::nullopt;
      vals[i] = static_cast<unsigned>(*n);
    }
    return Address{vals[0], vals[1], vals[2]};
  }

 private:
  std::vector<ParseIssue>& parse_;
  std::vector<ParseIssue>& validation_;
};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  std::vector<ParseIssue> parse_issues;
  std::vector<ParseIssue> validation_issues;
  Reader rd(parse_issues, validation_issues);

  // pass 1: structure
  std::vector<Section> sections;
  {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = trim(raw);
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = trim(line.substr(0, hash));
      if (line.empty()) continue;

      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          rd.parse_issue(line_no, "malformed section header '" + line + "'");
          continue;
        }
        sections.push_back(Section{line_no, trim(line.substr(1, line.size() - 2)), {}});
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        rd.parse_issue(line_no, "expected 'key = value', got '" + line + "'");
        continue;
      }
      if (sections.empty()) {
        rd.parse_issue(line_no, "'" + line + "' appears before any [section]");
        continue;
      }
      sections.back().entries.push_back(
          KeyVal{line_no, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
  }

  Scenario s;
  bool saw_network = false, saw_topology = false, saw_run = false;

  for (const Section& sec : sections) {
    if (sec.name == "network") {
      if (saw_network) rd.invalid(sec.line, "duplicate [network] section");
      saw_network = true;
      for (const KeyVal& kv : sec.entries) {
        if (kv.key == "coord_bits") {
          if (auto v = rd.number(kv)) s.params.coord_bits = static_cast<unsigned>(*v);
        } else if (kv.key == "data_bits") {
          if (auto v = rd.number(kv)) s.params.data_bits = static_cast<unsigned>(*v);
        } else if (kv.key == "ports_per_router") {
          if (auto v = rd.number(kv)) {
            if (*v < 5 || *v > 8) {
              rd.invalid(kv.line, "ports_per_router must be in [5,8], got " + kv.value);
            } else {
              s.params.ports_per_router = static_cast<unsigned>(*v);
            }
          }
        } else if (kv.key == "buffer_flits") {
          if (auto v = rd.number(kv)) s.params.buffer_flits = static_cast<unsigned>(*v);
        } else if (kv.key == "max_packet_flits") {
          if (auto v = rd.number(kv)) {
            s.params.max_packet_flits = static_cast<unsigned>(*v);
          }
        } else if (kv.key == "router_delay") {
          if (auto v = rd.number(kv)) s.params.router_delay = static_cast<unsigned>(*v);
        } else if (kv.key == "core_cycles_per_word") {
          if (auto v = rd.number(kv)) {
            s.params.core_cycles_per_word = static_cast<unsigned>(*v);
          }
        } else if (kv.key == "grant_burst") {
          // either one integer for all mesh ports or PORT:credit pairs
          if (kv.value.find(':') == std::string::npos) {
            if (auto v = rd.number(kv)) {
              for (PortId p : {PortId::NN, PortId::SS, PortId::EE, PortId::WW}) {
                s.params.grant_burst[p] = static_cast<unsigned>(*v);
              }
            }
          } else {
            for (const std::string& item : split(kv.value, ',')) {
              auto pair = split(item, ':');
              auto port = pair.size() == 2 ? port_from_name(pair[0]) : std::nullopt;
              if (!port || !is_mesh_port(*port)) {
                rd.invalid(kv.line, "grant_burst wants mesh PORT:credit, got '" +
                                        item + "'");
                continue;
              }
              if (auto v = rd.number(KeyVal{kv.line, kv.key, pair[1]})) {
                s.params.grant_burst[*port] = static_cast<unsigned>(*v);
              }
            }
          }
        } else {
          rd.invalid(kv.line, "unknown [network] key '" + kv.key + "'");
        }
      }
    } else if (sec.name == "topology") {
      if (saw_topology) rd.invalid(sec.line, "duplicate [topology] section");
      saw_topology = true;
      for (const KeyVal& kv : sec.entries) {
        if (kv.key == "mesh") {
          auto x = kv.value.find('x');
          if (x == std::string::npos) {
            rd.parse_issue(kv.line, "mesh must be WIDTHxHEIGHT, got '" + kv.value + "'");
            continue;
          }
          auto w = rd.number(KeyVal{kv.line, kv.key, trim(kv.value.substr(0, x))});
          auto h = rd.number(KeyVal{kv.line, kv.key, trim(kv.value.substr(x + 1))});
          if (w && h) {
            s.topo.width = static_cast<unsigned>(*w);
            s.topo.height = static_cast<unsigned>(*h);
          }
        } else if (kv.key == "local_ports") {
          if (kv.value == "all") {
            s.topo.local_ports_per_router.reset();
          } else if (auto v = rd.number(kv)) {
            s.topo.local_ports_per_router = static_cast<unsigned>(*v);
          }
        } else if (kv.key.rfind("local_ports ", 0) == 0) {
          auto coord = split(kv.key.substr(12), ',');
          if (coord.size() != 2) {
            rd.parse_issue(kv.line, "per-router key must be 'local_ports x,y'");
            continue;
          }
          auto x = rd.number(KeyVal{kv.line, kv.key, coord[0]});
          auto y = rd.number(KeyVal{kv.line, kv.key, coord[1]});
          if (!x || !y) continue;
          std::vector<PortId> ports;
          bool ok = true;
          for (const std::string& name : split(kv.value, ',')) {
            auto p = port_from_name(name);
            if (!p) {
              rd.invalid(kv.line, "unknown port name '" + name + "'");
              ok = false;
              break;
            }
            ports.push_back(*p);
          }
          if (ok) {
            s.topo.local_ports_override[{static_cast<unsigned>(*x),
                                         static_cast<unsigned>(*y)}] = ports;
          }
        } else {
          rd.invalid(kv.line, "unknown [topology] key '" + kv.key + "'");
        }
      }
    } else if (sec.name == "flow") {
      FlowSpec flow;
      flow.flow_id = static_cast<std::uint32_t>(s.flows.size());
      flow.name = "f" + std::to_string(flow.flow_id);
      flow.packet_count = 1;
      for (const KeyVal& kv : sec.entries) {
        if (kv.key == "name") {
          flow.name = kv.value;
        } else if (kv.key == "origin") {
          if (auto a = rd.address(kv)) flow.origin = *a;
        } else if (kv.key == "dest") {
          if (auto a = rd.address(kv)) flow.dest = *a;
        } else if (kv.key == "packet_flits") {
          if (auto v = rd.number(kv)) flow.packet_flits = static_cast<unsigned>(*v);
        } else if (kv.key == "schedule") {
          auto parts = split(kv.value, ' ');
          parts.erase(std::remove(parts.begin(), parts.end(), std::string()),
                      parts.end());
          if (parts.empty()) {
            rd.parse_issue(kv.line, "empty schedule");
          } else if (parts[0] == "periodic" && parts.size() == 3) {
            auto p = rd.number(KeyVal{kv.line, kv.key, parts[1]});
            auto o = rd.number(KeyVal{kv.line, kv.key, parts[2]});
            if (p && o) flow.schedule = PeriodicSchedule{*p, *o};
          } else if (parts[0] == "bernoulli" && parts.size() == 2) {
            if (auto p = rd.real(KeyVal{kv.line, kv.key, parts[1]})) {
              flow.schedule = BernoulliSchedule{*p};
            }
          } else if (parts[0] == "onoff" && parts.size() == 3) {
            auto b = rd.number(KeyVal{kv.line, kv.key, parts[1]});
            auto g = rd.number(KeyVal{kv.line, kv.key, parts[2]});
            if (b && g) flow.schedule = OnOffSchedule{*b, *g};
          } else {
            rd.parse_issue(kv.line,
                           "schedule must be 'periodic P O', 'bernoulli P' or "
                           "'onoff B G', got '" +
                               kv.value + "'");
          }
        } else if (kv.key == "packets") {
          if (kv.value == "unbounded") {
            flow.packet_count.reset();
          } else if (auto v = rd.number(kv)) {
            flow.packet_count = *v;
          }
        } else if (kv.key == "class") {
          if (kv.value == "realtime") {
            flow.traffic_class = TrafficClass::Realtime;
          } else if (kv.value == "multimedia") {
            flow.traffic_class = TrafficClass::Multimedia;
          } else {
            rd.invalid(kv.line, "class must be realtime or multimedia");
          }
        } else {
          rd.invalid(kv.line, "unknown [flow] key '" + kv.key + "'");
        }
      }
      bool has_origin = false, has_dest = false;
      for (const KeyVal& kv : sec.entries) {
        if (kv.key == "origin") has_origin = true;
        if (kv.key == "dest") has_dest = true;
      }
      if (!has_origin) rd.invalid(sec.line, "flow " + flow.name + " needs an origin");
      if (!has_dest) rd.invalid(sec.line, "flow " + flow.name + " needs a dest");
      s.flows.push_back(std::move(flow));
    } else if (sec.name == "run") {
      if (saw_run) rd.invalid(sec.line, "duplicate [run] section");
      saw_run = true;
      for (const KeyVal& kv : sec.entries) {
        if (kv.key == "max_cycles") {
          if (auto v = rd.number(kv)) s.run.max_cycles = *v;
        } else if (kv.key == "until_delivered") {
          if (kv.value == "true") {
            s.run.until_delivered = true;
          } else if (kv.value == "false") {
            s.run.until_delivered = false;
          } else {
            rd.invalid(kv.line, "until_delivered must be true or false");
          }
        } else if (kv.key == "seed") {
          if (auto v = rd.number(kv)) s.run.seed = *v;
        } else if (kv.key == "output") {
          s.run.output_prefix = kv.value;
        } else if (kv.key == "deadlock_window") {
          if (auto v = rd.number(kv)) s.run.deadlock_window = *v;
        } else {
          rd.invalid(kv.line, "unknown [run] key '" + kv.key + "'");
        }
      }
    } else {
      rd.invalid(sec.line, "unknown section [" + sec.name + "]");
    }
  }

  if (!parse_issues.empty()) throw ParseError(parse_issues);

  // semantic validation against the assembled configuration
  auto guard = [&](int line, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      rd.invalid(line, e.what());
    }
  };
  int network_line = 1, topo_line = 1;
  for (const Section& sec : sections) {
    if (sec.name == "network") network_line = sec.line;
    if (sec.name == "topology") topo_line = sec.line;
  }
  guard(network_line, [&] { s.params.validate(); });

  std::vector<Address> nis;
  bool topo_ok = false;
  guard(topo_line, [&] {
    if (s.topo.width < 1 || s.topo.height < 1) {
      throw TopologyError("mesh needs at least one router per axis");
    }
    if (s.topo.width > s.params.coord_limit() ||
        s.topo.height > s.params.coord_limit()) {
      throw TopologyError("mesh does not fit in " +
                          std::to_string(s.params.coord_bits) + " coordinate bits");
    }
    nis = nis_of(s.topo, s.params);
    topo_ok = true;
  });

  std::size_t flow_idx = 0;
  for (const Section& sec : sections) {
    if (sec.name != "flow") continue;
    const FlowSpec& flow = s.flows[flow_idx++];
    guard(sec.line, [&] { validate_flow(flow, s.params); });
    if (topo_ok) {
      for (const Address* a : {&flow.origin, &flow.dest}) {
        if (std::find(nis.begin(), nis.end(), *a) == nis.end()) {
          rd.invalid(sec.line, "flow " + flow.name + ": no NI at " + to_string(*a));
        }
      }
    }
  }

  if (s.run.until_delivered && !s.run.max_cycles) {
    for (const FlowSpec& flow : s.flows) {
      if (!flow.packet_count) {
        rd.invalid(1, "flow " + flow.name +
                          " is unbounded; set max_cycles or until_delivered = false");
      }
    }
  }

  if (!validation_issues.empty()) throw ValidationError(validation_issues);
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "[network]\n";
  os << "coord_bits = " << s.params.coord_bits << "\n";
  os << "data_bits = " << s.params.data_bits << "\n";
  os << "ports_per_router = " << s.params.ports_per_router << "\n";
  os << "buffer_flits = " << s.params.buffer_flits << "\n";
  if (s.params.max_packet_flits) {
    os << "max_packet_flits = " << s.params.max_packet_flits << "\n";
  }
  os << "router_delay = " << s.params.router_delay << "\n";
  os << "core_cycles_per_word = " << s.params.core_cycles_per_word << "\n";
  if (!s.params.grant_burst.empty()) {
    os << "grant_burst = ";
    bool first = true;
    for (const auto& [port, credit] : s.params.grant_burst) {
      if (!first) os << ",";
      os << port_name(port) << ":" << credit;
      first = false;
    }
    os << "\n";
  }

  os << "\n[topology]\n";
  os << "mesh = " << s.topo.width << "x" << s.topo.height << "\n";
  if (s.topo.local_ports_per_router) {
    os << "local_ports = " << *s.topo.local_ports_per_router << "\n";
  } else {
    os << "local_ports = all\n";
  }
  for (const auto& [coord, ports] : s.topo.local_ports_override) {
    os << "local_ports " << coord.first << "," << coord.second << " = ";
    for (std::size_t i = 0; i < ports.size(); ++i) {
      if (i) os << ",";
      os << port_name(ports[i]);
    }
    os << "\n";
  }

  for (const FlowSpec& flow : s.flows) {
    os << "\n[flow]\n";
    os << "name = " << flow.name << "\n";
    os << "origin = " << to_string(flow.origin) << "\n";
    os << "dest = " << to_string(flow.dest) << "\n";
    os << "packet_flits = " << flow.packet_flits << "\n";
    os << "schedule = ";
    if (const auto* p = std::get_if<PeriodicSchedule>(&flow.schedule)) {
      os << "periodic " << p->period << " " << p->offset;
    } else if (const auto* b = std::get_if<BernoulliSchedule>(&flow.schedule)) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", b->probability);
      os << "bernoulli " << buf;
    } else {
      const auto& o = std::get<OnOffSchedule>(flow.schedule);
      os << "onoff " << o.burst_cycles << " " << o.gap_cycles;
    }
    os << "\n";
    if (flow.packet_count) {
      os << "packets = " << *flow.packet_count << "\n";
    } else {
      os << "packets = unbounded\n";
    }
    os << "class = "
       << (flow.traffic_class == TrafficClass::Realtime ? "realtime" : "multimedia")
       << "\n";
  }

  os << "\n[run]\n";
  if (s.run.max_cycles) os << "max_cycles = " << *s.run.max_cycles << "\n";
  os << "until_delivered = " << (s.run.until_delivered ? "true" : "false") << "\n";
  os << "seed = " << s.run.seed << "\n";
  if (!s.run.output_prefix.empty()) os << "output = " << s.run.output_prefix << "\n";
  if (s.run.deadlock_window) {
    os << "deadlock_window = " << *s.run.deadlock_window << "\n";
  }
  return os.str();
}

Network instantiate(const Scenario& s) {
  Network net = build_network(s.params, s.topo, s.flows, s.run.seed);
  if (s.run.deadlock_window) net.set_deadlock_window(*s.run.deadlock_window);
  net.set_config_echo(serialize_scenario(s));
  return net;
}

}  // namespace noc
