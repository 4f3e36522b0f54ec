// Batch front-end: run scenario files, sweep the analytic latency models,
// print worst-case bounds and validate simulated latencies against them.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "noc/analysis.hpp"
#include "noc/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInputError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw noc::Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// write to a temp file first so partially written outputs never appear
void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw noc::Error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

std::string output_prefix(const std::string& scenario_path, const noc::Scenario& s,
                          const std::string& override_prefix) {
  if (!override_prefix.empty()) return override_prefix;
  if (!s.run.output_prefix.empty()) return s.run.output_prefix;
  return std::filesystem::path(scenario_path).stem().string();
}

std::vector<double> parse_loads(const std::string& spec) {
  // start:end:step range, or a comma-separated list
  auto colon = spec.find(':');
  std::vector<double> loads;
  if (colon != std::string::npos) {
    double start = 0, end = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &end, &step) != 3 ||
        step <= 0) {
      throw noc::Error("loads must be start:end:step or a comma list, got " + spec);
    }
    long n = std::lround((end - start) / step);
    for (long i = 0; i <= n; ++i) loads.push_back(start + static_cast<double>(i) * step);
  } else {
    std::istringstream is(spec);
    std::string item;
    while (std::getline(is, item, ',')) loads.push_back(std::stod(item));
  }
  return loads;
}

int cmd_simulate(const std::string& path, const std::string& out_prefix,
                 const std::string& trace_path, const std::string& occupancy_path) {
  noc::Scenario scenario = noc::parse_scenario(read_file(path));
  noc::Network net = noc::instantiate(scenario);

  std::ofstream trace_out;
  if (!trace_path.empty()) {
    trace_out.open(trace_path, std::ios::trunc);
    if (!trace_out) throw noc::Error("cannot write " + trace_path);
    net.set_trace([&trace_out](const noc::TraceEvent& ev) {
      trace_out << noc::format_trace(ev) << "\n";
    });
  }
  std::ofstream occupancy_out;
  if (!occupancy_path.empty()) {
    occupancy_out.open(occupancy_path, std::ios::trunc);
    if (!occupancy_out) throw noc::Error("cannot write " + occupancy_path);
    occupancy_out << "cycle,nic,fifo,occupancy\n";
    net.set_occupancy_stream(&occupancy_out);
  }

  noc::StopCondition stop{scenario.run.max_cycles, scenario.run.until_delivered};
  noc::SimResult result = net.run(stop);
  std::string prefix = output_prefix(path, scenario, out_prefix);
  write_file_atomic(prefix + "_latency.csv", noc::latency_csv(result));
  write_file_atomic(prefix + "_utilization.csv", noc::utilization_csv(result));

  std::uint64_t worst = 0, total = 0;
  for (const auto& r : result.records) {
    worst = std::max(worst, r.latency_cycles);
    total += r.latency_cycles;
  }
  std::cout << "cycles " << result.total_cycles << "\n";
  std::cout << "packets_delivered " << result.records.size() << "\n";
  std::cout << "packets_undelivered " << result.undelivered_packets.size() << "\n";
  if (!result.records.empty()) {
    std::cout << "avg_latency "
              << static_cast<double>(total) / static_cast<double>(result.records.size())
              << "\n";
    std::cout << "max_latency " << worst << "\n";
  }
  std::cout << "seed " << result.seed << "\n";
  std::cout << "wrote " << prefix << "_latency.csv " << prefix << "_utilization.csv\n";
  return kExitOk;
}

int cmd_analyze(unsigned hops, unsigned tr, double flits, double bandwidth,
                unsigned competitors, const std::string& loads_spec,
                const std::string& out_path) {
  noc::PathModel model{hops, tr, flits, bandwidth};
  std::vector<double> loads = parse_loads(loads_spec);
  auto curve = noc::sweep_offered_load(model, competitors, loads);
  std::string csv = noc::curve_csv(curve);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(out_path, csv);
    std::cout << "base_latency " << noc::latency_base(model) << "\n";
    std::cout << "interleave_latency " << noc::latency_interleave(model, competitors)
              << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_wcl(const std::string& per_hop, unsigned k, unsigned f, unsigned buffer) {
  noc::WclParams w;
  std::istringstream is(per_hop);
  std::string item;
  while (std::getline(is, item, ',')) {
    w.competitors_per_hop.push_back(static_cast<unsigned>(std::stoul(item)));
  }
  w.same_dest_packets = k;
  w.packet_flits = f;
  w.buffer_flits = buffer;

  std::uint64_t header = noc::header_wcl(w.competitors_per_hop);
  std::uint64_t payload = noc::payload_wcl(k, f);
  std::uint64_t buf_term = 2ull * buffer;
  std::cout << "header_term " << header << "\n";
  std::cout << "payload_term " << payload << "\n";
  std::cout << "buffer_term " << buf_term << "\n";
  std::cout << "wcl " << noc::packet_wcl(w) << " = " << header << " + " << payload
            << " + " << buf_term << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& path, const std::string& out_prefix) {
  noc::Scenario scenario = noc::parse_scenario(read_file(path));
  noc::Network net = noc::instantiate(scenario);
  noc::StopCondition stop{scenario.run.max_cycles, scenario.run.until_delivered};
  noc::SimResult result = net.run(stop);

  auto per_flow = noc::derive_wcl_params(scenario.params, scenario.flows);
  noc::BoundReport report = noc::validate_bound(result, per_flow);

  std::string prefix = output_prefix(path, scenario, out_prefix);
  write_file_atomic(prefix + "_wcl.csv", noc::bound_report_csv(report));

  std::cout << "packets_checked " << report.checks.size() << "\n";
  std::cout << "violations " << report.violations << "\n";
  std::cout << "wrote " << prefix << "_wcl.csv\n";
  return report.violations ? kExitViolation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-accurate simulator and latency toolkit for a flit-interleaving "
               "mesh network-on-chip"};
  app.require_subcommand(1);

  std::string scenario_path, out_prefix, out_path, trace_path, occupancy_path;
  std::string loads_spec = "0:0.99:0.01";
  std::string per_hop = "1";
  unsigned hops = 4, tr = 3, competitors = 3, k = 0, f = 1, buffer = 1;
  double flits = 100.0, bandwidth = 1.0;

  auto* sim = app.add_subcommand("simulate", "run a scenario file, emit latency and "
                                             "utilization CSVs");
  sim->add_option("scenario", scenario_path, "scenario file")->required();
  sim->add_option("--out", out_prefix, "output file prefix");
  sim->add_option("--trace", trace_path, "write per-cycle router events here");
  sim->add_option("--occupancy", occupancy_path, "write the NI FIFO occupancy "
                                                 "time-series here");

  auto* ana = app.add_subcommand("analyze", "sweep the analytic latency models over "
                                            "offered load");
  ana->add_option("--hops", hops, "routers on the path");
  ana->add_option("--tr", tr, "router delay in cycles");
  ana->add_option("--flit-count", flits, "packet length in flits");
  ana->add_option("--bandwidth", bandwidth, "channel bandwidth in flits/cycle");
  ana->add_option("--competitors", competitors, "flows sharing the channel");
  ana->add_option("--loads", loads_spec, "offered loads, start:end:step or list");
  ana->add_option("--out", out_path, "write the curve CSV here (default stdout)");

  auto* wcl = app.add_subcommand("wcl", "worst-case packet latency bound with its "
                                        "term breakdown");
  wcl->add_option("--ni", per_hop, "competitors per hop, comma separated")->required();
  wcl->add_option("--k", k, "same-destination packets from other nodes")->required();
  wcl->add_option("--f", f, "flits in the analyzed packet")->required();
  wcl->add_option("--buffer", buffer, "NI buffer depth in flits")->required();

  auto* val = app.add_subcommand("validate", "simulate a scenario and check every "
                                             "packet against its bound");
  val->add_option("scenario", scenario_path, "scenario file")->required();
  val->add_option("--out", out_prefix, "output file prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(scenario_path, out_prefix, trace_path, occupancy_path);
    }
    if (ana->parsed()) {
      return cmd_analyze(hops, tr, flits, bandwidth, competitors, loads_spec, out_path);
    }
    if (wcl->parsed()) return cmd_wcl(per_hop, k, f, buffer);
    if (val->parsed()) return cmd_validate(scenario_path, out_prefix);
  } catch (const noc::ParseError& e) {
    std::cerr << "parse error:\n" << e.what() << "\n";
    return kExitInputError;
  } catch (const noc::ValidationError& e) {
    std::cerr << "invalid scenario:\n" << e.what() << "\n";
    return kExitInputError;
  } catch (const noc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
