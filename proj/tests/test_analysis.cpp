#include <doctest.h>

#include <random>

#include "noc/analysis.hpp"

using namespace noc;

namespace {

PathModel reference_model() { return PathModel{4, 3, 100.0, 1.0}; }

FlowSpec quick_flow(std::uint32_t id, Address origin, Address dest, unsigned flits) {
  FlowSpec f;
  f.flow_id = id;
  f.name = "f" + std::to_string(id);
  f.origin = origin;
  f.dest = dest;
  f.packet_flits = flits;
  f.schedule = PeriodicSchedule{1000000, 0};
  f.packet_count = 1;
  return f;
}

}  // namespace

TEST_CASE("base latency adds hop traversal and channel crossing") {
  CHECK(latency_base(reference_model()) == doctest::Approx(112.0));
  CHECK(latency_base(PathModel{4, 3, 0.0, 1.0}) == doctest::Approx(12.0));
  CHECK(latency_base(PathModel{1, 2, 1.0, 1.0}) == doctest::Approx(3.0));
}

TEST_CASE("best-effort latency shrinks with the leftover bandwidth") {
  PathModel m = reference_model();
  CHECK(*latency_be(m, 0.0) == doctest::Approx(latency_base(m)));
  CHECK(*latency_be(m, 0.5) == doctest::Approx(212.0));
  CHECK_FALSE(latency_be(m, 1.0).has_value());  // saturated
  CHECK_FALSE(latency_be(m, 1.5).has_value());
}

TEST_CASE("interleaving scales the channel term by the competitor count") {
  PathModel m = reference_model();
  CHECK(latency_interleave(m, 3) == doctest::Approx(312.0));
  CHECK(latency_interleave(m, 1) == doctest::Approx(latency_base(m)));
  CHECK(latency_interleave(PathModel{4, 3, 0.0, 1.0}, 5) == doctest::Approx(12.0));

  double ratio = latency_interleave(m, 3) / latency_base(m);
  CHECK(ratio >= 2.5);
  CHECK(ratio <= 3.0);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    PathModel random{1 + static_cast<unsigned>(rng() % 8),
                     1 + static_cast<unsigned>(rng() % 4),
                     static_cast<double>(rng() % 500),
                     1.0 + static_cast<double>(rng() % 4)};
    CHECK(latency_interleave(random, 1) == doctest::Approx(latency_base(random)));
    CHECK(*latency_be(random, 0.0) == doctest::Approx(latency_base(random)));
  }
}

TEST_CASE("the load sweep reproduces the crossover shape") {
  PathModel m = reference_model();
  std::vector<double> loads;
  for (int i = 0; i < 100; ++i) loads.push_back(0.01 * i);
  auto curve = sweep_offered_load(m, 3, loads);
  REQUIRE(curve.size() == 100);

  CHECK(*curve[0].be_latency == doctest::Approx(112.0));
  double prev = 0.0;
  for (const CurvePoint& pt : curve) {
    CHECK(pt.interleave_latency == doctest::Approx(312.0));  // zero variance
    REQUIRE(pt.be_latency.has_value());
    CHECK(*pt.be_latency >= prev);
    prev = *pt.be_latency;
    if (pt.offered_load > 2.0 / 3.0) {
      CHECK(*pt.be_latency > pt.interleave_latency);
    }
  }
  CHECK(*curve[99].be_latency > 10000.0);  // divergence toward saturation
}

TEST_CASE("header bound sums two cycles per competitor per hop") {
  CHECK(header_wcl({1, 1, 1, 1}) == 8);
  CHECK(header_wcl({3, 2}) == 10);
  CHECK(header_wcl({}) == 0);
}

TEST_CASE("payload bound covers interleaved same-destination packets") {
  CHECK(payload_wcl(2, 100) == 396);
  CHECK(payload_wcl(5, 1) == 0);
  CHECK(payload_wcl(0, 100) == 0);
}

TEST_CASE("packet bound composes header, payload and buffer terms") {
  WclParams w;
  w.competitors_per_hop = {3, 2};
  w.same_dest_packets = 2;
  w.packet_flits = 100;
  w.buffer_flits = 4;
  CHECK(packet_wcl(w) == 414);  // 10 + 396 + 8

  WclParams minimal;
  minimal.competitors_per_hop = {1};
  minimal.same_dest_packets = 0;
  minimal.packet_flits = 1;
  minimal.buffer_flits = 1;
  CHECK(packet_wcl(minimal) == 4);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 300; ++i) {
    WclParams r;
    unsigned hops = 1 + rng() % 6;
    for (unsigned h = 0; h < hops; ++h) {
      r.competitors_per_hop.push_back(1 + rng() % 8);
    }
    r.same_dest_packets = rng() % 6;
    r.packet_flits = 1 + rng() % 200;
    r.buffer_flits = 1 + rng() % 16;
    // compositional identity
    CHECK(packet_wcl(r) == header_wcl(r.competitors_per_hop) +
                               payload_wcl(r.same_dest_packets, r.packet_flits) +
                               2ull * r.buffer_flits);
    // linear in the buffer depth
    WclParams doubled = r;
    doubled.buffer_flits *= 2;
    CHECK(packet_wcl(doubled) - packet_wcl(r) == 2ull * r.buffer_flits);
  }
}

TEST_CASE("schedule comparison matches the slot enumeration") {
  auto cmp = schedule_compare({4, 3, 2});
  REQUIRE(cmp.wormhole.size() == 3);
  CHECK(cmp.wormhole == std::vector<std::uint64_t>{4, 7, 9});
  CHECK(cmp.interleave == std::vector<std::uint64_t>{9, 8, 6});

  auto solo = schedule_compare({7});
  CHECK(solo.wormhole[0] == 7);
  CHECK(solo.interleave[0] == 7);

  // equal sizes: the first-priority packet finishes no earlier when interleaved
  auto equal = schedule_compare({2, 2, 2});
  CHECK(equal.interleave[0] >= equal.wormhole[0]);
}

TEST_CASE("interleaving favors the lowest-priority packet") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<unsigned> lengths(1 + rng() % 8);
    for (auto& len : lengths) len = 1 + rng() % 32;
    auto cmp = schedule_compare(lengths);

    // wormhole completions are the prefix sums
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      sum += lengths[i];
      REQUIRE(cmp.wormhole[i] == sum);
    }

    std::size_t last = lengths.size() - 1;
    REQUIRE(cmp.interleave[last] <= cmp.wormhole[last]);
    bool earlier_longer = false;
    for (std::size_t i = 0; i < last; ++i) {
      if (lengths[i] > lengths[last]) earlier_longer = true;
    }
    if (earlier_longer) REQUIRE(cmp.interleave[last] < cmp.wormhole[last]);
  }
}

TEST_CASE("transaction latency is the plain sum of its parts") {
  CHECK(transaction_latency(TransactionModel{}) == 0);
  TransactionModel t{1, 2, 3, 4, 5};
  CHECK(t.network_part() == 10);
  CHECK(transaction_latency(t) == 15);
  TransactionModel request_only{1, 2, 0, 0, 0};
  CHECK(request_only.network_part() == 3);
}

TEST_CASE("bound inputs derived from two fully crossing flows") {
  NetworkParams params;
  params.coord_bits = 1;
  params.data_bits = 8;
  params.buffer_flits = 4;
  std::vector<FlowSpec> flows{
      quick_flow(0, Address{0, 0, 1}, Address{1, 1, 3}, 10),
      quick_flow(1, Address{0, 0, 5}, Address{1, 1, 5}, 10),
  };
  auto per_flow = derive_wcl_params(params, flows);
  REQUIRE(per_flow.size() == 2);

  // both flows run (0,0) -> (1,0) -> (1,1); the two mesh channels are shared,
  // the first and last hops are not
  const WclParams& w0 = per_flow[0];
  REQUIRE(w0.competitors_per_hop.size() == 3);
  CHECK(w0.competitors_per_hop[0] == 2);  // east channel out of (0,0)
  CHECK(w0.competitors_per_hop[1] == 2);  // north channel out of (1,0)
  CHECK(w0.competitors_per_hop[2] == 1);  // local ports differ
  CHECK(w0.same_dest_packets == 1);       // same destination router
  CHECK(w0.packet_flits == 10);
  CHECK(w0.buffer_flits == 4);
}

TEST_CASE("validating an empty result yields an empty report") {
  SimResult empty;
  BoundReport report = validate_bound(empty, {});
  CHECK(report.checks.empty());
  CHECK(report.violations == 0);
}

TEST_CASE("an uncontended flow sits inside its bound") {
  NetworkParams params;
  params.coord_bits = 1;
  params.data_bits = 8;
  params.buffer_flits = 1;
  FlowSpec flow = quick_flow(0, Address{0, 0, 1}, Address{1, 0, 3}, 2);

  Network net = build_network(params, TopologySpec{}, {flow});
  SimResult res = net.run(StopCondition{std::nullopt, true});
  REQUIRE(res.records.size() == 1);

  // header side of the bound: one competitor per hop plus both buffers
  auto per_flow = derive_wcl_params(params, {flow});
  std::uint64_t header_bound = header_wcl(per_flow[0].competitors_per_hop) +
                               2ull * params.buffer_flits;
  std::uint64_t measured_header =
      res.records[0].header_arrival_cycle - res.records[0].inject_cycle;
  CHECK(measured_header <= header_bound);
}

TEST_CASE("crossing same-destination flows never exceed the bound") {
  std::mt19937_64 seeds(99);
  for (int trial = 0; trial < 10; ++trial) {
    NetworkParams params;
    params.coord_bits = 1;
    params.data_bits = 8;
    params.buffer_flits = 4;
    for (PortId p : {PortId::NN, PortId::SS, PortId::EE, PortId::WW}) {
      params.grant_burst[p] = 0;  // plain round-robin, one flit per turn
    }
    std::vector<FlowSpec> flows{
        quick_flow(0, Address{0, 0, 1}, Address{1, 1, 3}, 12),
        quick_flow(1, Address{0, 0, 5}, Address{1, 1, 3}, 12),
    };
    Network net = build_network(params, TopologySpec{}, flows, seeds());
    SimResult res = net.run(StopCondition{std::nullopt, true});
    REQUIRE(res.records.size() == 2);

    BoundReport report = validate_bound(res, derive_wcl_params(params, flows));
    CHECK(report.violations == 0);
    for (const BoundCheck& check : report.checks) {
      CHECK(check.slack >= 0);
      CHECK_FALSE(check.violated);
    }
  }
}

TEST_CASE("curve and report CSVs carry their schema") {
  auto curve = sweep_offered_load(reference_model(), 3, {0.0, 1.0});
  std::string csv = curve_csv(curve);
  CHECK(csv.find("offered_load,be_latency,interleave_latency,saturated") == 0);
  CHECK(csv.find(",,") != std::string::npos);  // saturated row has an empty cell

  BoundReport report;
  report.checks.push_back(BoundCheck{1, 0, 50, 40, -10, true});
  report.violations = 1;
  std::string rcsv = bound_report_csv(report);
  CHECK(rcsv.find("packet_id,measured,bound,slack,violated") == 0);
  CHECK(rcsv.find("1,50,40,-10,1") != std::string::npos);
}
