#include <random>
#include <string>
#include <variant>
#include <vector>

#include <benchmark/benchmark.h>

#include "cxp/feasibility.hpp"
#include "cxp/sim.hpp"
#include "cxp/stitch.hpp"
#include "cxp/topology.hpp"

namespace {

using namespace cxp;

VirtualTopology make_topology(std::mt19937_64& rng, int ixps, int pathlets) {
  VirtualTopology t;
  std::uniform_int_distribution<int> pick(0, ixps - 1);
  std::uniform_int_distribution<int> delay16(8, 320);
  std::uniform_int_distribution<int> cap16(160, 1600);
  for (int i = 0; i < pathlets; ++i) {
    Pathlet p;
    p.id = "p" + std::to_string(i);
    p.owner = Asn{static_cast<std::uint32_t>(64500 + i)};
    int from = pick(rng);
    int to = pick(rng);
    while (to == from) to = pick(rng);
    p.ingress = IxpId{"X" + std::to_string(from)};
    p.egress = IxpId{"X" + std::to_string(to)};
    p.advertised_delay_ms = delay16(rng) / 16.0;
    p.capacity_mbps = cap16(rng) / 16.0;
    t.advertise(p);
  }
  return t;
}

ServiceRequest make_request(std::mt19937_64& rng, int ixps, int index) {
  std::uniform_int_distribution<int> pick(0, ixps - 1);
  int from = pick(rng);
  int to = pick(rng);
  while (to == from) to = pick(rng);
  ServiceRequest r;
  r.id = "r" + std::to_string(index);
  r.src = IxpId{"X" + std::to_string(from)};
  r.dst = IxpId{"X" + std::to_string(to)};
  r.min_bw_mbps = 1.0;
  r.max_delay_ms = 80.0;
  return r;
}

void BM_StitchPath(benchmark::State& state) {
  const int ixps = static_cast<int>(state.range(0));
  const int pathlets = ixps * 6;
  std::mt19937_64 rng(11);
  const VirtualTopology t = make_topology(rng, ixps, pathlets);
  std::vector<ServiceRequest> requests;
  for (int i = 0; i < 64; ++i) requests.push_back(make_request(rng, ixps, i));
  std::size_t at = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stitch_path(t, requests[at], {}));
    at = (at + 1) % requests.size();
  }
}
BENCHMARK(BM_StitchPath)->Arg(8)->Arg(16)->Arg(32);

void BM_AdmitRelease(benchmark::State& state) {
  const int ixps = 12;
  std::mt19937_64 rng(13);
  VirtualTopology t = make_topology(rng, ixps, 72);
  int index = 0;
  for (auto _ : state) {
    const ServiceRequest r = make_request(rng, ixps, index++);
    const AdmitResult res = admit(t, r, {});
    if (std::holds_alternative<Admission>(res)) t.release(r.id);
  }
}
BENCHMARK(BM_AdmitRelease);

void BM_MinCut(benchmark::State& state) {
  const int nodes = static_cast<int>(state.range(0));
  std::mt19937_64 rng(17);
  CoverageDataset d;
  std::uniform_int_distribution<std::uint32_t> pick_asn(1, 24);
  for (int i = 0; i < nodes; ++i) {
    auto& members = d.memberships[IxpId{"I" + std::to_string(i)}];
    for (int j = 0; j < 12; ++j) members.insert(Asn{pick_asn(rng)});
  }
  const PathletMap map = build_pathlet_map(d);
  std::vector<IxpId> ids(map.nodes.begin(), map.nodes.end());
  std::size_t at = 0;
  for (auto _ : state) {
    const IxpId& a = ids[at % ids.size()];
    const IxpId& b = ids[(at + 1) % ids.size()];
    benchmark::DoNotOptimize(min_cut_diversity(map, a, b));
    ++at;
  }
}
BENCHMARK(BM_MinCut)->Arg(8)->Arg(16);

void BM_PrefixUnion(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> pick_len(8, 24);
  std::uniform_int_distribution<std::uint32_t> pick_addr;
  std::vector<Ipv4Prefix> prefixes;
  for (int i = 0; i < count; ++i) {
    Ipv4Prefix p;
    p.length = pick_len(rng);
    const std::uint32_t mask = ~((std::uint32_t{1} << (32 - p.length)) - 1);
    p.address = pick_addr(rng) & mask;
    prefixes.push_back(p);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(prefix_union(prefixes).size());
  }
}
BENCHMARK(BM_PrefixUnion)->Arg(256)->Arg(4096);

void BM_SimulateEpochs(benchmark::State& state) {
  Scenario s;
  std::mt19937_64 rng(23);
  const int ixps = 8;
  const VirtualTopology seed = make_topology(rng, ixps, 48);
  for (const auto& [id, p] : seed.pathlets()) s.pathlets.push_back(p);
  for (int i = 0; i < 24; ++i) {
    s.events.push_back({i, Arrival{make_request(rng, ixps, i)}});
  }
  s.events.push_back({30, DelayShock{"p0", 200.0, 20}});
  s.epochs = 64;
  s.rng_seed = 23;
  s.noise = TruncatedGaussian{0.25};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(s, {}).metrics.admitted);
  }
}
BENCHMARK(BM_SimulateEpochs);

}  // namespace

BENCHMARK_MAIN();
