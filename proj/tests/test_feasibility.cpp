#include <cmath>
#include <random>

#include "doctest.h"

#include "cxp/error.hpp"
#include "cxp/feasibility.hpp"
#include "support/oracles.hpp"

using namespace cxp;

namespace {

// Three IXPs over four ASes: IXA and IXB host everyone, IXC hosts only the
// small AS that also has a one-hop customer.
CoverageDataset toy_dataset() {
  CoverageDataset d;
  d.memberships[IxpId{"IXA"}] = {Asn{65001}, Asn{65002}, Asn{65003}};
  d.memberships[IxpId{"IXB"}] = {Asn{65001}, Asn{65002}, Asn{65003}};
  d.memberships[IxpId{"IXC"}] = {Asn{65003}};
  d.originations[Asn{65001}] = {parse_prefix("10.0.0.0/8")};
  d.originations[Asn{65002}] = {parse_prefix("11.0.0.0/8")};
  d.originations[Asn{65003}] = {parse_prefix("12.0.0.0/16")};
  d.originations[Asn{65010}] = {parse_prefix("13.0.0.0/16")};
  d.relationships = {{Asn{65003}, Asn{65010}}};
  return d;
}

constexpr std::uint64_t kSlash8 = 1ull << 24;
constexpr std::uint64_t kSlash16 = 1ull << 16;

}  // namespace

TEST_CASE("prefix parsing round-trips and masks host bits") {
  const auto p = parse_prefix("10.0.0.0/8");
  CHECK(p.address == 0x0A000000u);
  CHECK(p.length == 8);
  CHECK(to_string(p) == "10.0.0.0/8");
  CHECK(to_string(parse_prefix("10.1.2.3/16")) == "10.1.0.0/16");
  CHECK(to_string(parse_prefix("255.255.255.255/32")) == "255.255.255.255/32");
  CHECK(to_string(parse_prefix("1.2.3.4/0")) == "0.0.0.0/0");
}

TEST_CASE("malformed prefixes are rejected with the offending text") {
  for (const char* bad : {"", "10.0.0/8", "10.0.0.0", "10.0.0.0/33", "a.b.c.d/8", "10.00.0.0/8",
                          "256.0.0.0/8", "10.0.0.0/-1", "10.0.0.0/8x", "10.0.0.0//8"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_prefix(bad), Error);
    try {
      parse_prefix(bad);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::malformed_prefix);
      if (*bad != '\0') CHECK(std::string(e.what()).find(bad) != std::string::npos);
    }
  }
}

TEST_CASE("interval insertion merges overlap and adjacency") {
  IntervalSet s;
  s.insert(0, 10);
  CHECK(s.size() == 10);
  s.insert(5, 7);
  CHECK(s.size() == 10);
  CHECK(s.intervals().size() == 1);
  s.insert(20, 30);
  CHECK(s.size() == 20);
  CHECK(s.intervals().size() == 2);
  s.insert(10, 20);
  CHECK(s.size() == 30);
  CHECK(s.intervals().size() == 1);
  CHECK(s.intervals().front() == std::pair<std::uint64_t, std::uint64_t>{0, 30});
}

TEST_CASE("a prefix union never double-counts contained prefixes") {
  const auto u = prefix_union({parse_prefix("10.0.0.0/8"), parse_prefix("10.1.0.0/16")});
  CHECK(u.size() == kSlash8);
}

TEST_CASE("two half-spaces cover the whole 2^32 address space") {
  const auto u = prefix_union({parse_prefix("0.0.0.0/1"), parse_prefix("128.0.0.0/1")});
  CHECK(u.size() == 1ull << 32);
  CHECK(u.intervals().size() == 1);
}

TEST_CASE("interval union sizes agree with a bitset over a /16") {
  using namespace cxp::test;
  std::mt19937_64 rng(31);
  const std::uint32_t base = 0x0A640000u;  // 10.100.0.0
  for (int round = 0; round < 50; ++round) {
    const auto prefixes = random_prefixes(rng, 20, base);
    CHECK(prefix_union(prefixes).size() == bitset_union_size(prefixes, base));
  }
}

TEST_CASE("customer-cone expansion is one hop") {
  CoverageDataset d;
  d.relationships = {{Asn{65003}, Asn{65010}}, {Asn{65010}, Asn{65020}}};
  const auto cone = expand_customer_cone(d, {Asn{65003}});
  CHECK(cone == std::set<Asn>{Asn{65003}, Asn{65010}});
  const auto deeper = expand_customer_cone(d, {Asn{65010}});
  CHECK(deeper == std::set<Asn>{Asn{65010}, Asn{65020}});
}

TEST_CASE("the pathlet map has one edge per shared member AS") {
  const auto map = build_pathlet_map(toy_dataset());
  CHECK(map.nodes == std::set<IxpId>{IxpId{"IXA"}, IxpId{"IXB"}, IxpId{"IXC"}});
  const std::vector<PathletMapEdge> expected{
      {IxpId{"IXA"}, IxpId{"IXB"}, Asn{65001}},
      {IxpId{"IXA"}, IxpId{"IXB"}, Asn{65002}},
      {IxpId{"IXA"}, IxpId{"IXB"}, Asn{65003}},
      {IxpId{"IXA"}, IxpId{"IXC"}, Asn{65003}},
      {IxpId{"IXB"}, IxpId{"IXC"}, Asn{65003}},
  };
  CHECK(map.edges == expected);
}

TEST_CASE("the toy coverage curve is exact with and without the cone") {
  const auto d = toy_dataset();
  const auto plain = coverage_curve(d, 3, false);
  REQUIRE(plain.size() == 3);
  CHECK(plain[0] == CoveragePoint{IxpId{"IXA"}, 2 * kSlash8 + kSlash16});
  CHECK(plain[1] == CoveragePoint{IxpId{"IXB"}, 2 * kSlash8 + kSlash16});
  CHECK(plain[2] == CoveragePoint{IxpId{"IXC"}, 2 * kSlash8 + kSlash16});

  const auto coned = coverage_curve(d, 3, true);
  CHECK(coned[0] == CoveragePoint{IxpId{"IXA"}, 2 * kSlash8 + 2 * kSlash16});
  CHECK(coned[2].cumulative_addresses == 2 * kSlash8 + 2 * kSlash16);
}

TEST_CASE("zero-gain ties fall back to lexicographic IXP order") {
  const auto plain = coverage_curve(toy_dataset(), 3, false);
  CHECK(plain[1].ixp == IxpId{"IXB"});
  CHECK(plain[2].ixp == IxpId{"IXC"});
}

TEST_CASE("a rank outside the IXP count is infeasible") {
  for (int k : {0, -1, 4}) {
    CAPTURE(k);
    try {
      coverage_curve(toy_dataset(), k, false);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::infeasible);
    }
  }
}

TEST_CASE("greedy coverage matches the optimum at k=1 and stays near it after") {
  using namespace cxp::test;
  std::mt19937_64 rng(77);
  const std::uint32_t base = 0x0A640000u;
  for (int round = 0; round < 30; ++round) {
    CoverageDataset d;
    std::vector<IntervalSet> sets;
    const int n = 3 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const Asn asn{static_cast<std::uint32_t>(65101 + i)};
      const auto prefixes = random_prefixes(rng, 1 + static_cast<int>(rng() % 8), base);
      d.memberships[IxpId{"I" + std::to_string(i)}] = {asn};
      d.originations[asn] = prefixes;
      sets.push_back(prefix_union(prefixes));
    }
    for (int k = 1; k <= std::min(n, 4); ++k) {
      const auto curve = coverage_curve(d, k, false);
      const double greedy = static_cast<double>(curve.back().cumulative_addresses);
      const double optimum = static_cast<double>(best_coverage(sets, k));
      if (k == 1) {
        CHECK(greedy == optimum);
      } else {
        CHECK(greedy >= (1.0 - 1.0 / std::exp(1.0)) * optimum - 1e-6);
        CHECK(greedy <= optimum);
      }
    }
  }
}

TEST_CASE("parallel shared-AS edges each contribute a disjoint path") {
  CoverageDataset d;
  d.memberships[IxpId{"A"}] = {Asn{1}, Asn{2}, Asn{3}};
  d.memberships[IxpId{"B"}] = {Asn{1}, Asn{2}, Asn{3}};
  const auto map = build_pathlet_map(d);
  CHECK(min_cut_diversity(map, IxpId{"A"}, IxpId{"B"}) == 3);
}

TEST_CASE("disconnected IXPs have zero diversity and a one-sided cut") {
  PathletMap map;
  map.nodes = {IxpId{"A"}, IxpId{"B"}};
  const auto result = max_flow_details(map, IxpId{"A"}, IxpId{"B"});
  CHECK(result.value == 0);
  CHECK(result.source_side.contains(IxpId{"A"}));
  CHECK_FALSE(result.source_side.contains(IxpId{"B"}));
}

TEST_CASE("the toy map's pairwise diversity matches hand counts") {
  const auto map = build_pathlet_map(toy_dataset());
  CHECK(min_cut_diversity(map, IxpId{"IXA"}, IxpId{"IXB"}) == 4);
  CHECK(min_cut_diversity(map, IxpId{"IXA"}, IxpId{"IXC"}) == 2);
  CHECK(min_cut_diversity(map, IxpId{"IXB"}, IxpId{"IXC"}) == 2);
}

TEST_CASE("diversity endpoints must be known and distinct") {
  const auto map = build_pathlet_map(toy_dataset());
  try {
    min_cut_diversity(map, IxpId{"IXA"}, IxpId{"ghost"});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_ixp);
  }
  try {
    min_cut_diversity(map, IxpId{"IXA"}, IxpId{"IXA"});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible);
  }
}

TEST_CASE("flow value, decomposition, and residual cut agree on random maps") {
  using namespace cxp::test;
  std::mt19937_64 rng(4242);
  for (int round = 0; round < 80; ++round) {
    const auto map = random_pathlet_map(rng, 8, 24);
    std::vector<IxpId> nodes(map.nodes.begin(), map.nodes.end());
    const IxpId a = nodes[rng() % nodes.size()];
    IxpId b = nodes[rng() % nodes.size()];
    if (a == b) continue;
    const auto result = max_flow_details(map, a, b);
    const auto check = check_flow(map, a, b, result);
    CAPTURE(check.detail);
    CHECK(check.ok);
    CHECK(result.value == min_cut_diversity(map, a, b));
  }
}

TEST_CASE("the diversity matrix is symmetric with a blank diagonal") {
  const auto map = build_pathlet_map(toy_dataset());
  const std::vector<IxpId> ixps{IxpId{"IXA"}, IxpId{"IXB"}, IxpId{"IXC"}};
  const auto m = diversity_matrix(map, ixps);
  CHECK(m.ixps == ixps);
  REQUIRE(m.values.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(m.values[i].size() == 3);
    CHECK(m.values[i][i] == -1);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(m.values[i][j] == m.values[j][i]);
      if (i != j) CHECK(m.values[i][j] == min_cut_diversity(map, ixps[i], ixps[j]));
    }
  }
}

TEST_CASE("reordering the requested IXPs permutes the matrix accordingly") {
  const auto map = build_pathlet_map(toy_dataset());
  const auto forward =
      diversity_matrix(map, {IxpId{"IXA"}, IxpId{"IXB"}, IxpId{"IXC"}});
  const auto backward =
      diversity_matrix(map, {IxpId{"IXC"}, IxpId{"IXB"}, IxpId{"IXA"}});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(forward.values[i][j] == backward.values[2 - i][2 - j]);
    }
  }
}
