#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cxp/pathlet.hpp"

namespace cxp {

/// IPv4 prefix in host byte order; host bits below the mask are zero.
struct Ipv4Prefix {
  std::uint32_t address = 0;
  int length = 0;  // 0..32
  auto operator<=>(const Ipv4Prefix&) const = default;
};

/// Parses "a.b.c.d/len"; host bits are masked off. Throws MalformedPrefix.
Ipv4Prefix parse_prefix(const std::string& text);
std::string to_string(const Ipv4Prefix& p);

/// Canonical set of half-open address intervals over [0, 2^32): sorted,
/// pairwise disjoint, maximally merged. Exact union arithmetic, so
/// overlapping originations are never double-counted.
class IntervalSet {
 public:
  void insert(std::uint64_t begin, std::uint64_t end);
  void insert(const Ipv4Prefix& p);
  void merge(const IntervalSet& other);

  /// Number of distinct addresses covered.
  std::uint64_t size() const { return size_; }
  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& intervals() const {
    return intervals_;
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<std::pair<std::uint64_t, std::uint64_t>> intervals_;
  std::uint64_t size_ = 0;
};

/// Exact merged union of a prefix list.
IntervalSet prefix_union(const std::vector<Ipv4Prefix>& prefixes);

/// IXP memberships, AS prefix originations, and direct provider-customer
/// relations; the inputs of the feasibility pipeline.
struct CoverageDataset {
  std::map<IxpId, std::set<Asn>> memberships;
  std::map<Asn, std::vector<Ipv4Prefix>> originations;
  std::vector<std::pair<Asn, Asn>> relationships;  // (provider, customer)
};

/// The input set plus the direct customers of its members. One hop only.
std::set<Asn> expand_customer_cone(const CoverageDataset& dataset, const std::set<Asn>& asns);

/// Undirected pathlet-map edge: one per joint member AS per IXP pair.
/// Canonical orientation a < b.
struct PathletMapEdge {
  IxpId a;
  IxpId b;
  Asn asn;
  auto operator<=>(const PathletMapEdge&) const = default;
};

struct PathletMap {
  std::set<IxpId> nodes;
  std::vector<PathletMapEdge> edges;  // sorted, no duplicates, no self-edges
  friend bool operator==(const PathletMap&, const PathletMap&) = default;
};

/// For each unordered IXP pair, one edge per AS that is a member of both.
PathletMap build_pathlet_map(const CoverageDataset& dataset);

struct CoveragePoint {
  IxpId ixp;
  std::uint64_t cumulative_addresses = 0;
  friend bool operator==(const CoveragePoint&, const CoveragePoint&) = default;
};

/// Greedy weighted max-coverage over address space: each step picks the IXP
/// whose members (optionally expanded by their 1-hop customer cone) add the
/// largest marginal address-union gain; ties by lexicographic IXP id.
/// Returns k points with non-decreasing cumulative counts.
/// Throws Infeasible unless 1 <= k <= number of IXPs.
std::vector<CoveragePoint> coverage_curve(const CoverageDataset& dataset, int k,
                                          bool include_cone);

struct MaxFlowResult {
  std::int64_t value = 0;
  // per map.edges index: +1 used a->b, -1 used b->a, 0 unused
  std::vector<int> net_flow;
  // nodes reachable from the source in the final residual graph
  std::set<IxpId> source_side;
};

/// Unit-capacity max-flow between two IXPs over the pathlet map, computed
/// with breadth-first augmenting paths; undirected edges act as opposing
/// unit arcs. Exposes per-edge flow and the residual cut for verification.
/// Throws UnknownIxp, or Infeasible when a equals b.
MaxFlowResult max_flow_details(const PathletMap& map, const IxpId& a, const IxpId& b);

/// Maximum number of edge-disjoint paths between a and b (= min edge cut).
std::int64_t min_cut_diversity(const PathletMap& map, const IxpId& a, const IxpId& b);

/// Pairwise diversity over the given IXPs; -1 marks the absent diagonal.
/// Symmetric by construction. Independent pairs are computed concurrently.
struct DiversityMatrix {
  std::vector<IxpId> ixps;
  std::vector<std::vector<std::int64_t>> values;
  friend bool operator==(const DiversityMatrix&, const DiversityMatrix&) = default;
};

DiversityMatrix diversity_matrix(const PathletMap& map, const std::vector<IxpId>& ixps);

}  // namespace cxp
