#include "cxp/feasibility.hpp"

#include <algorithm>
#include <charconv>
#include <future>
#include <queue>
#include <thread>

#include "cxp/error.hpp"

namespace cxp {

namespace {

std::uint32_t parse_decimal(std::string_view part, std::uint32_t max,
                            const std::string& whole) {
  if (part.empty() || (part.size() > 1 && part.front() == '0')) {
    throw Error(Errc::malformed_prefix, "malformed prefix: " + whole);
  }
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
  if (ec != std::errc{} || ptr != part.data() + part.size() || value > max) {
    throw Error(Errc::malformed_prefix, "malformed prefix: " + whole);
  }
  return value;
}

}  // namespace

Ipv4Prefix parse_prefix(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    throw Error(Errc::malformed_prefix, "malformed prefix: " + text);
  }
  std::string_view quad{text.data(), slash};
  std::string_view len{text.data() + slash + 1, text.size() - slash - 1};

  std::uint32_t address = 0;
  for (int i = 0; i < 4; ++i) {
    const auto dot = quad.find('.');
    if ((i < 3) != (dot != std::string_view::npos)) {
      throw Error(Errc::malformed_prefix, "malformed prefix: " + text);
    }
    const auto part = (i < 3) ? quad.substr(0, dot) : quad;
    address = (address << 8) | parse_decimal(part, 255, text);
    if (i < 3) quad.remove_prefix(dot + 1);
  }

  Ipv4Prefix p;
  p.length = static_cast<int>(parse_decimal(len, 32, text));
  const std::uint32_t mask =
      p.length == 0 ? 0 : ~std::uint32_t{0} << (32 - p.length);
  p.address = address & mask;
  return p;
}

std::string to_string(const Ipv4Prefix& p) {
  std::string out;
  for (int shift = 24; shift >= 0; shift -= 8) {
    out += std::to_string((p.address >> shift) & 0xff);
    out += shift == 0 ? '/' : '.';
  }
  out += std::to_string(p.length);
  return out;
}

void IntervalSet::insert(std::uint64_t begin, std::uint64_t end) {
  if (begin >= end) return;
  // first existing interval that overlaps or is adjacent on the left
  auto first = std::lower_bound(
      intervals_.begin(), intervals_.end(), begin,
      [](const auto& iv, std::uint64_t b) { return iv.second < b; });
  auto last = first;
  while (last != intervals_.end() && last->first <= end) {
    begin = std::min(begin, last->first);
    end = std::max(end, last->second);
    size_ -= last->second - last->first;
    ++last;
  }
  auto pos = intervals_.erase(first, last);
  intervals_.insert(pos, {begin, end});
  size_ += end - begin;
}

void IntervalSet::insert(const Ipv4Prefix& p) {
  const std::uint64_t span = std::uint64_t{1} << (32 - p.length);
  insert(p.address, p.address + span);
}

void IntervalSet::merge(const IntervalSet& other) {
  for (const auto& [begin, end] : other.intervals()) insert(begin, end);
}

IntervalSet prefix_union(const std::vector<Ipv4Prefix>& prefixes) {
  IntervalSet set;
  for (const auto& p : prefixes) set.insert(p);
  return set;
}

std::set<Asn> expand_customer_cone(const CoverageDataset& dataset,
                                   const std::set<Asn>& asns) {
  std::set<Asn> cone = asns;
  for (const auto& [provider, customer] : dataset.relationships) {
    // membership test against the input set, not the growing cone: one hop
    if (asns.contains(provider)) cone.insert(customer);
  }
  return cone;
}

PathletMap build_pathlet_map(const CoverageDataset& dataset) {
  PathletMap map;
  for (const auto& [ixp, members] : dataset.memberships) map.nodes.insert(ixp);
  for (auto a = dataset.memberships.begin(); a != dataset.memberships.end(); ++a) {
    for (auto b = std::next(a); b != dataset.memberships.end(); ++b) {
      std::vector<Asn> joint;
      std::ranges::set_intersection(a->second, b->second, std::back_inserter(joint));
      for (const Asn asn : joint) map.edges.push_back({a->first, b->first, asn});
    }
  }
  return map;
}

std::vector<CoveragePoint> coverage_curve(const CoverageDataset& dataset, int k,
                                          bool include_cone) {
  if (k < 1 || std::cmp_greater(k, dataset.memberships.size())) {
    throw Error(Errc::infeasible,
                "coverage rank k=" + std::to_string(k) + " outside [1, " +
                    std::to_string(dataset.memberships.size()) + "]");
  }

  std::map<IxpId, IntervalSet> reach;
  for (const auto& [ixp, members] : dataset.memberships) {
    const std::set<Asn> asns =
        include_cone ? expand_customer_cone(dataset, members) : members;
    IntervalSet set;
    for (const Asn asn : asns) {
      if (auto it = dataset.originations.find(asn); it != dataset.originations.end()) {
        for (const auto& p : it->second) set.insert(p);
      }
    }
    reach.emplace(ixp, std::move(set));
  }

  std::vector<CoveragePoint> curve;
  IntervalSet covered;
  std::set<IxpId> chosen;
  for (int step = 0; step < k; ++step) {
    const IxpId* best = nullptr;
    std::uint64_t best_gain = 0;
    for (const auto& [ixp, set] : reach) {
      if (chosen.contains(ixp)) continue;
      // an IXP cannot add more than its own reach; equal bounds cannot
      // beat the incumbent because ties keep the earlier (smaller) id
      if (best != nullptr && set.size() <= best_gain) continue;
      IntervalSet merged = covered;
      merged.merge(set);
      const std::uint64_t gain = merged.size() - covered.size();
      if (best == nullptr || gain > best_gain) {
        best = &ixp;
        best_gain = gain;
      }
    }
    covered.merge(reach.at(*best));
    chosen.insert(*best);
    curve.push_back({*best, covered.size()});
  }
  return curve;
}

namespace {

struct Arc {
  int to;
  std::int64_t cap;
  std::size_t rev;  // index of the opposing arc in adj[to]
};

}  // namespace

MaxFlowResult max_flow_details(const PathletMap& map, const IxpId& a, const IxpId& b) {
  for (const IxpId* id : {&a, &b}) {
    if (!map.nodes.contains(*id)) {
      throw Error(Errc::unknown_ixp, "unknown IXP: " + id->value);
    }
  }
  if (a == b) {
    throw Error(Errc::infeasible, "min-cut endpoints coincide: " + a.value);
  }

  std::map<IxpId, int> index;
  std::vector<IxpId> nodes;
  for (const IxpId& id : map.nodes) {
    index.emplace(id, static_cast<int>(nodes.size()));
    nodes.push_back(id);
  }

  // condense parallel edges; an undirected edge of capacity c becomes a
  // pair of opposing arcs with capacity c each, net flow = (rev - fwd) / 2
  std::map<std::pair<int, int>, std::int64_t> multiplicity;
  for (const auto& e : map.edges) {
    if (e.a == e.b) continue;  // self-edges carry no flow
    ++multiplicity[{index.at(e.a), index.at(e.b)}];
  }
  std::vector<std::vector<Arc>> adj(nodes.size());
  std::map<std::pair<int, int>, std::pair<std::size_t, std::size_t>> arc_at;
  for (const auto& [pair, count] : multiplicity) {
    const auto [u, v] = pair;
    arc_at[pair] = {adj[u].size(), adj[v].size()};
    adj[u].push_back({v, count, adj[v].size()});
    adj[v].push_back({u, count, adj[u].size() - 1});
  }

  const int source = index.at(a);
  const int sink = index.at(b);
  MaxFlowResult result;

  std::vector<std::pair<int, std::size_t>> parent(nodes.size());
  while (true) {
    std::ranges::fill(parent, std::pair{-1, std::size_t{0}});
    parent[source].first = source;
    std::queue<int> queue;
    queue.push(source);
    while (!queue.empty() && parent[sink].first < 0) {
      const int u = queue.front();
      queue.pop();
      for (std::size_t i = 0; i < adj[u].size(); ++i) {
        const Arc& arc = adj[u][i];
        if (arc.cap <= 0 || parent[arc.to].first >= 0) continue;
        parent[arc.to] = {u, i};
        queue.push(arc.to);
      }
    }
    if (parent[sink].first < 0) break;

    std::int64_t bottleneck = std::numeric_limits<std::int64_t>::max();
    for (int v = sink; v != source;) {
      const auto [u, i] = parent[v];
      bottleneck = std::min(bottleneck, adj[u][i].cap);
      v = u;
    }
    for (int v = sink; v != source;) {
      const auto [u, i] = parent[v];
      adj[u][i].cap -= bottleneck;
      adj[adj[u][i].to][adj[u][i].rev].cap += bottleneck;
      v = u;
    }
    result.value += bottleneck;
  }

  // expand condensed net flow back onto the original parallel edges
  std::map<std::pair<int, int>, std::int64_t> net;
  for (const auto& [pair, idx] : arc_at) {
    const auto [u, v] = pair;
    net[pair] = (adj[v][idx.second].cap - adj[u][idx.first].cap) / 2;
  }
  result.net_flow.assign(map.edges.size(), 0);
  for (std::size_t i = 0; i < map.edges.size(); ++i) {
    const auto& e = map.edges[i];
    if (e.a == e.b) continue;
    auto& remaining = net.at({index.at(e.a), index.at(e.b)});
    if (remaining > 0) {
      result.net_flow[i] = 1;
      --remaining;
    } else if (remaining < 0) {
      result.net_flow[i] = -1;
      ++remaining;
    }
  }

  std::vector<char> seen(nodes.size(), 0);
  std::queue<int> queue;
  queue.push(source);
  seen[source] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    result.source_side.insert(nodes[u]);
    for (const Arc& arc : adj[u]) {
      if (arc.cap > 0 && !seen[arc.to]) {
        seen[arc.to] = 1;
        queue.push(arc.to);
      }
    }
  }
  return result;
}

std::int64_t min_cut_diversity(const PathletMap& map, const IxpId& a, const IxpId& b) {
  return max_flow_details(map, a, b).value;
}

DiversityMatrix diversity_matrix(const PathletMap& map, const std::vector<IxpId>& ixps) {
  for (const IxpId& id : ixps) {
    if (!map.nodes.contains(id)) {
      throw Error(Errc::unknown_ixp, "unknown IXP: " + id.value);
    }
  }

  DiversityMatrix matrix;
  matrix.ixps = ixps;
  matrix.values.assign(ixps.size(), std::vector<std::int64_t>(ixps.size(), -1));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ixps.size(); ++i) {
    for (std::size_t j = i + 1; j < ixps.size(); ++j) pairs.emplace_back(i, j);
  }
  if (pairs.empty()) return matrix;

  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), pairs.size());
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t p = w; p < pairs.size(); p += workers) {
        const auto [i, j] = pairs[p];
        const std::int64_t value = min_cut_diversity(map, ixps[i], ixps[j]);
        matrix.values[i][j] = value;
        matrix.values[j][i] = value;
      }
    }));
  }
  for (auto& task : tasks) task.get();
  return matrix;
}

}  // namespace cxp
