#include "cxp/stitch.hpp"

#include <algorithm>
#include <deque>
#include <optional>

#include "cxp/error.hpp"

namespace cxp {
namespace {

struct Label {
  double delay_sum = 0.0;  // left-to-right sum of member delays (search view)
  int hops = 0;
  std::vector<std::string> ids;
  IxpId at;
};

double label_total(const Label& l, double switching) {
  if (l.hops == 0) return 0.0;
  return l.delay_sum + switching * static_cast<double>(l.hops - 1);
}

// total delay, then fewer pathlets, then lexicographic id sequence
struct LabelOrder {
  double switching;
  bool operator()(const Label& a, const Label& b) const {
    double ta = label_total(a, switching);
    double tb = label_total(b, switching);
    if (ta != tb) return ta < tb;
    if (a.hops != b.hops) return a.hops < b.hops;
    if (a.ids != b.ids) return a.ids < b.ids;
    return a.at < b.at;
  }
};

struct Graph {
  // out-edges per IXP, sorted by pathlet id for deterministic expansion
  std::map<IxpId, std::vector<const Pathlet*>> out;
};

Graph build_graph(const VirtualTopology& t, const DelayView& view,
                  const std::set<std::string>& extra_excluded,
                  std::optional<double> min_residual) {
  Graph g;
  for (const auto& [id, p] : t.pathlets()) {
    if (view.excluded.contains(id) || extra_excluded.contains(id)) continue;
    if (min_residual && t.residual_bw(id) < *min_residual) continue;
    g.out[p.ingress].push_back(&p);
  }
  return g;
}

double view_delay(const Pathlet& p, const DelayView& view) {
  auto it = view.delay_override.find(p.id);
  return it == view.delay_override.end() ? p.advertised_delay_ms : it->second;
}

bool reachable(const Graph& g, const IxpId& src, const IxpId& dst) {
  std::set<IxpId> seen{src};
  std::deque<IxpId> frontier{src};
  while (!frontier.empty()) {
    IxpId u = frontier.front();
    frontier.pop_front();
    if (u == dst) return true;
    auto it = g.out.find(u);
    if (it == g.out.end()) continue;
    for (const Pathlet* p : it->second) {
      if (seen.insert(p->egress).second) frontier.push_back(p->egress);
    }
  }
  return false;
}

// Deterministic label-setting search for the minimal label from src to dst.
// Interior nodes of any candidate path are settled nodes, so every produced
// path visits each IXP at most once.
std::optional<Label> min_delay_path(const Graph& g, const IxpId& src, const IxpId& dst,
                                    const DelayView& view, double switching) {
  LabelOrder order{switching};
  std::set<Label, LabelOrder> frontier(order);
  std::set<IxpId> settled;
  frontier.insert(Label{0.0, 0, {}, src});
  while (!frontier.empty()) {
    Label l = *frontier.begin();
    frontier.erase(frontier.begin());
    if (!settled.insert(l.at).second) continue;
    if (l.at == dst) return l;
    auto it = g.out.find(l.at);
    if (it == g.out.end()) continue;
    for (const Pathlet* p : it->second) {
      if (settled.contains(p->egress)) continue;
      Label next;
      next.delay_sum = l.delay_sum + view_delay(*p, view);
      next.hops = l.hops + 1;
      next.ids = l.ids;
      next.ids.push_back(p->id);
      next.at = p->egress;
      frontier.insert(std::move(next));
    }
  }
  return std::nullopt;
}

void require_valid(const VirtualTopology& t, const ServiceRequest& r) {
  auto violations = validate_request(r);
  if (!violations.empty()) {
    std::string msg = "request '" + r.id + "':";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error(Errc::invalid_request, msg);
  }
  if (!t.ixps().contains(r.src)) throw Error(Errc::unknown_ixp, "src '" + r.src.value + "'");
  if (!t.ixps().contains(r.dst)) throw Error(Errc::unknown_ixp, "dst '" + r.dst.value + "'");
}

EmbeddedPath make_embedded(const VirtualTopology& t, const ServiceRequest& r,
                           const StitchPolicy& policy, const Label& l) {
  EmbeddedPath path;
  path.request_id = r.id;
  path.pathlet_ids = l.ids;
  path.reserved_bw_mbps = r.min_bw_mbps;
  auto members = t.member_pathlets(l.ids);
  path.path_delay_ms = path_delay(members, policy.switching_delay_ms);
  return path;
}

// Search under bandwidth filter + view; classifies failures.
StitchResult stitch_one(const VirtualTopology& t, const ServiceRequest& r,
                        const StitchPolicy& policy, const DelayView& view,
                        const std::set<std::string>& extra_excluded) {
  Graph structural = build_graph(t, view, extra_excluded, std::nullopt);
  if (!reachable(structural, r.src, r.dst)) return RejectionReason::Disconnected;

  Graph filtered = build_graph(t, view, extra_excluded, r.min_bw_mbps);
  auto best = min_delay_path(filtered, r.src, r.dst, view, policy.switching_delay_ms);
  if (!best) return RejectionReason::BandwidthInfeasible;
  if (label_total(*best, policy.switching_delay_ms) > r.max_delay_ms) {
    return RejectionReason::DelayInfeasible;
  }
  return make_embedded(t, r, policy, *best);
}

std::set<std::string> disjointness_conflicts(const VirtualTopology& t,
                                             const std::vector<std::string>& primary_ids) {
  std::set<std::string> excluded(primary_ids.begin(), primary_ids.end());
  std::set<std::string> groups;
  for (const auto& id : primary_ids) {
    if (auto g = t.pathlet(id).disjointness_group) groups.insert(*g);
  }
  if (!groups.empty()) {
    for (const auto& [id, p] : t.pathlets()) {
      if (p.disjointness_group && groups.contains(*p.disjointness_group)) excluded.insert(id);
    }
  }
  return excluded;
}

StitchResult stitch_for(const VirtualTopology& t, const ServiceRequest& r,
                        const StitchPolicy& policy, const DelayView& view,
                        const std::set<std::string>& extra_excluded) {
  if (!r.want_backup) return stitch_one(t, r, policy, view, extra_excluded);

  StitchResult primary = stitch_one(t, r, policy, view, extra_excluded);
  if (std::holds_alternative<RejectionReason>(primary)) return primary;
  EmbeddedPath path = std::get<EmbeddedPath>(primary);

  std::set<std::string> backup_excluded = disjointness_conflicts(t, path.pathlet_ids);
  backup_excluded.insert(extra_excluded.begin(), extra_excluded.end());
  StitchResult backup = stitch_one(t, r, policy, view, backup_excluded);
  if (std::holds_alternative<RejectionReason>(backup)) {
    return RejectionReason::NoDisjointBackup;
  }
  path.backup_pathlet_ids = std::get<EmbeddedPath>(backup).pathlet_ids;
  return path;
}

}  // namespace

StitchResult stitch_path(const VirtualTopology& t, const ServiceRequest& r,
                         const StitchPolicy& policy, const DelayView& view) {
  require_valid(t, r);
  return stitch_one(t, r, policy, view, {});
}

StitchResult stitch_with_backup(const VirtualTopology& t, const ServiceRequest& r,
                                const StitchPolicy& policy, const DelayView& view) {
  require_valid(t, r);
  ServiceRequest rb = r;
  rb.want_backup = true;
  return stitch_for(t, rb, policy, view, {});
}

AdmitResult admit(VirtualTopology& t, const ServiceRequest& r, const StitchPolicy& policy) {
  require_valid(t, r);
  StitchResult s = stitch_for(t, r, policy, {}, {});
  if (auto* path = std::get_if<EmbeddedPath>(&s)) {
    t.reserve(r, *path);
    return Admission{*path, 0};
  }
  RejectionReason reason = std::get<RejectionReason>(s);
  if (reason == RejectionReason::BandwidthInfeasible && policy.migration_budget > 0) {
    return migrate_for_admission(t, r, policy);
  }
  return reason;
}

AdmitResult migrate_for_admission(VirtualTopology& t, const ServiceRequest& r,
                                  const StitchPolicy& policy) {
  require_valid(t, r);

  // tolerate being called when no migration is needed
  StitchResult plain = stitch_for(t, r, policy, {}, {});
  if (auto* path = std::get_if<EmbeddedPath>(&plain)) {
    t.reserve(r, *path);
    return Admission{*path, 0};
  }
  if (std::get<RejectionReason>(plain) != RejectionReason::BandwidthInfeasible) {
    return std::get<RejectionReason>(plain);
  }

  // best infeasible candidate: the delay-minimal sequence ignoring bandwidth;
  // if even that busts the bound, freeing capacity cannot help
  Graph structural = build_graph(t, {}, {}, std::nullopt);
  auto candidate = min_delay_path(structural, r.src, r.dst, {}, policy.switching_delay_ms);
  if (!candidate || label_total(*candidate, policy.switching_delay_ms) > r.max_delay_ms) {
    return RejectionReason::BandwidthInfeasible;
  }

  std::set<std::string> bottlenecks;
  for (const auto& id : candidate->ids) {
    if (t.residual_bw(id) < r.min_bw_mbps) bottlenecks.insert(id);
  }

  // blockers: live embeddings holding bandwidth on a bottleneck,
  // ordered by descending reserved bandwidth, then request id
  std::vector<const Reservation*> blockers;
  for (const auto& [rid, res] : t.reservations()) {
    for (const auto& member : reserved_member_ids(res, t.backup_policy())) {
      if (bottlenecks.contains(member)) {
        blockers.push_back(&res);
        break;
      }
    }
  }
  std::sort(blockers.begin(), blockers.end(), [](const Reservation* a, const Reservation* b) {
    if (a->path.reserved_bw_mbps != b->path.reserved_bw_mbps) {
      return a->path.reserved_bw_mbps > b->path.reserved_bw_mbps;
    }
    return a->request.id < b->request.id;
  });
  if (blockers.size() > static_cast<std::size_t>(policy.migration_budget)) {
    blockers.resize(static_cast<std::size_t>(policy.migration_budget));
  }

  for (const Reservation* blocker : blockers) {
    VirtualTopology scratch = t;
    const ServiceRequest moved = blocker->request;

    // the alternative must vacate every bottleneck and is checked against
    // residuals that still include the blocker (make-before-break)
    StitchResult alt = stitch_for(scratch, moved, policy, {}, bottlenecks);
    auto* alt_path = std::get_if<EmbeddedPath>(&alt);
    if (!alt_path) continue;

    scratch.release(moved.id);
    scratch.reserve(moved, *alt_path);

    StitchResult retry = stitch_for(scratch, r, policy, {}, {});
    if (auto* admitted = std::get_if<EmbeddedPath>(&retry)) {
      scratch.reserve(r, *admitted);
      t = std::move(scratch);
      return Admission{*admitted, 1};
    }
  }
  return RejectionReason::BandwidthInfeasible;
}

}  // namespace cxp
