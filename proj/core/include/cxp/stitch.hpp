#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>

#include "cxp/topology.hpp"

namespace cxp {

/// Knobs shared by admission, migration, and monitoring. The path tie-break
/// is fixed and not configurable: minimal delay, then fewer pathlets, then
/// the lexicographically smallest pathlet-id sequence.
struct StitchPolicy {
  double switching_delay_ms = 0.0;
  // max existing embedded paths considered when migration is needed
  int migration_budget = 8;
  // relative slack on advertised guarantees before a Guaranteed pathlet
  // counts as violating (monitoring only)
  double guarantee_tolerance = 0.0;
  BackupReservation backup_reservation = BackupReservation::Full;
};

enum class RejectionReason { Disconnected, BandwidthInfeasible, DelayInfeasible, NoDisjointBackup };

constexpr const char* to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::Disconnected: return "Disconnected";
    case RejectionReason::BandwidthInfeasible: return "BandwidthInfeasible";
    case RejectionReason::DelayInfeasible: return "DelayInfeasible";
    case RejectionReason::NoDisjointBackup: return "NoDisjointBackup";
  }
  return "Unknown";
}

using StitchResult = std::variant<EmbeddedPath, RejectionReason>;

/// Measurement-aware constraints for a stitch: per-pathlet delay overrides
/// (observed instead of advertised) and pathlets excluded from the search.
struct DelayView {
  std::map<std::string, double> delay_override;
  std::set<std::string> excluded;
};

/// Computes a delay-minimal loop-free pathlet sequence from r.src to r.dst
/// whose every member has residual bandwidth >= r.min_bw_mbps, and admits it
/// iff its delay is within r.max_delay_ms. Loop-freedom is at IXP
/// granularity. Pure: does not mutate the topology.
///
/// Rejections: Disconnected when no sequence exists ignoring QoS constraints;
/// BandwidthInfeasible when sequences exist but none passes the bandwidth
/// filter; DelayInfeasible when bandwidth-feasible sequences all exceed the
/// delay bound. Throws UnknownIxp when src or dst is not in the topology.
///
/// When a view is given, the search weighs pathlets by the overridden delays
/// and skips excluded ones; the returned path_delay_ms is always the
/// advertised-delay arithmetic, keeping embeddings comparable.
StitchResult stitch_path(const VirtualTopology& t, const ServiceRequest& r,
                         const StitchPolicy& policy, const DelayView& view = {});

/// stitch_path plus a backup: a delay-minimal bandwidth-feasible sequence
/// sharing no pathlet id and no disjointness group with the primary, also
/// within the delay bound. NoDisjointBackup when a primary exists but no such
/// backup does.
StitchResult stitch_with_backup(const VirtualTopology& t, const ServiceRequest& r,
                                const StitchPolicy& policy, const DelayView& view = {});

struct Admission {
  EmbeddedPath path;
  int migrations = 0;
};

using AdmitResult = std::variant<Admission, RejectionReason>;

/// Stitches and atomically reserves. A BandwidthInfeasible stitch triggers
/// migration (below) before rejecting. Failed admissions leave the topology
/// exactly as it was.
AdmitResult admit(VirtualTopology& t, const ServiceRequest& r, const StitchPolicy& policy);

/// Greedy single-level migration: considers up to policy.migration_budget
/// existing embedded paths that hold bandwidth on the bottleneck pathlets of
/// r's best infeasible candidate (ordered by descending reserved bandwidth,
/// then request id). Each candidate is re-stitched onto an alternative that
/// avoids the bottlenecks and still meets its own QoS; the alternative is
/// checked against current residuals before the old reservation is released
/// (make-before-break). If the freed capacity admits r, both changes commit
/// atomically; otherwise everything rolls back.
AdmitResult migrate_for_admission(VirtualTopology& t, const ServiceRequest& r,
                                  const StitchPolicy& policy);

}  // namespace cxp
