#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cxp/pathlet.hpp"

namespace cxp {

/// Whether a committed backup sequence holds bandwidth (hot standby) or is
/// only recorded for failover planning (cold standby).
enum class BackupReservation { Full, None };

constexpr const char* to_string(BackupReservation b) {
  return b == BackupReservation::Full ? "full" : "none";
}

/// A live embedding: the originating request is kept with the path because
/// migration and violation detection re-check its QoS bounds later.
struct Reservation {
  ServiceRequest request;
  EmbeddedPath path;

  friend bool operator==(const Reservation&, const Reservation&) = default;
};

/// Pathlet ids that hold bandwidth for a reservation under the given policy:
/// the primary members, plus the backup members when backups are hot.
std::vector<std::string> reserved_member_ids(const Reservation& res, BackupReservation policy);

/// The inter-domain virtual topology: a directed multigraph of IXP anchors
/// connected by pathlets, with residual-bandwidth bookkeeping per pathlet.
///
/// Mutation is single-writer; each mutating call checks all preconditions
/// before touching state, so a reserve() is an atomic check-and-reserve and
/// a failed call leaves the topology untouched.
class VirtualTopology {
 public:
  explicit VirtualTopology(BackupReservation backup_policy = BackupReservation::Full)
      : backup_policy_(backup_policy) {}

  /// Adds a validated pathlet with residual equal to its capacity and extends
  /// the IXP set with its endpoints.
  /// Throws InvalidPathlet (listing violations) or DuplicatePathletId.
  void advertise(const Pathlet& p);

  /// Removes a pathlet. Every reservation using it (primary or backup) is
  /// torn down; the ids of the affected requests are returned so the caller
  /// can decide about re-embedding. Endpoint IXPs no longer referenced by any
  /// pathlet are dropped. Throws UnknownPathlet.
  std::vector<std::string> withdraw(const std::string& pathlet_id);

  /// Atomically checks and commits a reservation: every holding member needs
  /// residual >= path.reserved_bw_mbps. Throws UnknownPathlet, ChainError,
  /// InvalidPath, DuplicateRequest, or InsufficientResidual (naming the
  /// bottleneck pathlet); on throw the topology is unchanged.
  void reserve(const ServiceRequest& request, const EmbeddedPath& path);

  /// Releases a reservation, restoring residuals to exactly the values they
  /// had before the matching reserve. Throws UnknownRequest.
  void release(const std::string& request_id);

  bool has_pathlet(const std::string& id) const { return pathlets_.contains(id); }
  const Pathlet& pathlet(const std::string& id) const;
  double residual_bw(const std::string& id) const;

  /// Members of an embedded sequence resolved to pathlets, in path order.
  std::vector<Pathlet> member_pathlets(const std::vector<std::string>& ids) const;

  const std::set<IxpId>& ixps() const { return ixps_; }
  const std::map<std::string, Pathlet>& pathlets() const { return pathlets_; }
  const std::map<std::string, Reservation>& reservations() const { return reservations_; }
  BackupReservation backup_policy() const { return backup_policy_; }

  friend bool operator==(const VirtualTopology&, const VirtualTopology&) = default;

 private:
  void recompute_residual(const std::string& pathlet_id);
  void check_chain(const std::vector<std::string>& ids, const IxpId& src, const IxpId& dst) const;

  BackupReservation backup_policy_;
  std::set<IxpId> ixps_;
  std::map<std::string, Pathlet> pathlets_;
  // per-pathlet holds, keyed by request id; residuals are recomputed from this
  // ledger in key order so releasing a hold restores prior values exactly
  std::map<std::string, std::map<std::string, double>> holds_;
  std::map<std::string, double> residual_;
  std::map<std::string, Reservation> reservations_;
};

}  // namespace cxp
