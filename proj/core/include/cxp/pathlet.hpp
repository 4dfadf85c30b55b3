#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace cxp {

/// Autonomous system number. Valid ASNs are strictly positive.
struct Asn {
  std::uint32_t value = 0;
  auto operator<=>(const Asn&) const = default;
};

/// Opaque IXP identifier, e.g. "LINX". Non-empty for valid entities.
struct IxpId {
  std::string value;
  auto operator<=>(const IxpId&) const = default;
};

/// Provisioning model for a pathlet: best-effort tunnels compensated by
/// measurement-driven rerouting, or tunnels with hard per-segment guarantees.
enum class GuaranteeMode { BestEffort, Guaranteed };

constexpr const char* to_string(GuaranteeMode m) {
  return m == GuaranteeMode::BestEffort ? "best_effort" : "guaranteed";
}

/// An advertised intra-domain partial path between two IXP attachment points,
/// annotated with the QoS attributes its owner commits to.
struct Pathlet {
  std::string id;
  Asn owner;
  IxpId ingress;
  IxpId egress;
  GuaranteeMode mode = GuaranteeMode::BestEffort;
  double advertised_delay_ms = 0.0;
  double capacity_mbps = 0.0;
  std::uint32_t router_hops = 0;
  std::set<std::string> middleboxes;
  // pathlets sharing a group label are treated as non-disjoint (shared risk)
  std::optional<std::string> disjointness_group;

  friend bool operator==(const Pathlet&, const Pathlet&) = default;
};

/// A QoS-constrained end-to-end demand anchored at two IXPs.
struct ServiceRequest {
  std::string id;
  IxpId src;
  IxpId dst;
  double min_bw_mbps = 0.0;
  double max_delay_ms = 0.0;
  bool want_backup = false;

  friend bool operator==(const ServiceRequest&, const ServiceRequest&) = default;
};

/// A committed pathlet sequence realizing a request, plus an optional
/// disjoint standby sequence.
struct EmbeddedPath {
  std::string request_id;
  std::vector<std::string> pathlet_ids;
  double reserved_bw_mbps = 0.0;
  double path_delay_ms = 0.0;
  std::optional<std::vector<std::string>> backup_pathlet_ids;

  friend bool operator==(const EmbeddedPath&, const EmbeddedPath&) = default;
};

/// Returns every violated pathlet invariant as a short description; the
/// pathlet is valid iff the result is empty. Total: never throws.
std::vector<std::string> validate_pathlet(const Pathlet& p);

/// Same contract as validate_pathlet, for requests.
std::vector<std::string> validate_request(const ServiceRequest& r);

/// End-to-end delay of a chained pathlet sequence: the sum of member delays
/// plus switching_delay_ms for every intermediate IXP (count = size - 1).
/// Throws ChainError if the list is empty or consecutive pathlets do not
/// chain egress-to-ingress.
double path_delay(std::span<const Pathlet> pathlets, double switching_delay_ms);

}  // namespace cxp
