#include "cxp/topology.hpp"

#include <algorithm>

#include "cxp/error.hpp"

namespace cxp {

std::vector<std::string> reserved_member_ids(const Reservation& res, BackupReservation policy) {
  std::vector<std::string> members = res.path.pathlet_ids;
  if (policy == BackupReservation::Full && res.path.backup_pathlet_ids) {
    members.insert(members.end(), res.path.backup_pathlet_ids->begin(),
                   res.path.backup_pathlet_ids->end());
  }
  return members;
}

const Pathlet& VirtualTopology::pathlet(const std::string& id) const {
  auto it = pathlets_.find(id);
  if (it == pathlets_.end()) throw Error(Errc::unknown_pathlet, "no pathlet '" + id + "'");
  return it->second;
}

double VirtualTopology::residual_bw(const std::string& id) const {
  auto it = residual_.find(id);
  if (it == residual_.end()) throw Error(Errc::unknown_pathlet, "no pathlet '" + id + "'");
  return it->second;
}

std::vector<Pathlet> VirtualTopology::member_pathlets(const std::vector<std::string>& ids) const {
  std::vector<Pathlet> members;
  members.reserve(ids.size());
  for (const auto& id : ids) members.push_back(pathlet(id));
  return members;
}

void VirtualTopology::advertise(const Pathlet& p) {
  auto violations = validate_pathlet(p);
  if (!violations.empty()) {
    std::string msg = "pathlet '" + p.id + "':";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error(Errc::invalid_pathlet, msg);
  }
  if (pathlets_.contains(p.id)) {
    throw Error(Errc::duplicate_pathlet, "pathlet '" + p.id + "' already advertised");
  }
  pathlets_.emplace(p.id, p);
  holds_.emplace(p.id, std::map<std::string, double>{});
  residual_.emplace(p.id, p.capacity_mbps);
  ixps_.insert(p.ingress);
  ixps_.insert(p.egress);
}

std::vector<std::string> VirtualTopology::withdraw(const std::string& pathlet_id) {
  auto it = pathlets_.find(pathlet_id);
  if (it == pathlets_.end()) {
    throw Error(Errc::unknown_pathlet, "no pathlet '" + pathlet_id + "'");
  }

  // tear down every reservation that references the pathlet, primary or backup
  std::vector<std::string> orphaned;
  for (const auto& [rid, res] : reservations_) {
    const auto& primary = res.path.pathlet_ids;
    bool uses = std::find(primary.begin(), primary.end(), pathlet_id) != primary.end();
    if (!uses && res.path.backup_pathlet_ids) {
      const auto& backup = *res.path.backup_pathlet_ids;
      uses = std::find(backup.begin(), backup.end(), pathlet_id) != backup.end();
    }
    if (uses) orphaned.push_back(rid);
  }
  for (const auto& rid : orphaned) release(rid);

  const IxpId ingress = it->second.ingress;
  const IxpId egress = it->second.egress;
  pathlets_.erase(it);
  holds_.erase(pathlet_id);
  residual_.erase(pathlet_id);

  for (const IxpId& ixp : {ingress, egress}) {
    bool referenced = std::any_of(pathlets_.begin(), pathlets_.end(), [&](const auto& kv) {
      return kv.second.ingress == ixp || kv.second.egress == ixp;
    });
    if (!referenced) ixps_.erase(ixp);
  }
  return orphaned;
}

void VirtualTopology::check_chain(const std::vector<std::string>& ids, const IxpId& src,
                                  const IxpId& dst) const {
  if (ids.empty()) throw Error(Errc::chain_error, "empty pathlet sequence");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Pathlet& p = pathlet(ids[i]);
    if (!seen.insert(ids[i]).second) {
      throw Error(Errc::invalid_path, "pathlet '" + ids[i] + "' repeats within the path");
    }
    if (i == 0 && p.ingress != src) {
      throw Error(Errc::chain_error, "path does not start at '" + src.value + "'");
    }
    if (i > 0 && pathlet(ids[i - 1]).egress != p.ingress) {
      throw Error(Errc::chain_error,
                  "pathlet '" + ids[i - 1] + "' does not chain into '" + ids[i] + "'");
    }
    if (i + 1 == ids.size() && p.egress != dst) {
      throw Error(Errc::chain_error, "path does not end at '" + dst.value + "'");
    }
  }
}

void VirtualTopology::reserve(const ServiceRequest& request, const EmbeddedPath& path) {
  if (path.request_id != request.id) {
    throw Error(Errc::invalid_path, "path request_id '" + path.request_id +
                                        "' does not match request '" + request.id + "'");
  }
  if (!(path.reserved_bw_mbps > 0.0)) {
    throw Error(Errc::invalid_path, "non-positive reserved bandwidth");
  }
  if (reservations_.contains(request.id)) {
    throw Error(Errc::duplicate_request, "request '" + request.id + "' already reserved");
  }

  check_chain(path.pathlet_ids, request.src, request.dst);
  if (path.backup_pathlet_ids) {
    check_chain(*path.backup_pathlet_ids, request.src, request.dst);
    // backup must share neither pathlet ids nor disjointness groups with the primary
    std::set<std::string> primary_ids(path.pathlet_ids.begin(), path.pathlet_ids.end());
    std::set<std::string> primary_groups;
    for (const auto& id : path.pathlet_ids) {
      if (auto g = pathlet(id).disjointness_group) primary_groups.insert(*g);
    }
    for (const auto& id : *path.backup_pathlet_ids) {
      if (primary_ids.contains(id)) {
        throw Error(Errc::invalid_path, "backup shares pathlet '" + id + "' with primary");
      }
      if (auto g = pathlet(id).disjointness_group; g && primary_groups.contains(*g)) {
        throw Error(Errc::invalid_path,
                    "backup pathlet '" + id + "' shares disjointness group '" + *g + "'");
      }
    }
  }

  Reservation res{request, path};
  std::vector<std::string> members = reserved_member_ids(res, backup_policy_);
  for (const auto& id : members) {
    if (residual_.at(id) < path.reserved_bw_mbps) {
      throw Error(Errc::insufficient_residual,
                  "pathlet '" + id + "' residual " + std::to_string(residual_.at(id)) +
                      " Mbps < demand " + std::to_string(path.reserved_bw_mbps) + " Mbps");
    }
  }

  for (const auto& id : members) {
    holds_[id][request.id] = path.reserved_bw_mbps;
    recompute_residual(id);
  }
  reservations_.emplace(request.id, std::move(res));
}

void VirtualTopology::release(const std::string& request_id) {
  auto it = reservations_.find(request_id);
  if (it == reservations_.end()) {
    throw Error(Errc::unknown_request, "no reservation for request '" + request_id + "'");
  }
  for (const auto& id : reserved_member_ids(it->second, backup_policy_)) {
    auto h = holds_.find(id);
    if (h != holds_.end()) {
      h->second.erase(request_id);
      recompute_residual(id);
    }
  }
  reservations_.erase(it);
}

void VirtualTopology::recompute_residual(const std::string& pathlet_id) {
  // sum holds in request-id order: identical hold sets always yield an
  // identical residual, so release restores the pre-reserve value exactly
  double held = 0.0;
  for (const auto& [rid, bw] : holds_.at(pathlet_id)) held += bw;
  residual_.at(pathlet_id) = pathlets_.at(pathlet_id).capacity_mbps - held;
}

}  // namespace cxp
