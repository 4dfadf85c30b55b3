#include "cxp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cxp/error.hpp"

namespace cxp {
namespace {

// Box-Muller on raw 53-bit uniforms: identical streams on every platform,
// unlike std::normal_distribution.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - std::ldexp(static_cast<double>(rng() >> 11), -53);  // (0,1]
  const double u2 = std::ldexp(static_cast<double>(rng() >> 11), -53);        // [0,1)
  constexpr double tau = 6.28318530717958647692528676655900577;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(tau * u2);
}

bool shock_active(const ActiveShock& s, std::int64_t epoch) {
  return s.start_epoch <= epoch && epoch < s.end_epoch;
}

nlohmann::json ids_json(const std::vector<std::string>& ids) {
  return nlohmann::json(ids);
}

}  // namespace

void validate_scenario(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw Error(Errc::malformed_scenario, msg); };

  if (s.epochs < 1) fail("epochs must be >= 1");
  if (!(s.epoch_length_s > 0.0)) fail("epoch_length_s must be positive");
  if (auto* g = std::get_if<TruncatedGaussian>(&s.noise); g && !(g->sigma_ms > 0.0)) {
    fail("truncated_gaussian sigma_ms must be positive");
  }

  std::set<std::string> pathlet_ids;
  std::set<IxpId> anchors;
  for (const auto& p : s.pathlets) {
    auto violations = validate_pathlet(p);
    if (!violations.empty()) fail("seed pathlet '" + p.id + "': " + violations.front());
    if (!pathlet_ids.insert(p.id).second) fail("duplicate seed pathlet '" + p.id + "'");
    anchors.insert(p.ingress);
    anchors.insert(p.egress);
  }

  std::int64_t prev_epoch = 0;
  std::set<std::string> arrived;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const ScenarioEvent& ev = s.events[i];
    if (i > 0 && ev.epoch < prev_epoch) fail("events not sorted by epoch");
    prev_epoch = ev.epoch;
    if (ev.epoch < 0 || ev.epoch >= s.epochs) {
      fail("event epoch " + std::to_string(ev.epoch) + " outside [0, " +
           std::to_string(s.epochs) + ")");
    }
    if (const auto* a = std::get_if<Arrival>(&ev.action)) {
      auto violations = validate_request(a->request);
      if (!violations.empty()) fail("request '" + a->request.id + "': " + violations.front());
      if (!arrived.insert(a->request.id).second) {
        fail("duplicate arrival for request '" + a->request.id + "'");
      }
      if (!anchors.contains(a->request.src) || !anchors.contains(a->request.dst)) {
        fail("request '" + a->request.id + "' references an IXP absent from the seed topology");
      }
    } else if (const auto* d = std::get_if<Departure>(&ev.action)) {
      if (!arrived.contains(d->request_id)) {
        fail("departure for '" + d->request_id + "' precedes its arrival");
      }
    } else {
      const auto& shock = std::get<DelayShock>(ev.action);
      if (!pathlet_ids.contains(shock.pathlet_id)) {
        fail("shock references unknown pathlet '" + shock.pathlet_id + "'");
      }
      if (!(shock.observed_delay_ms > 0.0)) fail("shock delay must be positive");
      if (shock.duration_epochs < 1) fail("shock duration must be >= 1 epoch");
    }
  }
}

std::vector<MeasurementSample> measure_epoch(const VirtualTopology& t, std::int64_t epoch,
                                             const NoiseModel& noise,
                                             const std::map<std::string, ActiveShock>& shocks,
                                             std::mt19937_64& rng) {
  std::vector<MeasurementSample> samples;
  samples.reserve(t.pathlets().size());
  for (const auto& [id, p] : t.pathlets()) {
    double observed;
    auto it = shocks.find(id);
    if (it != shocks.end() && shock_active(it->second, epoch)) {
      observed = it->second.observed_delay_ms;
    } else if (const auto* g = std::get_if<TruncatedGaussian>(&noise)) {
      do {
        observed = p.advertised_delay_ms + g->sigma_ms * standard_normal(rng);
      } while (!(observed > 0.0));
    } else {
      observed = p.advertised_delay_ms;
    }
    samples.push_back({id, epoch, observed});
  }
  return samples;
}

std::vector<ViolationEvent> detect_violations(const std::vector<MeasurementSample>& samples,
                                              const std::map<std::string, Reservation>& live_paths,
                                              const std::map<std::string, Pathlet>& pathlets,
                                              const StitchPolicy& policy) {
  std::map<std::string, double> observed;
  std::int64_t epoch = samples.empty() ? 0 : samples.front().epoch;
  for (const auto& s : samples) observed[s.pathlet_id] = s.observed_delay_ms;

  std::vector<ViolationEvent> out;
  for (const auto& [rid, res] : live_paths) {
    double sum = 0.0;
    for (const auto& id : res.path.pathlet_ids) {
      auto it = observed.find(id);
      if (it == observed.end()) {
        throw Error(Errc::missing_sample, "no sample for pathlet '" + id + "'");
      }
      sum += it->second;
    }
    const double total =
        sum + policy.switching_delay_ms * static_cast<double>(res.path.pathlet_ids.size() - 1);
    if (total > res.request.max_delay_ms) {
      out.push_back({epoch, PathDelayViolation{rid}});
    }
  }
  for (const auto& [id, obs] : observed) {
    auto it = pathlets.find(id);
    if (it == pathlets.end()) continue;
    const Pathlet& p = it->second;
    if (p.mode == GuaranteeMode::Guaranteed &&
        obs > p.advertised_delay_ms * (1.0 + policy.guarantee_tolerance)) {
      out.push_back({epoch, AdvertisedGuaranteeViolation{id}});
    }
  }
  return out;
}

StitchResult reroute(VirtualTopology& t, const std::string& request_id, const StitchPolicy& policy,
                     const std::vector<MeasurementSample>& samples) {
  auto it = t.reservations().find(request_id);
  if (it == t.reservations().end()) {
    throw Error(Errc::unknown_request, "no reservation for request '" + request_id + "'");
  }
  const ServiceRequest request = it->second.request;

  std::map<std::string, double> observed;
  for (const auto& s : samples) observed[s.pathlet_id] = s.observed_delay_ms;

  DelayView view;
  for (const auto& [id, p] : t.pathlets()) {
    auto ob = observed.find(id);
    if (ob == observed.end()) continue;
    if (p.mode == GuaranteeMode::BestEffort) {
      view.delay_override[id] = ob->second;
    } else if (ob->second > p.advertised_delay_ms * (1.0 + policy.guarantee_tolerance)) {
      view.excluded.insert(id);
    }
  }

  StitchResult result = request.want_backup ? stitch_with_backup(t, request, policy, view)
                                            : stitch_path(t, request, policy, view);
  if (const auto* path = std::get_if<EmbeddedPath>(&result)) {
    // the view search already checked the new members against residuals that
    // still carry the old reservation (make-before-break); commit the swap
    VirtualTopology scratch = t;
    scratch.release(request_id);
    scratch.reserve(request, *path);
    t = std::move(scratch);
  }
  return result;
}

Simulation::Simulation(Scenario scenario, StitchPolicy policy)
    : scenario_(std::move(scenario)),
      policy_(policy),
      topo_(policy.backup_reservation),
      rng_(scenario_.rng_seed) {
  validate_scenario(scenario_);
  for (const auto& p : scenario_.pathlets) topo_.advertise(p);
}

void Simulation::apply_event(const ScenarioEvent& ev) {
  if (const auto* a = std::get_if<Arrival>(&ev.action)) {
    const ServiceRequest& req = a->request;
    AdmitResult res = admit(topo_, req, policy_);
    if (const auto* adm = std::get_if<Admission>(&res)) {
      ++admitted_;
      tracks_[req.id] = RequestTrack{epoch_, std::nullopt, 0};
      nlohmann::json payload{{"request_id", req.id},
                             {"delay_ms", adm->path.path_delay_ms},
                             {"pathlet_ids", ids_json(adm->path.pathlet_ids)},
                             {"migrations", adm->migrations}};
      if (adm->path.backup_pathlet_ids) {
        payload["backup_pathlet_ids"] = ids_json(*adm->path.backup_pathlet_ids);
      }
      log_.push_back({epoch_, "admit", payload});
      admissions_.push_back({req.id, "admitted", adm->path.path_delay_ms, adm->path.pathlet_ids,
                             adm->migrations});
    } else {
      RejectionReason reason = std::get<RejectionReason>(res);
      ++rejected_[reason];
      log_.push_back({epoch_,
                      "reject",
                      {{"request_id", req.id}, {"reason", to_string(reason)}}});
      admissions_.push_back({req.id, to_string(reason), std::nullopt, {}, 0});
    }
  } else if (const auto* d = std::get_if<Departure>(&ev.action)) {
    const bool live = topo_.reservations().contains(d->request_id);
    if (live) {
      topo_.release(d->request_id);
      tracks_.at(d->request_id).depart_epoch = epoch_;
    }
    log_.push_back({epoch_,
                    "departure",
                    {{"request_id", d->request_id}, {"released", live}}});
  } else {
    const auto& shock = std::get<DelayShock>(ev.action);
    shocks_[shock.pathlet_id] =
        ActiveShock{shock.observed_delay_ms, epoch_, epoch_ + shock.duration_epochs};
    log_.push_back({epoch_,
                    "shock_start",
                    {{"pathlet_id", shock.pathlet_id},
                     {"observed_delay_ms", shock.observed_delay_ms},
                     {"duration_epochs", shock.duration_epochs}}});
  }
}

bool Simulation::step() {
  if (epoch_ >= scenario_.epochs) return false;

  std::erase_if(shocks_, [&](const auto& kv) { return kv.second.end_epoch <= epoch_; });

  while (next_event_ < scenario_.events.size() &&
         scenario_.events[next_event_].epoch == epoch_) {
    apply_event(scenario_.events[next_event_]);
    ++next_event_;
  }

  auto samples = measure_epoch(topo_, epoch_, scenario_.noise, shocks_, rng_);
  auto violations = detect_violations(samples, topo_.reservations(), topo_.pathlets(), policy_);

  std::vector<std::string> violating_requests;
  for (const auto& v : violations) {
    if (const auto* pd = std::get_if<PathDelayViolation>(&v.kind)) {
      ++tracks_.at(pd->request_id).violation_epochs;
      violating_requests.push_back(pd->request_id);
      log_.push_back({epoch_,
                      "violation",
                      {{"kind", "path_delay"}, {"request_id", pd->request_id}}});
    } else {
      const auto& gv = std::get<AdvertisedGuaranteeViolation>(v.kind);
      log_.push_back({epoch_,
                      "violation",
                      {{"kind", "advertised_guarantee"}, {"pathlet_id", gv.pathlet_id}}});
    }
  }

  for (const auto& rid : violating_requests) {
    StitchResult rr = reroute(topo_, rid, policy_, samples);
    if (const auto* path = std::get_if<EmbeddedPath>(&rr)) {
      ++reroutes_;
      nlohmann::json payload{{"request_id", rid},
                             {"pathlet_ids", ids_json(path->pathlet_ids)},
                             {"delay_ms", path->path_delay_ms}};
      if (path->backup_pathlet_ids) {
        payload["backup_pathlet_ids"] = ids_json(*path->backup_pathlet_ids);
      }
      log_.push_back({epoch_, "reroute", payload});
    } else {
      log_.push_back({epoch_,
                      "reroute_failed",
                      {{"request_id", rid},
                       {"reason", to_string(std::get<RejectionReason>(rr))}}});
    }
  }

  ++epoch_;
  return true;
}

SimResult Simulation::result() const {
  SimResult out;
  out.metrics.admitted = admitted_;
  out.metrics.rejected = rejected_;
  out.metrics.reroutes = reroutes_;
  for (const auto& [rid, track] : tracks_) {
    out.metrics.violation_epochs[rid] = track.violation_epochs;
    const std::int64_t end = track.depart_epoch.value_or(epoch_);
    const std::int64_t lifetime = end - track.admit_epoch;
    if (lifetime > 0) {
      out.metrics.availability[rid] =
          static_cast<double>(lifetime - track.violation_epochs) / static_cast<double>(lifetime);
    }
  }
  out.log = log_;
  out.admissions = admissions_;
  return out;
}

SimResult run_scenario(const Scenario& s, const StitchPolicy& policy) {
  Simulation sim(s, policy);
  while (sim.step()) {
  }
  return sim.result();
}

}  // namespace cxp
