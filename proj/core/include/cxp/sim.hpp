#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cxp/stitch.hpp"
#include "cxp/topology.hpp"

namespace cxp {

struct TruncatedGaussian {
  double sigma_ms = 0.0;
  friend bool operator==(const TruncatedGaussian&, const TruncatedGaussian&) = default;
};

/// monostate = noiseless measurements (observed equals advertised).
using NoiseModel = std::variant<std::monostate, TruncatedGaussian>;

struct Arrival {
  ServiceRequest request;
  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct Departure {
  std::string request_id;
  friend bool operator==(const Departure&, const Departure&) = default;
};

/// Forces a pathlet's observed delay to a fixed value for a span of epochs.
struct DelayShock {
  std::string pathlet_id;
  double observed_delay_ms = 0.0;
  std::int64_t duration_epochs = 0;
  friend bool operator==(const DelayShock&, const DelayShock&) = default;
};

struct ScenarioEvent {
  std::int64_t epoch = 0;
  std::variant<Arrival, Departure, DelayShock> action;
  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

/// A fully deterministic simulation input: topology seed, time-ordered
/// events, epoch count, and the seeded measurement-noise model.
struct Scenario {
  std::vector<Pathlet> pathlets;
  std::vector<ScenarioEvent> events;
  std::int64_t epochs = 1;
  double epoch_length_s = 1.0;
  std::uint64_t rng_seed = 0;
  NoiseModel noise;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws MalformedScenario naming the first structural problem: unsorted or
/// out-of-range events, invalid seed pathlets, arrivals referencing unknown
/// IXPs, departures without a preceding arrival, shocks on unknown pathlets.
void validate_scenario(const Scenario& s);

struct MeasurementSample {
  std::string pathlet_id;
  std::int64_t epoch = 0;
  double observed_delay_ms = 0.0;
  friend bool operator==(const MeasurementSample&, const MeasurementSample&) = default;
};

/// A shock currently pinning a pathlet's observed delay; active for epochs in
/// [start_epoch, end_epoch). A later shock on the same pathlet supersedes an
/// active one.
struct ActiveShock {
  double observed_delay_ms = 0.0;
  std::int64_t start_epoch = 0;
  std::int64_t end_epoch = 0;
};

/// One sample per pathlet, in pathlet-id order: the shock value when a shock
/// is active, otherwise advertised delay plus noise (redrawn until positive).
/// Deterministic given the generator state.
std::vector<MeasurementSample> measure_epoch(const VirtualTopology& t, std::int64_t epoch,
                                             const NoiseModel& noise,
                                             const std::map<std::string, ActiveShock>& shocks,
                                             std::mt19937_64& rng);

struct PathDelayViolation {
  std::string request_id;
  friend bool operator==(const PathDelayViolation&, const PathDelayViolation&) = default;
};

struct AdvertisedGuaranteeViolation {
  std::string pathlet_id;
  friend bool operator==(const AdvertisedGuaranteeViolation&,
                         const AdvertisedGuaranteeViolation&) = default;
};

struct ViolationEvent {
  std::int64_t epoch = 0;
  std::variant<PathDelayViolation, AdvertisedGuaranteeViolation> kind;
  friend bool operator==(const ViolationEvent&, const ViolationEvent&) = default;
};

/// Emits one PathDelayViolation per live path whose observed member-delay sum
/// plus switching exceeds its request's bound (strict >), ordered by request
/// id, followed by one AdvertisedGuaranteeViolation per Guaranteed pathlet
/// observed above advertised * (1 + guarantee_tolerance), ordered by pathlet
/// id. Throws MissingSample when a live path member has no sample.
std::vector<ViolationEvent> detect_violations(const std::vector<MeasurementSample>& samples,
                                              const std::map<std::string, Reservation>& live_paths,
                                              const std::map<std::string, Pathlet>& pathlets,
                                              const StitchPolicy& policy);

/// Make-before-break replacement of a violating request's path. The search
/// weighs BestEffort pathlets by their observed delay, keeps advertised
/// delays for Guaranteed ones, and excludes Guaranteed pathlets currently
/// violating their guarantee. On success the topology is updated and the new
/// path returned; on rejection the old path stays untouched.
StitchResult reroute(VirtualTopology& t, const std::string& request_id,
                     const StitchPolicy& policy, const std::vector<MeasurementSample>& samples);

struct SimMetrics {
  std::int64_t admitted = 0;
  std::map<RejectionReason, std::int64_t> rejected;
  std::int64_t reroutes = 0;
  std::map<std::string, std::int64_t> violation_epochs;  // per admitted request
  std::map<std::string, double> availability;            // fraction of lifetime epochs in bound
  friend bool operator==(const SimMetrics&, const SimMetrics&) = default;
};

struct LogRecord {
  std::int64_t epoch = 0;
  std::string kind;
  nlohmann::json payload;
  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// One admission-report row per arrival.
struct AdmissionRecord {
  std::string request_id;
  std::string outcome;  // "admitted" or a RejectionReason name
  std::optional<double> delay_ms;
  std::vector<std::string> pathlet_ids;
  int migrations = 0;
  friend bool operator==(const AdmissionRecord&, const AdmissionRecord&) = default;
};

struct SimResult {
  SimMetrics metrics;
  std::vector<LogRecord> log;
  std::vector<AdmissionRecord> admissions;
};

/// Epoch-by-epoch CXP operation over a scenario. Each epoch applies due
/// arrivals/departures/shocks, measures every pathlet, detects violations,
/// and reroutes violating requests. Strictly sequential and deterministic
/// given the scenario seed.
class Simulation {
 public:
  Simulation(Scenario scenario, StitchPolicy policy);

  /// Runs the next epoch; false once all epochs have run.
  bool step();

  std::int64_t current_epoch() const { return epoch_; }
  const VirtualTopology& topology() const { return topo_; }

  /// Metrics, event log, and admission report for the epochs run so far.
  SimResult result() const;

 private:
  struct RequestTrack {
    std::int64_t admit_epoch = 0;
    std::optional<std::int64_t> depart_epoch;
    std::int64_t violation_epochs = 0;
  };

  void apply_event(const ScenarioEvent& ev);

  Scenario scenario_;
  StitchPolicy policy_;
  VirtualTopology topo_;
  std::mt19937_64 rng_;
  std::map<std::string, ActiveShock> shocks_;
  std::size_t next_event_ = 0;
  std::int64_t epoch_ = 0;
  std::int64_t admitted_ = 0;
  std::map<RejectionReason, std::int64_t> rejected_;
  std::int64_t reroutes_ = 0;
  std::map<std::string, RequestTrack> tracks_;
  std::vector<LogRecord> log_;
  std::vector<AdmissionRecord> admissions_;
};

/// Runs a whole scenario: validate, simulate every epoch, assemble metrics.
SimResult run_scenario(const Scenario& s, const StitchPolicy& policy);

}  // namespace cxp
