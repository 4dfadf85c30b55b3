#include <random>
#include <variant>

#include "doctest.h"

#include "cxp/error.hpp"
#include "cxp/sim.hpp"
#include "support/oracles.hpp"

using namespace cxp;

namespace {

Pathlet make(const std::string& id, const std::string& from, const std::string& to, double delay,
             double capacity, GuaranteeMode mode = GuaranteeMode::BestEffort) {
  Pathlet p;
  p.id = id;
  p.owner = Asn{64500};
  p.ingress = IxpId{from};
  p.egress = IxpId{to};
  p.mode = mode;
  p.advertised_delay_ms = delay;
  p.capacity_mbps = capacity;
  return p;
}

ServiceRequest request(const std::string& id, const std::string& src, const std::string& dst,
                       double bw, double delay, bool backup = false) {
  return ServiceRequest{id, IxpId{src}, IxpId{dst}, bw, delay, backup};
}

ScenarioEvent arrival(std::int64_t epoch, ServiceRequest r) {
  return ScenarioEvent{epoch, Arrival{std::move(r)}};
}

ScenarioEvent departure(std::int64_t epoch, std::string request_id) {
  return ScenarioEvent{epoch, Departure{std::move(request_id)}};
}

ScenarioEvent shock(std::int64_t epoch, std::string pathlet_id, double observed,
                    std::int64_t duration) {
  return ScenarioEvent{epoch, DelayShock{std::move(pathlet_id), observed, duration}};
}

// Two parallel pathlets, a shock that pushes the chosen one over the bound.
Scenario reroute_scenario() {
  Scenario s;
  s.pathlets = {make("p_fast", "A", "B", 5.0, 100.0), make("p_slow", "A", "B", 8.0, 100.0)};
  s.events = {arrival(0, request("r1", "A", "B", 10.0, 20.0)), shock(3, "p_fast", 50.0, 2)};
  s.epochs = 10;
  s.rng_seed = 7;
  return s;
}

}  // namespace

TEST_CASE("noiseless measurement reports advertised delays in pathlet-id order") {
  VirtualTopology t;
  t.advertise(make("b", "A", "B", 7.0, 10.0));
  t.advertise(make("a", "A", "B", 5.0, 10.0));
  std::mt19937_64 rng(1);
  const auto samples = measure_epoch(t, 4, NoiseModel{}, {}, rng);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0] == MeasurementSample{"a", 4, 5.0});
  CHECK(samples[1] == MeasurementSample{"b", 4, 7.0});
}

TEST_CASE("an active shock pins the observed delay for its window only") {
  VirtualTopology t;
  t.advertise(make("a", "A", "B", 5.0, 10.0));
  std::mt19937_64 rng(1);
  const std::map<std::string, ActiveShock> shocks{{"a", ActiveShock{50.0, 2, 5}}};
  CHECK(measure_epoch(t, 1, NoiseModel{}, shocks, rng)[0].observed_delay_ms == 5.0);
  CHECK(measure_epoch(t, 2, NoiseModel{}, shocks, rng)[0].observed_delay_ms == 50.0);
  CHECK(measure_epoch(t, 4, NoiseModel{}, shocks, rng)[0].observed_delay_ms == 50.0);
  CHECK(measure_epoch(t, 5, NoiseModel{}, shocks, rng)[0].observed_delay_ms == 5.0);
}

TEST_CASE("gaussian noise is positive and replays bit-identically per seed") {
  VirtualTopology t;
  t.advertise(make("a", "A", "B", 5.0, 10.0));
  t.advertise(make("b", "A", "B", 0.001, 10.0));
  const NoiseModel noise = TruncatedGaussian{2.0};
  std::mt19937_64 rng1(99);
  std::mt19937_64 rng2(99);
  std::vector<MeasurementSample> first, second;
  for (int epoch = 0; epoch < 50; ++epoch) {
    for (const auto& s : measure_epoch(t, epoch, noise, {}, rng1)) first.push_back(s);
    for (const auto& s : measure_epoch(t, epoch, noise, {}, rng2)) second.push_back(s);
  }
  CHECK(first == second);
  bool any_off_advertised = false;
  for (const auto& s : first) {
    CHECK(s.observed_delay_ms > 0.0);
    if (s.pathlet_id == "a" && s.observed_delay_ms != 5.0) any_off_advertised = true;
  }
  CHECK(any_off_advertised);
}

namespace {

std::map<std::string, Reservation> one_reservation(const ServiceRequest& r,
                                                   std::vector<std::string> members, double delay) {
  EmbeddedPath path;
  path.request_id = r.id;
  path.pathlet_ids = std::move(members);
  path.reserved_bw_mbps = r.min_bw_mbps;
  path.path_delay_ms = delay;
  return {{r.id, Reservation{r, path}}};
}

}  // namespace

TEST_CASE("detection is quiet while observations fit the bound") {
  std::map<std::string, Pathlet> pathlets{{"a", make("a", "A", "B", 5.0, 10.0)}};
  const auto live = one_reservation(request("r1", "A", "B", 1.0, 20.0), {"a"}, 5.0);
  const std::vector<MeasurementSample> samples{{"a", 0, 19.0}};
  CHECK(detect_violations(samples, live, pathlets, {}).empty());
}

TEST_CASE("an observed path delay above the bound raises one violation") {
  std::map<std::string, Pathlet> pathlets{{"a", make("a", "A", "B", 5.0, 10.0)},
                                          {"b", make("b", "B", "C", 5.0, 10.0)}};
  const auto live = one_reservation(request("r1", "A", "C", 1.0, 20.0), {"a", "b"}, 10.0);
  const std::vector<MeasurementSample> samples{{"a", 3, 5.0}, {"b", 3, 50.0}};
  const auto violations = detect_violations(samples, live, pathlets, {});
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].epoch == 3);
  CHECK(std::get<PathDelayViolation>(violations[0].kind) == PathDelayViolation{"r1"});
}

TEST_CASE("the path-delay comparison is strict and includes switching delay") {
  std::map<std::string, Pathlet> pathlets{{"a", make("a", "A", "B", 5.0, 10.0)},
                                          {"b", make("b", "B", "C", 5.0, 10.0)}};
  const auto live = one_reservation(request("r1", "A", "C", 1.0, 20.0), {"a", "b"}, 10.0);
  const std::vector<MeasurementSample> samples{{"a", 0, 10.0}, {"b", 0, 10.0}};
  CHECK(detect_violations(samples, live, pathlets, {}).empty());
  StitchPolicy with_switching;
  with_switching.switching_delay_ms = 1.0;
  CHECK(detect_violations(samples, live, pathlets, with_switching).size() == 1);
}

TEST_CASE("guaranteed pathlets are checked against advertised with tolerance") {
  std::map<std::string, Pathlet> pathlets{
      {"g", make("g", "A", "B", 10.0, 10.0, GuaranteeMode::Guaranteed)},
      {"e", make("e", "A", "B", 10.0, 10.0)}};
  const std::map<std::string, Reservation> live;
  SUBCASE("at advertised exactly, nothing fires") {
    const std::vector<MeasurementSample> samples{{"e", 0, 99.0}, {"g", 0, 10.0}};
    CHECK(detect_violations(samples, live, pathlets, {}).empty());
  }
  SUBCASE("above advertised, only the guaranteed pathlet fires") {
    const std::vector<MeasurementSample> samples{{"e", 0, 99.0}, {"g", 0, 10.0625}};
    const auto violations = detect_violations(samples, live, pathlets, {});
    REQUIRE(violations.size() == 1);
    CHECK(std::get<AdvertisedGuaranteeViolation>(violations[0].kind) ==
          AdvertisedGuaranteeViolation{"g"});
  }
  SUBCASE("tolerance widens the quiet band") {
    StitchPolicy tolerant;
    tolerant.guarantee_tolerance = 0.5;
    const std::vector<MeasurementSample> at_edge{{"e", 0, 1.0}, {"g", 0, 15.0}};
    CHECK(detect_violations(at_edge, live, pathlets, tolerant).empty());
    const std::vector<MeasurementSample> past_edge{{"e", 0, 1.0}, {"g", 0, 15.0625}};
    CHECK(detect_violations(past_edge, live, pathlets, tolerant).size() == 1);
  }
}

TEST_CASE("violations come out ordered by request id then pathlet id") {
  std::map<std::string, Pathlet> pathlets{
      {"a", make("a", "A", "B", 5.0, 10.0, GuaranteeMode::Guaranteed)},
      {"b", make("b", "A", "B", 5.0, 10.0)}};
  std::map<std::string, Reservation> live;
  live.merge(one_reservation(request("r2", "A", "B", 1.0, 6.0), {"b"}, 5.0));
  live.merge(one_reservation(request("r1", "A", "B", 1.0, 6.0), {"a"}, 5.0));
  const std::vector<MeasurementSample> samples{{"a", 0, 50.0}, {"b", 0, 50.0}};
  const auto violations = detect_violations(samples, live, pathlets, {});
  REQUIRE(violations.size() == 3);
  CHECK(std::get<PathDelayViolation>(violations[0].kind).request_id == "r1");
  CHECK(std::get<PathDelayViolation>(violations[1].kind).request_id == "r2");
  CHECK(std::get<AdvertisedGuaranteeViolation>(violations[2].kind).pathlet_id == "a");
}

TEST_CASE("a live path member without a sample is an error") {
  std::map<std::string, Pathlet> pathlets{{"a", make("a", "A", "B", 5.0, 10.0)}};
  const auto live = one_reservation(request("r1", "A", "B", 1.0, 20.0), {"a"}, 5.0);
  CHECK_THROWS_WITH_AS(detect_violations({}, live, pathlets, {}),
                       doctest::Contains("no sample"), Error);
}

TEST_CASE("reroute moves the reservation onto the observed-better path") {
  VirtualTopology t;
  t.advertise(make("p_fast", "A", "B", 5.0, 100.0));
  t.advertise(make("p_slow", "A", "B", 8.0, 100.0));
  t.reserve(request("r1", "A", "B", 10.0, 20.0), [&] {
    EmbeddedPath p;
    p.request_id = "r1";
    p.pathlet_ids = {"p_fast"};
    p.reserved_bw_mbps = 10.0;
    p.path_delay_ms = 5.0;
    return p;
  }());
  const std::vector<MeasurementSample> samples{{"p_fast", 3, 50.0}, {"p_slow", 3, 8.0}};
  const auto result = reroute(t, "r1", {}, samples);
  REQUIRE(std::holds_alternative<EmbeddedPath>(result));
  const auto& path = std::get<EmbeddedPath>(result);
  CHECK(path.pathlet_ids == std::vector<std::string>{"p_slow"});
  CHECK(path.path_delay_ms == 8.0);
  CHECK(t.residual_bw("p_fast") == 100.0);
  CHECK(t.residual_bw("p_slow") == 90.0);
}

TEST_CASE("reroute without a viable alternative leaves the path in place") {
  VirtualTopology t;
  t.advertise(make("p_only", "A", "B", 5.0, 100.0));
  t.reserve(request("r1", "A", "B", 10.0, 20.0), [&] {
    EmbeddedPath p;
    p.request_id = "r1";
    p.pathlet_ids = {"p_only"};
    p.reserved_bw_mbps = 10.0;
    p.path_delay_ms = 5.0;
    return p;
  }());
  const VirtualTopology before = t;
  const std::vector<MeasurementSample> samples{{"p_only", 3, 50.0}};
  const auto result = reroute(t, "r1", {}, samples);
  REQUIRE(std::holds_alternative<RejectionReason>(result));
  CHECK(t == before);
}

TEST_CASE("reroute keeps the request's backup demand") {
  VirtualTopology t;
  for (const auto& [id, delay, group] : {std::tuple{"fastA", 5.0, "gA"},
                                         std::tuple{"midB", 6.0, "gB"},
                                         std::tuple{"slowC", 8.0, "gC"}}) {
    Pathlet p = make(id, "A", "B", delay, 100.0);
    p.disjointness_group = group;
    t.advertise(p);
  }
  ServiceRequest r = request("r1", "A", "B", 10.0, 60.0, true);
  const auto first = stitch_with_backup(t, r, {});
  t.reserve(r, std::get<EmbeddedPath>(first));
  const std::vector<MeasurementSample> samples{
      {"fastA", 0, 50.0}, {"midB", 0, 6.0}, {"slowC", 0, 8.0}};
  const auto result = reroute(t, "r1", {}, samples);
  REQUIRE(std::holds_alternative<EmbeddedPath>(result));
  const auto& path = std::get<EmbeddedPath>(result);
  CHECK(path.pathlet_ids == std::vector<std::string>{"midB"});
  REQUIRE(path.backup_pathlet_ids.has_value());
  CHECK(*path.backup_pathlet_ids == std::vector<std::string>{"slowC"});
}

TEST_CASE("scenario validation names the first structural problem") {
  Scenario base;
  base.pathlets = {make("p1", "A", "B", 5.0, 100.0)};
  base.epochs = 10;
  CHECK_NOTHROW(validate_scenario(base));

  Scenario s = base;
  s.epochs = 0;
  CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("epochs must be >= 1"), Error);

  s = base;
  s.events = {shock(5, "p1", 9.0, 1), arrival(2, request("r1", "A", "B", 1.0, 10.0))};
  CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("not sorted"), Error);

  s = base;
  s.events = {departure(2, "r1")};
  CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("precedes its arrival"), Error);

  s = base;
  s.events = {shock(2, "ghost", 9.0, 1)};
  CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("unknown pathlet"), Error);

  s = base;
  s.events = {arrival(1, request("r1", "A", "B", 1.0, 10.0)),
              arrival(2, request("r1", "A", "B", 1.0, 10.0))};
  CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("duplicate arrival"), Error);

  s = base;
  s.events = {arrival(1, request("r1", "A", "Z", 1.0, 10.0))};
  CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("absent from the seed"), Error);

  s = base;
  s.events = {arrival(10, request("r1", "A", "B", 1.0, 10.0))};
  CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("[0, 10)"), Error);
}

TEST_CASE("an event-free scenario yields empty metrics") {
  Scenario s;
  s.pathlets = {make("p1", "A", "B", 5.0, 100.0)};
  s.epochs = 5;
  const auto result = run_scenario(s, {});
  CHECK(result.metrics.admitted == 0);
  CHECK(result.metrics.rejected.empty());
  CHECK(result.metrics.reroutes == 0);
  CHECK(result.metrics.availability.empty());
  CHECK(result.log.empty());
  CHECK(result.admissions.empty());
}

TEST_CASE("an untroubled request rides out the run at full availability") {
  Scenario s;
  s.pathlets = {make("p1", "A", "B", 5.0, 100.0)};
  s.events = {arrival(0, request("r1", "A", "B", 10.0, 20.0))};
  s.epochs = 10;
  const auto result = run_scenario(s, {});
  CHECK(result.metrics.admitted == 1);
  CHECK(result.metrics.violation_epochs.at("r1") == 0);
  CHECK(result.metrics.availability.at("r1") == 1.0);
  REQUIRE(result.admissions.size() == 1);
  CHECK(result.admissions[0] ==
        AdmissionRecord{"r1", "admitted", 5.0, {"p1"}, 0});
}

TEST_CASE("a shock epoch costs one violation and triggers one reroute") {
  const auto result = run_scenario(reroute_scenario(), {});
  CHECK(result.metrics.admitted == 1);
  CHECK(result.metrics.reroutes == 1);
  CHECK(result.metrics.violation_epochs.at("r1") == 1);
  CHECK(result.metrics.availability.at("r1") == 0.9);

  std::vector<std::string> kinds;
  for (const auto& rec : result.log) kinds.push_back(rec.kind);
  CHECK(kinds == std::vector<std::string>{"admit", "shock_start", "violation", "reroute"});
  CHECK(result.log[3].payload.at("pathlet_ids") == nlohmann::json::array({"p_slow"}));
}

TEST_CASE("repeated runs of one scenario are identical") {
  Scenario s = reroute_scenario();
  s.noise = TruncatedGaussian{0.25};
  const auto a = run_scenario(s, {});
  const auto b = run_scenario(s, {});
  CHECK(a.metrics == b.metrics);
  CHECK(a.log == b.log);
  CHECK(a.admissions == b.admissions);
}

TEST_CASE("departures close the availability window") {
  Scenario s;
  s.pathlets = {make("p1", "A", "B", 5.0, 100.0)};
  s.events = {arrival(0, request("r1", "A", "B", 10.0, 20.0)), departure(5, "r1")};
  s.epochs = 10;
  const auto result = run_scenario(s, {});
  CHECK(result.metrics.availability.at("r1") == 1.0);
  bool saw_departure = false;
  for (const auto& rec : result.log) {
    if (rec.kind == "departure") {
      saw_departure = true;
      CHECK(rec.payload.at("released") == true);
    }
  }
  CHECK(saw_departure);
}

TEST_CASE("a departure for a rejected request is recorded as a no-op") {
  Scenario s;
  s.pathlets = {make("p1", "A", "B", 5.0, 100.0)};
  s.events = {arrival(0, request("r1", "A", "B", 500.0, 20.0)), departure(2, "r1")};
  s.epochs = 5;
  const auto result = run_scenario(s, {});
  CHECK(result.metrics.admitted == 0);
  CHECK(result.metrics.rejected.at(RejectionReason::BandwidthInfeasible) == 1);
  bool saw_departure = false;
  for (const auto& rec : result.log) {
    if (rec.kind == "departure") {
      saw_departure = true;
      CHECK(rec.payload.at("released") == false);
    }
  }
  CHECK(saw_departure);
}

TEST_CASE("a same-epoch arrival and departure has no availability entry") {
  Scenario s;
  s.pathlets = {make("p1", "A", "B", 5.0, 100.0)};
  s.events = {arrival(2, request("r1", "A", "B", 10.0, 20.0)), departure(2, "r1")};
  s.epochs = 5;
  const auto result = run_scenario(s, {});
  CHECK(result.metrics.admitted == 1);
  CHECK(result.metrics.violation_epochs.at("r1") == 0);
  CHECK_FALSE(result.metrics.availability.contains("r1"));
}

TEST_CASE("a later shock on the same pathlet supersedes the active one") {
  Scenario s;
  s.pathlets = {make("p1", "A", "B", 5.0, 100.0)};
  s.events = {arrival(0, request("r1", "A", "B", 10.0, 20.0)), shock(1, "p1", 50.0, 5),
              shock(2, "p1", 6.0, 1)};
  s.epochs = 6;
  const auto result = run_scenario(s, {});
  CHECK(result.metrics.violation_epochs.at("r1") == 1);
  CHECK(result.metrics.availability.at("r1") == 5.0 / 6.0);
}
