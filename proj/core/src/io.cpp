#include "cxp/io.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <system_error>

#include "cxp/error.hpp"
#include "cxp/version.hpp"

namespace cxp::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail_schema(const std::string& ctx, const std::string& message) {
  throw Error(Errc::schema_mismatch, ctx + ": " + message);
}

void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) fail_schema(ctx, "expected an object");
  for (const char* key : required) {
    if (!obj.contains(key)) fail_schema(ctx, std::string("missing key '") + key + "'");
  }
  for (const auto& [key, value] : obj.items()) {
    const auto known = [&](std::initializer_list<const char*> keys) {
      for (const char* k : keys) {
        if (key == k) return true;
      }
      return false;
    };
    if (!known(required) && !known(optional)) fail_schema(ctx, "unknown key '" + key + "'");
  }
}

std::string get_string(const json& obj, const char* key, const std::string& ctx) {
  const json& v = obj.at(key);
  if (!v.is_string()) fail_schema(ctx, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& ctx) {
  const json& v = obj.at(key);
  if (!v.is_number()) fail_schema(ctx, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const char* key, const std::string& ctx) {
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  fail_schema(ctx, std::string("'") + key + "' must be a non-negative integer");
  return 0;
}

std::int64_t get_int(const json& obj, const char* key, const std::string& ctx) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail_schema(ctx, std::string("'") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key, const std::string& ctx) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail_schema(ctx, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<std::string> get_string_array(const json& v, const std::string& ctx) {
  if (!v.is_array()) fail_schema(ctx, "expected an array of strings");
  std::vector<std::string> out;
  for (const json& item : v) {
    if (!item.is_string()) fail_schema(ctx, "expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw Error(Errc::io_error, "failed to format a double");
  return {buffer, ptr};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(Errc::io_error, "read failed on '" + path.string() + "'");
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(Errc::io_error, "write failed on '" + path.string() + "'");
}

json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  }
}

json to_json(const Pathlet& p) {
  json j;
  j["id"] = p.id;
  j["owner"] = p.owner.value;
  j["ingress"] = p.ingress.value;
  j["egress"] = p.egress.value;
  j["mode"] = to_string(p.mode);
  j["advertised_delay_ms"] = p.advertised_delay_ms;
  j["capacity_mbps"] = p.capacity_mbps;
  j["router_hops"] = p.router_hops;
  j["middleboxes"] = json::array();
  for (const auto& m : p.middleboxes) j["middleboxes"].push_back(m);
  if (p.disjointness_group) j["disjointness_group"] = *p.disjointness_group;
  return j;
}

Pathlet pathlet_from_json(const json& j, const std::string& ctx) {
  check_keys(j, ctx,
             {"id", "owner", "ingress", "egress", "mode", "advertised_delay_ms",
              "capacity_mbps"},
             {"router_hops", "middleboxes", "disjointness_group"});
  Pathlet p;
  p.id = get_string(j, "id", ctx);
  p.owner = Asn{static_cast<std::uint32_t>(get_uint(j, "owner", ctx))};
  p.ingress = IxpId{get_string(j, "ingress", ctx)};
  p.egress = IxpId{get_string(j, "egress", ctx)};
  const std::string mode = get_string(j, "mode", ctx);
  if (mode == "best_effort") {
    p.mode = GuaranteeMode::BestEffort;
  } else if (mode == "guaranteed") {
    p.mode = GuaranteeMode::Guaranteed;
  } else {
    fail_schema(ctx, "'mode' must be 'best_effort' or 'guaranteed', got '" + mode + "'");
  }
  p.advertised_delay_ms = get_number(j, "advertised_delay_ms", ctx);
  p.capacity_mbps = get_number(j, "capacity_mbps", ctx);
  if (j.contains("router_hops")) {
    p.router_hops = static_cast<std::uint32_t>(get_uint(j, "router_hops", ctx));
  }
  if (j.contains("middleboxes")) {
    const auto boxes = get_string_array(j.at("middleboxes"), ctx + ".middleboxes");
    p.middleboxes.insert(boxes.begin(), boxes.end());
  }
  if (j.contains("disjointness_group")) {
    p.disjointness_group = get_string(j, "disjointness_group", ctx);
  }
  return p;
}

std::vector<Pathlet> pathlets_from_json(const json& j) {
  if (!j.is_array()) fail_schema("pathlets", "expected a JSON array");
  std::vector<Pathlet> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(pathlet_from_json(j[i], "pathlets[" + std::to_string(i) + "]"));
  }
  return out;
}

json to_json(const ServiceRequest& r) {
  json j;
  j["id"] = r.id;
  j["src"] = r.src.value;
  j["dst"] = r.dst.value;
  j["min_bw_mbps"] = r.min_bw_mbps;
  j["max_delay_ms"] = r.max_delay_ms;
  j["want_backup"] = r.want_backup;
  return j;
}

ServiceRequest request_from_json(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"id", "src", "dst", "min_bw_mbps", "max_delay_ms"}, {"want_backup"});
  ServiceRequest r;
  r.id = get_string(j, "id", ctx);
  r.src = IxpId{get_string(j, "src", ctx)};
  r.dst = IxpId{get_string(j, "dst", ctx)};
  r.min_bw_mbps = get_number(j, "min_bw_mbps", ctx);
  r.max_delay_ms = get_number(j, "max_delay_ms", ctx);
  if (j.contains("want_backup")) r.want_backup = get_bool(j, "want_backup", ctx);
  return r;
}

std::vector<ServiceRequest> requests_from_json(const json& j) {
  if (!j.is_array()) fail_schema("requests", "expected a JSON array");
  std::vector<ServiceRequest> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(request_from_json(j[i], "requests[" + std::to_string(i) + "]"));
  }
  return out;
}

json to_json(const EmbeddedPath& p) {
  json j;
  j["request_id"] = p.request_id;
  j["pathlet_ids"] = p.pathlet_ids;
  j["reserved_bw_mbps"] = p.reserved_bw_mbps;
  j["path_delay_ms"] = p.path_delay_ms;
  if (p.backup_pathlet_ids) j["backup_pathlet_ids"] = *p.backup_pathlet_ids;
  return j;
}

EmbeddedPath embedded_path_from_json(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"request_id", "pathlet_ids", "reserved_bw_mbps", "path_delay_ms"},
             {"backup_pathlet_ids"});
  EmbeddedPath p;
  p.request_id = get_string(j, "request_id", ctx);
  p.pathlet_ids = get_string_array(j.at("pathlet_ids"), ctx + ".pathlet_ids");
  p.reserved_bw_mbps = get_number(j, "reserved_bw_mbps", ctx);
  p.path_delay_ms = get_number(j, "path_delay_ms", ctx);
  if (j.contains("backup_pathlet_ids")) {
    p.backup_pathlet_ids =
        get_string_array(j.at("backup_pathlet_ids"), ctx + ".backup_pathlet_ids");
  }
  return p;
}

json to_json(const Scenario& s) {
  json j;
  j["pathlets"] = json::array();
  for (const Pathlet& p : s.pathlets) j["pathlets"].push_back(to_json(p));
  j["events"] = json::array();
  for (const ScenarioEvent& ev : s.events) {
    json e;
    e["epoch"] = ev.epoch;
    if (const auto* arrival = std::get_if<Arrival>(&ev.action)) {
      e["kind"] = "arrival";
      e["request"] = to_json(arrival->request);
    } else if (const auto* departure = std::get_if<Departure>(&ev.action)) {
      e["kind"] = "departure";
      e["request_id"] = departure->request_id;
    } else {
      const auto& shock = std::get<DelayShock>(ev.action);
      e["kind"] = "delay_shock";
      e["pathlet_id"] = shock.pathlet_id;
      e["observed_delay_ms"] = shock.observed_delay_ms;
      e["duration_epochs"] = shock.duration_epochs;
    }
    j["events"].push_back(std::move(e));
  }
  j["epochs"] = s.epochs;
  j["epoch_length_s"] = s.epoch_length_s;
  j["rng_seed"] = s.rng_seed;
  if (const auto* gaussian = std::get_if<TruncatedGaussian>(&s.noise)) {
    j["noise_model"] = {{"kind", "truncated_gaussian"}, {"sigma_ms", gaussian->sigma_ms}};
  } else {
    j["noise_model"] = {{"kind", "none"}};
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  check_keys(j, "scenario", {"pathlets", "events", "epochs", "epoch_length_s", "rng_seed"},
             {"noise_model"});
  Scenario s;
  s.pathlets = pathlets_from_json(j.at("pathlets"));
  if (!j.at("events").is_array()) fail_schema("scenario.events", "expected a JSON array");
  for (std::size_t i = 0; i < j.at("events").size(); ++i) {
    const json& e = j.at("events")[i];
    const std::string ctx = "events[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("kind")) fail_schema(ctx, "missing key 'kind'");
    const std::string kind = get_string(e, "kind", ctx);
    ScenarioEvent ev;
    if (kind == "arrival") {
      check_keys(e, ctx, {"epoch", "kind", "request"});
      ev.action = Arrival{request_from_json(e.at("request"), ctx + ".request")};
    } else if (kind == "departure") {
      check_keys(e, ctx, {"epoch", "kind", "request_id"});
      ev.action = Departure{get_string(e, "request_id", ctx)};
    } else if (kind == "delay_shock") {
      check_keys(e, ctx, {"epoch", "kind", "pathlet_id", "observed_delay_ms", "duration_epochs"});
      ev.action = DelayShock{get_string(e, "pathlet_id", ctx),
                             get_number(e, "observed_delay_ms", ctx),
                             get_int(e, "duration_epochs", ctx)};
    } else {
      fail_schema(ctx, "'kind' must be 'arrival', 'departure', or 'delay_shock', got '" +
                           kind + "'");
    }
    ev.epoch = get_int(e, "epoch", ctx);
    s.events.push_back(std::move(ev));
  }
  s.epochs = get_int(j, "epochs", "scenario");
  s.epoch_length_s = get_number(j, "epoch_length_s", "scenario");
  s.rng_seed = get_uint(j, "rng_seed", "scenario");
  if (j.contains("noise_model")) {
    const json& n = j.at("noise_model");
    const std::string ctx = "scenario.noise_model";
    if (!n.is_object() || !n.contains("kind")) fail_schema(ctx, "missing key 'kind'");
    const std::string kind = get_string(n, "kind", ctx);
    if (kind == "none") {
      check_keys(n, ctx, {"kind"});
      s.noise = std::monostate{};
    } else if (kind == "truncated_gaussian") {
      check_keys(n, ctx, {"kind", "sigma_ms"});
      s.noise = TruncatedGaussian{get_number(n, "sigma_ms", ctx)};
    } else {
      fail_schema(ctx, "'kind' must be 'none' or 'truncated_gaussian', got '" + kind + "'");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(parse_json_file(path));
}

json to_json(const VirtualTopology& t) {
  json j;
  j["backup_reservation"] = to_string(t.backup_policy());
  j["pathlets"] = json::array();
  for (const auto& [id, pathlet] : t.pathlets()) j["pathlets"].push_back(to_json(pathlet));
  j["residual_bw"] = json::object();
  for (const auto& [id, pathlet] : t.pathlets()) j["residual_bw"][id] = t.residual_bw(id);
  j["reservations"] = json::array();
  for (const auto& [id, res] : t.reservations()) {
    j["reservations"].push_back(
        json{{"request", to_json(res.request)}, {"path", to_json(res.path)}});
  }
  return j;
}

VirtualTopology topology_from_json(const json& j) {
  check_keys(j, "topology", {"backup_reservation", "pathlets", "residual_bw", "reservations"});
  const std::string policy = get_string(j, "backup_reservation", "topology");
  if (policy != "full" && policy != "none") {
    fail_schema("topology", "'backup_reservation' must be 'full' or 'none', got '" + policy + "'");
  }
  VirtualTopology t(policy == "full" ? BackupReservation::Full : BackupReservation::None);
  for (const Pathlet& p : pathlets_from_json(j.at("pathlets"))) t.advertise(p);
  if (!j.at("reservations").is_array()) {
    fail_schema("topology.reservations", "expected a JSON array");
  }
  for (std::size_t i = 0; i < j.at("reservations").size(); ++i) {
    const json& r = j.at("reservations")[i];
    const std::string ctx = "reservations[" + std::to_string(i) + "]";
    check_keys(r, ctx, {"request", "path"});
    t.reserve(request_from_json(r.at("request"), ctx + ".request"),
              embedded_path_from_json(r.at("path"), ctx + ".path"));
  }
  const json& residuals = j.at("residual_bw");
  if (!residuals.is_object()) fail_schema("topology.residual_bw", "expected an object");
  // the stored residuals are redundant with the replay; verify them bit-exactly
  if (residuals.size() != t.pathlets().size()) {
    fail_schema("topology.residual_bw", "pathlet set does not match the snapshot");
  }
  for (const auto& [id, value] : residuals.items()) {
    if (!t.has_pathlet(id)) fail_schema("topology.residual_bw", "unknown pathlet '" + id + "'");
    if (!value.is_number() || value.get<double>() != t.residual_bw(id)) {
      fail_schema("topology.residual_bw", "stored residual for '" + id +
                                              "' does not match the replayed reservations");
    }
  }
  return t;
}

void save_topology(const std::filesystem::path& path, const VirtualTopology& t) {
  write_file(path, to_json(t).dump(2) + "\n");
}

VirtualTopology load_topology(const std::filesystem::path& path) {
  return topology_from_json(parse_json_file(path));
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// Streams data rows of a CSV whose header must match `columns`; the row
/// callback receives (line_number, fields).
template <typename RowFn>
void read_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
              RowFn&& row) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for reading");
  const std::string name = path.filename().string();
  std::string line;
  bool seen_header = false;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (!seen_header) {
      for (std::size_t i = 0; i < std::max(fields.size(), columns.size()); ++i) {
        if (i >= columns.size() || i >= fields.size() || fields[i] != columns[i]) {
          const std::string found = i < fields.size() ? "'" + fields[i] + "'" : "nothing";
          const std::string expected =
              i < columns.size() ? "'" + columns[i] + "'" : "no further column";
          throw Error(Errc::schema_mismatch, name + ": header column " + std::to_string(i + 1) +
                                                 " is " + found + ", expected " + expected);
        }
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != columns.size()) {
      throw Error(Errc::parse_error, name + " line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(columns.size()) + " fields, got " +
                                         std::to_string(fields.size()));
    }
    row(line_no, fields);
  }
  if (!seen_header) {
    throw Error(Errc::schema_mismatch, name + ": missing header row");
  }
}

std::uint32_t parse_asn_field(const std::string& field, const std::string& name,
                              std::size_t line_no) {
  std::uint32_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || value == 0) {
    throw Error(Errc::parse_error,
                name + " line " + std::to_string(line_no) + ": invalid ASN '" + field + "'");
  }
  return value;
}

}  // namespace

std::map<IxpId, std::set<Asn>> load_memberships(const std::filesystem::path& path) {
  std::map<IxpId, std::set<Asn>> memberships;
  const std::string name = path.filename().string();
  read_csv(path, {"ixp_id", "asn"}, [&](std::size_t line_no, const auto& fields) {
    if (fields[0].empty()) {
      throw Error(Errc::parse_error, name + " line " + std::to_string(line_no) + ": empty ixp_id");
    }
    memberships[IxpId{fields[0]}].insert(Asn{parse_asn_field(fields[1], name, line_no)});
  });
  return memberships;
}

std::map<Asn, std::vector<Ipv4Prefix>> load_originations(const std::filesystem::path& path) {
  std::map<Asn, std::vector<Ipv4Prefix>> originations;
  const std::string name = path.filename().string();
  read_csv(path, {"asn", "prefix"}, [&](std::size_t line_no, const auto& fields) {
    const Asn asn{parse_asn_field(fields[0], name, line_no)};
    try {
      originations[asn].push_back(parse_prefix(fields[1]));
    } catch (const Error&) {
      throw Error(Errc::parse_error, name + " line " + std::to_string(line_no) +
                                         ": malformed prefix '" + fields[1] + "'");
    }
  });
  return originations;
}

std::vector<std::pair<Asn, Asn>> load_relationships(const std::filesystem::path& path) {
  std::vector<std::pair<Asn, Asn>> relationships;
  const std::string name = path.filename().string();
  read_csv(path, {"provider_asn", "customer_asn"}, [&](std::size_t line_no, const auto& fields) {
    relationships.emplace_back(Asn{parse_asn_field(fields[0], name, line_no)},
                               Asn{parse_asn_field(fields[1], name, line_no)});
  });
  return relationships;
}

void write_coverage_csv(const std::filesystem::path& path,
                        const std::vector<CoveragePoint>& curve, const std::string& header) {
  std::ostringstream out;
  out << "# " << header << "\n";
  out << "rank,ixp_id,cumulative_addresses\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i + 1) << ',' << curve[i].ixp.value << ',' << curve[i].cumulative_addresses << "\n";
  }
  write_file(path, out.str());
}

void write_diversity_csv(const std::filesystem::path& path, const DiversityMatrix& matrix,
                         const std::string& header) {
  std::ostringstream out;
  out << "# " << header << "\n";
  out << "ixp_id";
  for (const IxpId& id : matrix.ixps) out << ',' << id.value;
  out << "\n";
  for (std::size_t i = 0; i < matrix.ixps.size(); ++i) {
    out << matrix.ixps[i].value;
    for (std::size_t jj = 0; jj < matrix.ixps.size(); ++jj) out << ',' << matrix.values[i][jj];
    out << "\n";
  }
  write_file(path, out.str());
}

void write_metrics_csv(const std::filesystem::path& path, const SimMetrics& metrics,
                       const std::string& header) {
  std::ostringstream out;
  out << "# " << header << "\n";
  out << "metric,key,value\n";
  out << "admitted,," << metrics.admitted << "\n";
  for (const RejectionReason reason :
       {RejectionReason::Disconnected, RejectionReason::BandwidthInfeasible,
        RejectionReason::DelayInfeasible, RejectionReason::NoDisjointBackup}) {
    const auto it = metrics.rejected.find(reason);
    const std::int64_t count = it == metrics.rejected.end() ? 0 : it->second;
    out << "rejected," << to_string(reason) << ',' << count << "\n";
  }
  out << "reroutes,," << metrics.reroutes << "\n";
  for (const auto& [request_id, epochs] : metrics.violation_epochs) {
    out << "violation_epochs," << request_id << ',' << epochs << "\n";
  }
  for (const auto& [request_id, fraction] : metrics.availability) {
    out << "availability," << request_id << ',' << format_double(fraction) << "\n";
  }
  write_file(path, out.str());
}

void write_admissions_csv(const std::filesystem::path& path,
                          const std::vector<AdmissionRecord>& admissions,
                          const std::string& header) {
  std::ostringstream out;
  out << "# " << header << "\n";
  out << "request_id,outcome,delay_ms,pathlets,migrations_performed\n";
  for (const AdmissionRecord& rec : admissions) {
    out << rec.request_id << ',' << rec.outcome << ',';
    if (rec.delay_ms) out << format_double(*rec.delay_ms);
    out << ',';
    for (std::size_t i = 0; i < rec.pathlet_ids.size(); ++i) {
      if (i > 0) out << ';';
      out << rec.pathlet_ids[i];
    }
    out << ',' << rec.migrations << "\n";
  }
  write_file(path, out.str());
}

void write_events_jsonl(const std::filesystem::path& path, const std::vector<LogRecord>& log,
                        std::uint64_t seed) {
  std::ostringstream out;
  json head;
  head["epoch"] = -1;
  head["kind"] = "run_header";
  head["payload"] = {{"seed", seed}, {"version", kVersion}};
  out << head.dump() << "\n";
  for (const LogRecord& rec : log) {
    json line;
    line["epoch"] = rec.epoch;
    line["kind"] = rec.kind;
    line["payload"] = rec.payload;
    out << line.dump() << "\n";
  }
  write_file(path, out.str());
}

}  // namespace cxp::io
