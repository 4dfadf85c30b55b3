#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "cxp/feasibility.hpp"
#include "cxp/sim.hpp"
#include "cxp/topology.hpp"

namespace cxp::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Parses a whole document; errors carry the file name and byte offset.
nlohmann::json parse_json_file(const std::filesystem::path& path);

// Strict converters: snake_case keys, exactly the documented fields, unknown
// keys rejected. The ctx string prefixes every error ("pathlets[3]").
nlohmann::json to_json(const Pathlet& p);
Pathlet pathlet_from_json(const nlohmann::json& j, const std::string& ctx);
std::vector<Pathlet> pathlets_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ServiceRequest& r);
ServiceRequest request_from_json(const nlohmann::json& j, const std::string& ctx);
std::vector<ServiceRequest> requests_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EmbeddedPath& p);
EmbeddedPath embedded_path_from_json(const nlohmann::json& j, const std::string& ctx);

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// Snapshot with pathlets, residuals, and reservations. Loading replays the
/// advertisements and reservations, then checks the replayed residuals
/// against the stored ones bit-exactly.
nlohmann::json to_json(const VirtualTopology& t);
VirtualTopology topology_from_json(const nlohmann::json& j);
void save_topology(const std::filesystem::path& path, const VirtualTopology& t);
VirtualTopology load_topology(const std::filesystem::path& path);

// CSV ingestion. Headers must match the documented schema; a mismatch names
// the offending column. Blank lines and `#` comment lines are skipped.
// Fields must not contain commas.
std::map<IxpId, std::set<Asn>> load_memberships(const std::filesystem::path& path);
std::map<Asn, std::vector<Ipv4Prefix>> load_originations(const std::filesystem::path& path);
std::vector<std::pair<Asn, Asn>> load_relationships(const std::filesystem::path& path);

/// The `header` string is written as a leading `# ` comment line on every
/// CSV, recording seed and tool version for reproducibility.
void write_coverage_csv(const std::filesystem::path& path,
                        const std::vector<CoveragePoint>& curve, const std::string& header);
void write_diversity_csv(const std::filesystem::path& path, const DiversityMatrix& matrix,
                         const std::string& header);
void write_metrics_csv(const std::filesystem::path& path, const SimMetrics& metrics,
                       const std::string& header);
void write_admissions_csv(const std::filesystem::path& path,
                          const std::vector<AdmissionRecord>& admissions,
                          const std::string& header);

/// JSON Lines event log; the first record is a run header carrying the seed
/// and tool version, with epoch -1 so real epochs sort after it.
void write_events_jsonl(const std::filesystem::path& path, const std::vector<LogRecord>& log,
                        std::uint64_t seed);

}  // namespace cxp::io
