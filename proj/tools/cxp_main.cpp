// cxp: build virtual topologies from pathlet advertisements, simulate
// admission and rerouting over time, and run the feasibility analyses
// (coverage curves, min-cut path diversity) on IXP datasets.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cxp/error.hpp"
#include "cxp/feasibility.hpp"
#include "cxp/io.hpp"
#include "cxp/sim.hpp"
#include "cxp/stitch.hpp"
#include "cxp/topology.hpp"
#include "cxp/version.hpp"

namespace fs = std::filesystem;

namespace {

// 0 success, 1 usage, 2 parse/io, 3 validation, 4 infeasible
constexpr int kUsageExit = 1;
constexpr int kParseExit = 2;
constexpr int kValidationExit = 3;
constexpr int kInfeasibleExit = 4;

int exit_code_for(cxp::Errc code) {
  switch (code) {
    case cxp::Errc::parse_error:
    case cxp::Errc::io_error:
    case cxp::Errc::schema_mismatch:
    case cxp::Errc::malformed_prefix:
      return kParseExit;
    case cxp::Errc::infeasible:
      return kInfeasibleExit;
    default:
      return kValidationExit;
  }
}

std::string run_header(std::uint64_t seed) {
  return std::string("cxp ") + cxp::kVersion + " seed=" + std::to_string(seed);
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw cxp::Error(cxp::Errc::io_error, "cannot create '" + out + "': " + ec.message());
  return dir;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

int run_topo_build(const std::string& input, const std::string& out, std::uint64_t seed) {
  const auto pathlets = cxp::io::pathlets_from_json(cxp::io::parse_json_file(input));
  const fs::path dir = prepare_out_dir(out);

  cxp::VirtualTopology topo;
  std::ostringstream report;
  report << "# " << run_header(seed) << "\n";
  report << "record,pathlet_id,status,detail\n";
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < pathlets.size(); ++i) {
    const cxp::Pathlet& p = pathlets[i];
    std::string detail;
    const auto violations = cxp::validate_pathlet(p);
    if (!violations.empty()) {
      detail = join(violations, "; ");
    } else if (topo.has_pathlet(p.id)) {
      detail = "duplicate id";
    } else {
      topo.advertise(p);
    }
    report << i << ',' << p.id << ',' << (detail.empty() ? "ok" : "rejected") << ',' << detail
           << "\n";
    if (!detail.empty()) ++rejected;
  }
  cxp::io::save_topology(dir / "topology.json", topo);
  cxp::io::write_file(dir / "validation_report.csv", report.str());

  std::cout << "topology: " << topo.pathlets().size() << " pathlets across "
            << topo.ixps().size() << " IXPs, " << rejected << " rejected\n";
  std::cout << "wrote " << (dir / "topology.json").string() << " and "
            << (dir / "validation_report.csv").string() << "\n";
  return rejected == 0 ? 0 : kValidationExit;
}

int run_simulate(const std::string& input, const std::string& out, std::uint64_t seed,
                 bool seed_given, const cxp::StitchPolicy& policy) {
  cxp::Scenario scenario = cxp::io::load_scenario(input);
  if (seed_given) scenario.rng_seed = seed;
  const fs::path dir = prepare_out_dir(out);

  const cxp::SimResult result = cxp::run_scenario(scenario, policy);

  const std::string header = run_header(scenario.rng_seed);
  cxp::io::write_events_jsonl(dir / "events.jsonl", result.log, scenario.rng_seed);
  cxp::io::write_metrics_csv(dir / "metrics.csv", result.metrics, header);
  cxp::io::write_admissions_csv(dir / "admissions.csv", result.admissions, header);

  std::int64_t rejected = 0;
  for (const auto& [reason, count] : result.metrics.rejected) rejected += count;
  std::cout << "epochs " << scenario.epochs << ": admitted " << result.metrics.admitted
            << ", rejected " << rejected << ", reroutes " << result.metrics.reroutes << "\n";
  std::cout << "wrote events.jsonl, metrics.csv, admissions.csv in " << dir.string() << "\n";
  return 0;
}

cxp::CoverageDataset load_dataset(const std::string& memberships, const std::string& originations,
                                  const std::string& relationships) {
  cxp::CoverageDataset dataset;
  dataset.memberships = cxp::io::load_memberships(memberships);
  if (!originations.empty()) dataset.originations = cxp::io::load_originations(originations);
  if (!relationships.empty()) dataset.relationships = cxp::io::load_relationships(relationships);
  return dataset;
}

int run_coverage(const cxp::CoverageDataset& dataset, int k, bool cone, const std::string& out,
                 std::uint64_t seed) {
  const auto curve = cxp::coverage_curve(dataset, k, cone);
  const fs::path dir = prepare_out_dir(out);
  cxp::io::write_coverage_csv(dir / "coverage.csv", curve, run_header(seed));
  std::cout << "coverage: " << curve.size() << " IXPs, "
            << (curve.empty() ? 0 : curve.back().cumulative_addresses)
            << " addresses\n";
  std::cout << "wrote " << (dir / "coverage.csv").string() << "\n";
  return 0;
}

int run_mincut(const cxp::CoverageDataset& dataset, const std::string& ixps_arg,
               const std::string& out, std::uint64_t seed) {
  const cxp::PathletMap map = cxp::build_pathlet_map(dataset);
  std::vector<cxp::IxpId> ixps;
  if (ixps_arg.empty()) {
    ixps.assign(map.nodes.begin(), map.nodes.end());
  } else {
    std::istringstream stream(ixps_arg);
    std::string token;
    while (std::getline(stream, token, ',')) ixps.push_back(cxp::IxpId{token});
  }
  const cxp::DiversityMatrix matrix = cxp::diversity_matrix(map, ixps);
  const fs::path dir = prepare_out_dir(out);
  cxp::io::write_diversity_csv(dir / "diversity.csv", matrix, run_header(seed));
  std::cout << "diversity: " << ixps.size() << " IXPs, " << map.edges.size()
            << " pathlet-map edges\n";
  std::cout << "wrote " << (dir / "diversity.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control exchange point toolkit: pathlet topologies, QoS path "
               "stitching, deterministic simulation, and feasibility analysis"};
  app.set_version_flag("--version", cxp::kVersion);
  app.require_subcommand(1);

  std::string out = ".";
  std::uint64_t seed = cxp::kDefaultSeed;
  app.add_option("--out", out, "Output directory")->capture_default_str();
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Random seed recorded in all outputs")
          ->capture_default_str();

  CLI::App* topo = app.add_subcommand("topo", "Virtual topology maintenance");
  topo->require_subcommand(1);
  topo->fallthrough();
  CLI::App* topo_build =
      topo->add_subcommand("build", "Build a topology snapshot from pathlet advertisements");
  topo_build->fallthrough();
  std::string advertisements;
  topo_build->add_option("advertisements", advertisements, "Pathlet advertisement JSON file")
      ->required();

  CLI::App* simulate = app.add_subcommand("simulate", "Run a scenario epoch by epoch");
  simulate->fallthrough();
  std::string scenario_file;
  cxp::StitchPolicy policy;
  std::string backup = "full";
  simulate->add_option("scenario", scenario_file, "Scenario JSON file")->required();
  simulate->add_option("--switching-delay-ms", policy.switching_delay_ms,
                       "Per-IXP switching delay added between pathlets")
      ->capture_default_str();
  simulate->add_option("--migration-budget", policy.migration_budget,
                       "Existing paths considered for migration per admission")
      ->capture_default_str();
  simulate->add_option("--tolerance", policy.guarantee_tolerance,
                       "Relative slack on advertised guarantees")
      ->capture_default_str();
  simulate->add_option("--backup-reservation", backup, "Backup bandwidth policy: full or none")
      ->check(CLI::IsMember({"full", "none"}))
      ->capture_default_str();

  CLI::App* feasibility = app.add_subcommand("feasibility", "Dataset feasibility analyses");
  feasibility->require_subcommand(1);
  feasibility->fallthrough();
  std::string memberships;
  std::string originations;
  std::string relationships;

  CLI::App* coverage =
      feasibility->add_subcommand("coverage", "Greedy IP address-space coverage curve");
  coverage->fallthrough();
  coverage->add_option("--memberships", memberships, "memberships.csv (ixp_id,asn)")->required();
  coverage->add_option("--originations", originations, "originations.csv (asn,prefix)")
      ->required();
  coverage->add_option("--relationships", relationships,
                       "relationships.csv (provider_asn,customer_asn)");
  int k = 1;
  bool cone = false;
  coverage->add_option("--k", k, "Number of IXPs to select")->required();
  coverage->add_flag("--cone", cone, "Expand members by their 1-hop customer cone");

  CLI::App* mincut = feasibility->add_subcommand("mincut", "Pairwise min-cut path diversity");
  mincut->fallthrough();
  mincut->add_option("--memberships", memberships, "memberships.csv (ixp_id,asn)")->required();
  std::string ixps_arg;
  mincut->add_option("--ixps", ixps_arg, "Comma-separated IXP ids (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  try {
    if (topo_build->parsed()) {
      return run_topo_build(advertisements, out, seed);
    }
    if (simulate->parsed()) {
      policy.backup_reservation =
          backup == "full" ? cxp::BackupReservation::Full : cxp::BackupReservation::None;
      return run_simulate(scenario_file, out, seed, seed_opt->count() > 0, policy);
    }
    if (coverage->parsed()) {
      return run_coverage(load_dataset(memberships, originations, relationships), k, cone, out,
                          seed);
    }
    if (mincut->parsed()) {
      return run_mincut(load_dataset(memberships, "", ""), ixps_arg, out, seed);
    }
  } catch (const cxp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageExit;
  }
  return kUsageExit;
}
