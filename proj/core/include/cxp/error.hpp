#pragma once

#include <stdexcept>
#include <string>

namespace cxp {

enum class Errc {
  invalid_pathlet,
  duplicate_pathlet,
  unknown_pathlet,
  insufficient_residual,
  unknown_request,
  duplicate_request,
  invalid_request,
  invalid_path,
  chain_error,
  unknown_ixp,
  missing_sample,
  malformed_scenario,
  malformed_prefix,
  schema_mismatch,
  parse_error,
  io_error,
  infeasible,
};

constexpr const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_pathlet: return "InvalidPathlet";
    case Errc::duplicate_pathlet: return "DuplicatePathletId";
    case Errc::unknown_pathlet: return "UnknownPathlet";
    case Errc::insufficient_residual: return "InsufficientResidual";
    case Errc::unknown_request: return "UnknownRequest";
    case Errc::duplicate_request: return "DuplicateRequest";
    case Errc::invalid_request: return "InvalidRequest";
    case Errc::invalid_path: return "InvalidPath";
    case Errc::chain_error: return "ChainError";
    case Errc::unknown_ixp: return "UnknownIxp";
    case Errc::missing_sample: return "MissingSample";
    case Errc::malformed_scenario: return "MalformedScenario";
    case Errc::malformed_prefix: return "MalformedPrefix";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IoError";
    case Errc::infeasible: return "Infeasible";
  }
  return "UnknownError";
}

/// Domain error carrying a machine-checkable code plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cxp
