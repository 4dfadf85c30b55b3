#include "cxp/pathlet.hpp"

#include "cxp/error.hpp"

namespace cxp {

std::vector<std::string> validate_pathlet(const Pathlet& p) {
  std::vector<std::string> violations;
  if (p.id.empty()) violations.push_back("empty id");
  if (p.owner.value == 0) violations.push_back("non-positive owner ASN");
  if (p.ingress.value.empty()) violations.push_back("empty ingress IXP");
  if (p.egress.value.empty()) violations.push_back("empty egress IXP");
  if (!p.ingress.value.empty() && p.ingress == p.egress) violations.push_back("self-loop");
  if (!(p.advertised_delay_ms > 0.0)) violations.push_back("non-positive delay");
  if (!(p.capacity_mbps > 0.0)) violations.push_back("non-positive capacity");
  return violations;
}

std::vector<std::string> validate_request(const ServiceRequest& r) {
  std::vector<std::string> violations;
  if (r.id.empty()) violations.push_back("empty id");
  if (r.src.value.empty()) violations.push_back("empty src IXP");
  if (r.dst.value.empty()) violations.push_back("empty dst IXP");
  if (!r.src.value.empty() && r.src == r.dst) violations.push_back("src equals dst");
  if (!(r.min_bw_mbps > 0.0)) violations.push_back("non-positive bandwidth demand");
  if (!(r.max_delay_ms > 0.0)) violations.push_back("non-positive delay bound");
  return violations;
}

double path_delay(std::span<const Pathlet> pathlets, double switching_delay_ms) {
  if (pathlets.empty()) throw Error(Errc::chain_error, "empty pathlet sequence");
  double sum = 0.0;
  for (std::size_t i = 0; i < pathlets.size(); ++i) {
    if (i > 0 && pathlets[i - 1].egress != pathlets[i].ingress) {
      throw Error(Errc::chain_error,
                  "pathlet '" + pathlets[i - 1].id + "' egress '" + pathlets[i - 1].egress.value +
                      "' does not chain into pathlet '" + pathlets[i].id + "' ingress '" +
                      pathlets[i].ingress.value + "'");
    }
    sum += pathlets[i].advertised_delay_ms;
  }
  return sum + switching_delay_ms * static_cast<double>(pathlets.size() - 1);
}

}  // namespace cxp
