#include "flexsmc/control.hpp"

#include <stdexcept>

namespace flexsmc {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kIntelligent:
      return "intelligent";
    case ControllerKind::kAdaptive:
      return "adaptive";
    case ControllerKind::kExact:
      return "exact";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(std::string_view name) {
  if (name == "intelligent") return ControllerKind::kIntelligent;
  if (name == "adaptive") return ControllerKind::kAdaptive;
  if (name == "exact") return ControllerKind::kExact;
  throw ConfigError("controller: unknown kind '" + std::string(name) + "' (expected intelligent, adaptive or exact)");
}

ReachingReport reaching_diagnostic(std::span<const double> s, double dt, double phi_bl, double eta) {
  if (s.empty()) throw std::invalid_argument("reaching_diagnostic: empty series");
  if (!(dt > 0)) throw std::invalid_argument("reaching_diagnostic: dt must be > 0");
  ReachingReport report;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double mid = 0.5 * (s[k] + s[k + 1]);
    if (std::abs(mid) <= phi_bl) continue;
    ++report.outside_count;
    const double rate = (s[k + 1] - s[k]) / dt;
    if (mid * rate <= -eta * std::abs(mid)) ++report.satisfied_count;
  }
  report.fraction = report.outside_count == 0
                        ? 1.0
                        : static_cast<double>(report.satisfied_count) / static_cast<double>(report.outside_count);
  return report;
}

}  // namespace flexsmc
