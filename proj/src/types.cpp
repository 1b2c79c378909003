#include "halfline/types.hpp"

namespace halfline {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IntegratorFailure: return "IntegratorFailure";
    case ErrorKind::ZeroWavenumber: return "ZeroWavenumber";
    case ErrorKind::SingularCoefficient: return "SingularCoefficient";
    case ErrorKind::ConstraintViolated: return "ConstraintViolated";
    case ErrorKind::AllSingular: return "AllSingular";
    case ErrorKind::SingularAtOrigin: return "SingularAtOrigin";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::TailTooLarge: return "TailTooLarge";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NonInvertibleTrace: return "NonInvertibleTrace";
    case ErrorKind::JostZeroOnAxis: return "JostZeroOnAxis";
    case ErrorKind::VirtualLevelSuspected: return "VirtualLevelSuspected";
    case ErrorKind::TailNotDecayed: return "TailNotDecayed";
    case ErrorKind::UnitaryCompletionDegenerate: return "UnitaryCompletionDegenerate";
    case ErrorKind::SystemSingular: return "SystemSingular";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, double value)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      value_(value) {}

void Diagnostics::merge(const Diagnostics& other, const std::string& prefix) {
  for (const auto& [k, v] : other.values) values[prefix + k] = v;
  for (const auto& w : other.warnings) warnings.push_back(prefix + w);
}

}  // namespace halfline
