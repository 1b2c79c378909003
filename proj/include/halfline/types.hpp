#pragma once

#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace halfline {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  NotUnitary,
  BadParams,
  ShapeMismatch,
  IntegratorFailure,
  ZeroWavenumber,
  SingularCoefficient,
  ConstraintViolated,
  AllSingular,
  SingularAtOrigin,
  DomainViolation,
  TailTooLarge,
  IllConditioned,
  NonInvertibleTrace,
  JostZeroOnAxis,
  VirtualLevelSuspected,
  TailNotDecayed,
  UnitaryCompletionDegenerate,
  SystemSingular,
  ConfigError,
};

const char* to_string(ErrorKind kind);

// Numerical or contract failure. `value` carries the offending norm or
// location when there is one (NaN otherwise).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        double value = std::numeric_limits<double>::quiet_NaN());

  ErrorKind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }

 private:
  ErrorKind kind_;
  double value_;
};

// Non-fatal findings collected along a pipeline: named residual norms and
// human-readable warnings.
struct Diagnostics {
  std::map<std::string, double> values;
  std::vector<std::string> warnings;

  void set(const std::string& key, double v) { values[key] = v; }
  void warn(std::string message) { warnings.push_back(std::move(message)); }
  void merge(const Diagnostics& other, const std::string& prefix = {});
};

}  // namespace halfline
