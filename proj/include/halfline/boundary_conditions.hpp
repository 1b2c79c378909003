#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halfline/types.hpp"

namespace halfline {

// Self-adjoint vertex condition
//   (i/2)(U* - I) psi(0) + (1/2)(U* + I) psi_x(0) = 0
// parameterised by a unitary U. Every derived matrix is computed once at
// construction, which is also the only validation point.
class BoundaryCondition {
 public:
  static constexpr double kUnitaryTolerance = 1e-10;
  static constexpr double kMinusOneThreshold = 1e-8;

  explicit BoundaryCondition(const CMatrix& u, double minus_one_threshold = kMinusOneThreshold);

  Eigen::Index channels() const { return u_.rows(); }
  const CMatrix& U() const { return u_; }
  const CMatrix& A() const { return a_; }  // (U + I)/2
  const CMatrix& B() const { return b_; }  // i(U - I)/2
  const CMatrix& U_hat() const { return u_hat_; }
  const CMatrix& P() const { return p_; }
  const CMatrix& P_perp() const { return p_perp_; }
  const CMatrix& H() const { return h_; }

  // Set when the condition came from a named family; used for serialisation.
  const std::string& kind() const { return kind_; }
  void set_kind(std::string kind) { kind_ = std::move(kind); }

 private:
  CMatrix u_, a_, b_, u_hat_, p_, p_perp_, h_;
  std::string kind_;
};

BoundaryCondition make_bc(const CMatrix& u);

enum class StandardKind { Dirichlet, Neumann, Kirchhoff, Robin };

StandardKind parse_standard_kind(const std::string& name);

// robin takes n eigen-phases in (-pi, pi]; U = diag(exp(i phase_j)).
BoundaryCondition standard_bc(StandardKind kind, int n,
                              const std::vector<double>& phases = {});

// Spectral map: eigenvalue -1 stays -1, everything else on the
// unit circle goes to +1.
CMatrix high_energy_limit(const CMatrix& u,
                          double minus_one_threshold = BoundaryCondition::kMinusOneThreshold);

// Robin matrix H with P psi_x(0) + P H psi(0) = 0 on the range of P.
// In the eigenbasis of U, H = tan(phi/2) for e^{i phi} != -1 and 0 otherwise.
CMatrix robin_matrix(const BoundaryCondition& bc);

// Inverse of robin_matrix: the unitary whose Dirichlet part is the range of
// `p_perp` and whose Robin matrix is `h` (h must live on the range of I - p_perp).
CMatrix unitary_from_robin(const CMatrix& p_perp, const CMatrix& h);

// ||(i/2)(U* - I) psi0 + (1/2)(U* + I) psix0||
double check_bc(const BoundaryCondition& bc, const CMatrix& psi0, const CMatrix& psix0);

}  // namespace halfline
