#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "halfline/boundary_conditions.hpp"
#include "halfline/ode.hpp"
#include "halfline/potential.hpp"

namespace halfline {

// Zero-energy solution matrix Xi0'' = Q Xi0 with Xi0(0) = (U0 + I)/2 and
// Xi0_x(0) = i(U0 - I)/2, sampled on `grid`.
struct ZeroEnergyFrame {
  std::vector<double> grid;
  std::vector<CMatrix> Xi0, Xi0x;
  CMatrix U0;
};

// V = Xi0_x Xi0^{-1}. Nodes with cond(Xi0) above the threshold are flagged and
// carry an all-NaN V.
struct DarbouxFactor {
  std::vector<double> grid;
  std::vector<CMatrix> V;
  std::vector<bool> singular;
  std::vector<double> singular_points;

  bool usable(std::size_t i) const { return !singular[i]; }
};

struct FrameOptions {
  OdeOptions ode{1e-13, 1e-15, 1e-4, 0.0, 5'000'000};
  double max_jump_near_origin = 0.5;  // ||Q(x_1) - Q(x_0)||_F
  double singular_condition = 1e10;
};

CMatrix choose_U0(const BoundaryCondition& bc, const std::optional<CMatrix>& override_u0 = {});

// Integrates outward node to node over the potential grid (or `grid` if given).
ZeroEnergyFrame zero_energy_frame(const MatrixPotential& q, const CMatrix& u0,
                                  const FrameOptions& options = {},
                                  std::optional<std::vector<double>> grid = {});

DarbouxFactor darboux_potential(const ZeroEnergyFrame& frame, const FrameOptions& options = {});

// Per-node ||V' + V^2 - Q|| with V' from 7-point centred differences. Grid
// endpoints, singular nodes, and nodes whose stencil is not resolved
// (h * max ||V|| over the stencil above `resolution`) are NaN.
struct ResidualOptions {
  int half_width = 3;
  double resolution = 0.02;
};
std::vector<double> riccati_residual(const DarbouxFactor& v, const MatrixPotential& q,
                                     const ResidualOptions& options = {});

// Largest finite entry of a residual profile (0 if none).
double max_finite(const std::vector<double>& profile);

// Vector test function with analytic first and second derivatives.
struct TestFunction {
  std::function<CVector(double)> value, derivative, second;
};

struct FactorizationReport {
  double interior = 0.0;         // max ||D*D psi - L psi|| over usable interior nodes
  double boundary = 0.0;         // max over test functions of the domain residuals at 0
  double initial_condition = 0.0;  // ||P V(0) + P H||
  std::vector<double> per_function;
};

// D psi = i(psi' - V psi), D* phi = i(phi' + V phi); phi' by finite differences.
FactorizationReport factorization_check(const DarbouxFactor& v, const BoundaryCondition& bc,
                                        const MatrixPotential& q,
                                        const std::vector<TestFunction>& tests,
                                        const ResidualOptions& options = {},
                                        double domain_tolerance = 1e-8);

struct PartnerOperator {
  MatrixPotential Q;
  BoundaryCondition bc;
  CMatrix H;  // Robin matrix of the partner on the range of the original P_perp
};

// Q~ = Q - 2V', with the boundary condition P phi(0) = 0, P_perp(phi_x + V phi)(0) = 0.
PartnerOperator partner_operator(const DarbouxFactor& v, const BoundaryCondition& bc,
                                 const MatrixPotential& q, const ResidualOptions& options = {});

}  // namespace halfline
