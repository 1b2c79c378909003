#pragma once

#include <vector>

#include "halfline/boundary_conditions.hpp"
#include "halfline/ode.hpp"
#include "halfline/potential.hpp"
#include "halfline/types.hpp"

namespace halfline {

enum class JostSign { Plus, Minus };

// Boundary traces f(0,k), f_x(0,k) of the Jost solutions f+- ~ e^{+-ikx} I.
struct JostFunctions {
  Complex k;
  CMatrix F_plus, Fx_plus;
  CMatrix F_minus, Fx_minus;
  bool has_plus = false;
  bool has_minus = false;
};

struct ForwardOptions {
  OdeOptions ode{1e-12, 1e-15, 1e-3, 0.0, 5'000'000};
};

// Integrates -psi'' + Q psi = k^2 psi from x_max down to 0, starting from the
// exact free Jost solution (Q vanishes beyond x_max).
JostFunctions compute_jost(const MatrixPotential& q, Complex k, JostSign sign,
                           const ForwardOptions& options = {});

JostFunctions compute_jost_pair(const MatrixPotential& q, Complex k,
                                const ForwardOptions& options = {});

// f+(.,k) traces together with the Gram matrix int_0^inf f+^* f+ dx, for Im k > 0.
struct JostGram {
  CMatrix F, Fx, gram;
};
JostGram jost_with_gram(const MatrixPotential& q, Complex k, const ForwardOptions& options = {});

// Expansion coefficients of the regular solution Xi = f- M- + f+ M+:
//   M+- = +-(1/2ik) [F+-^dagger B - F+-_x^dagger A],   Y^dagger(k) = Y(conj k)^*.
struct MCoefficients {
  Complex k;
  CMatrix M_plus, M_minus;
};

// Real k only: the involution reduces to the conjugate transpose.
MCoefficients m_coefficients(const JostFunctions& jf, const BoundaryCondition& bc);

// Any k != 0; the Jost traces at conj(k) are computed internally.
MCoefficients m_coefficients(const MatrixPotential& q, Complex k, const BoundaryCondition& bc,
                             const ForwardOptions& options = {});

// S = M+ M-^{-1}, so that the scattering wave is Psi = f- + f+ S.
CMatrix scattering_matrix(const MCoefficients& mc, double max_condition = 1e12);

struct BoundState {
  double kappa = 0.0;
  CMatrix C2;     // normalisation matrix C_l^2
  int order = 1;  // multiplicity of the zero
};

struct BoundStateOptions {
  double kappa_min = 1e-3;
  double points_per_unit = 400.0;
  double tolerance = 1e-10;
  double virtual_threshold = 1e-3;
  ForwardOptions forward;
};

struct BoundStateResult {
  std::vector<BoundState> states;  // kappa strictly decreasing
  bool virtual_level = false;
  Diagnostics diagnostics;
};

BoundStateResult bound_states(const MatrixPotential& q, const BoundaryCondition& bc,
                              double kappa_max, const BoundStateOptions& options = {});

// Upper bound for bound-state decay rates: kappa^2 <= h_+^2 + V_-, where h_+ is
// the largest positive eigenvalue of H and V_- the deepest negative eigenvalue
// of Q over the samples.
double default_kappa_max(const MatrixPotential& q, const BoundaryCondition& bc);

struct ScatteringData {
  std::vector<double> kgrid;
  std::vector<CMatrix> S;
  CMatrix U_hat;
  std::vector<BoundState> bound_states;
  Diagnostics diagnostics;

  Eigen::Index channels() const { return U_hat.rows(); }
};

// Midpoint-symmetric grid k = +-(j - 1/2) dk, dk = k_max / per_side, sorted
// ascending; k = 0 is never a node.
std::vector<double> symmetric_kgrid(double k_max, int per_side);

struct PipelineOptions {
  int threads = 1;
  BoundStateOptions bound;
};

ScatteringData scattering_pipeline(const MatrixPotential& q, const BoundaryCondition& bc,
                                   const std::vector<double>& kgrid, double kappa_max,
                                   const PipelineOptions& options = {});

}  // namespace halfline
