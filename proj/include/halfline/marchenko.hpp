#pragma once

#include <functional>
#include <vector>

#include "halfline/forward_scattering.hpp"
#include "halfline/quadrature.hpp"

namespace halfline {

// Marchenko kernel sampled on the uniform grid t = 0, dt, ..., t_end together
// with its exact derivative; evaluated by cubic Hermite interpolation and
// taken as zero beyond t_end.
class GKernel {
 public:
  GKernel() = default;
  GKernel(double dt, std::vector<CMatrix> g, std::vector<CMatrix> dg);

  static GKernel from_function(Eigen::Index n, double t_end, double dt,
                               const std::function<CMatrix(double)>& g,
                               const std::function<CMatrix(double)>& dg);

  Eigen::Index channels() const { return g_.empty() ? 0 : g_.front().rows(); }
  double dt() const { return dt_; }
  double t_end() const { return dt_ * static_cast<double>(g_.size() - 1); }
  const std::vector<CMatrix>& samples() const { return g_; }
  const std::vector<CMatrix>& derivative_samples() const { return dg_; }

  void evaluate(double t, CMatrix& out) const;
  CMatrix operator()(double t) const;

 private:
  double dt_ = 0.0;
  std::vector<CMatrix> g_, dg_;
};

struct GOptions {
  double t_max = 0.0;       // Nystrom truncation; G is built on [0, 2 t_max]
  double dt = 0.005;
  double tail_bound = 1e-3;  // on ||S - U_hat - tail model|| at the grid ends
  int tail_terms = 7;        // sum_m c_m / (1 + ik)^m fitted per entry
  double tail_fit_fraction = 0.6;
  int threads = 1;
};

// G(t) = sum_l C_l^2 e^{-kappa_l t} + (1/2pi) int (S(k) - U_hat) e^{ikt} dk.
// The slowly decaying part of S - U_hat is fitted by the tail model and its
// transform t^{m-1} e^{-t} / (m-1)! added in closed form; the remainder is
// summed directly over the midpoint grid.
GKernel build_g(const ScatteringData& data, const GOptions& options,
                Diagnostics* diagnostics = nullptr);

struct NystromOptions {
  double panel_width = 0.25;
  int order = 10;
  double max_condition = 1e12;
};

// K(x, .) at the quadrature nodes of [x, t_max] for one x.
struct KernelSlice {
  double x = 0.0;
  std::vector<double> nodes, weights;
  std::vector<CMatrix> K;
  double condition = 0.0;
  double residual = 0.0;  // relative residual of the discrete system

  // Nystrom interpolant K(x,y) = -G(x+y) - sum_j w_j K_j G(t_j + y).
  CMatrix at(const GKernel& g, double y) const;
};

// K(x,y) + G(x+y) + int_x^T K(x,t) G(t+y) dt = 0 with the given rule on [x, T].
KernelSlice solve_marchenko(const GKernel& g, double x, const QuadratureRule& rule,
                            double max_condition = 1e12);

KernelSlice solve_marchenko(const GKernel& g, double x, double t_max,
                            const NystromOptions& options = {});

struct TransformKernel {
  std::vector<double> xgrid;
  std::vector<CMatrix> diagonal;  // K(x, x)
  std::vector<double> residual, condition;
};

TransformKernel transform_kernel(const GKernel& g, const std::vector<double>& xgrid,
                                 double t_max, const NystromOptions& options = {},
                                 int threads = 1);

// Q(x) = -2 d/dx K(x,x) with 7-point differences, hermitised.
MatrixPotential recover_potential(const TransformKernel& k, Diagnostics* diagnostics = nullptr);

// f+(0,k) and f+_x(0,k) from the transformation-operator representation in
// the variables L(x,s) = K(x, x+s):
//   f+(0,k) = I + int L(0,s) e^{iks} ds,  f+_x(0,k) = ik f+(0,k) + int L_x(0,s) e^{iks} ds,
// with L_x from one-sided differences over slices at x = 0, delta, 2 delta, 3 delta.
class KernelJost {
 public:
  KernelJost(const GKernel& g, double t_max, const NystromOptions& options, double delta = 2e-3);

  void traces(Complex k, CMatrix& f, CMatrix& fx) const;

 private:
  QuadratureRule s_rule_;
  std::vector<CMatrix> l0_, lx_;
  Eigen::Index n_ = 0;
};

JostFunctions reconstruct_jost_from_kernel(const KernelJost& kernel, double k);

// U = [Psi - i Psi_x][Psi + i Psi_x]^{-1} from the scattering wave
// Psi = f- + f+ S at several grid nodes closest to `wavenumbers`, averaged and
// polar-unitarised; the spread across nodes lands in the diagnostics.
CMatrix recover_boundary_conditions(const ScatteringData& data, const KernelJost& kernel,
                                    const std::vector<double>& wavenumbers,
                                    Diagnostics* diagnostics = nullptr);

struct InverseOptions {
  GOptions g;
  NystromOptions nystrom;
  double x_step = 0.02;
  double x_end = 0.0;  // 0: t_max
  double jost_delta = 2e-3;
  std::vector<double> u_wavenumbers{0.5, 1.0, 1.5, 2.0, 2.5};
  int threads = 1;
  bool split_diagonal = true;  // diagonal data: n independent scalar inversions
};

struct InverseResult {
  MatrixPotential Q_hat;
  CMatrix U_hat_recovered;
  CMatrix U_recovered;
  TransformKernel kernel;
  Diagnostics diagnostics;
};

// Diagonal S, U_hat and C^2 (to exact zero off the diagonal).
bool is_diagonal_data(const ScatteringData& data);

// Restriction of the data to channel j.
ScatteringData channel_data(const ScatteringData& data, Eigen::Index j);

InverseResult invert(const ScatteringData& data, const InverseOptions& options);

}  // namespace halfline
