#pragma once

#include <memory>
#include <vector>

#include "halfline/marchenko.hpp"

namespace halfline {

// Jost traces of one scalar ray on a k-grid: F(k) = f+(0,k), Fx(k) = f+_x(0,k),
// and the minus-sign traces Fbar(k) = F(-k), Fxbar(k) = Fx(-k).
struct RayTraces {
  std::vector<Complex> F, Fx, Fbar, Fxbar;
};

RayTraces ray_traces(const MatrixPotential& ray, const std::vector<double>& kgrid,
                     const ForwardOptions& options = {}, int threads = 1);

struct GraphScattering {
  CMatrix S;
  Complex M;
};

// Kirchhoff star: M = (i^{n-1}/n) prod F_j sum F'_j/F_j and
// S_ij = 2 i^n k prod F / (n F_i F_j M) - delta_ij Fbar_i / F_i.
GraphScattering graph_scattering(const CVector& F, const CVector& Fx, const CVector& Fbar,
                                 double k);

struct StarForward {
  std::vector<double> kgrid;
  std::vector<CMatrix> S;
  std::vector<Complex> M;
  std::vector<RayTraces> rays;
};

// Per-ray scalar integrations assembled by graph_scattering; q must be diagonal.
StarForward star_forward(const MatrixPotential& q, const std::vector<double>& kgrid,
                         const ForwardOptions& options = {}, int threads = 1);

// Reflection data of a subset of rays (0-based indices).
struct RayScatteringData {
  int n = 0;
  std::vector<double> kgrid;
  std::vector<int> rays;
  std::vector<std::vector<Complex>> R;   // R[r][k] for rays[r]
  std::vector<double> kappa;
  std::vector<std::vector<double>> b;    // b[l][r] for rays[r]
  std::vector<int> orders;               // default 1

  void validate() const;
};

// Restriction of full scattering data to the listed rays.
RayScatteringData partial_data(const ScatteringData& full, const std::vector<int>& rays);

struct RayInversion {
  MatrixPotential q;
  std::vector<Complex> F, Fx, Fbar, Fxbar;  // on the k-grid, from the kernel
  Diagnostics diagnostics;
  std::shared_ptr<KernelJost> jost;          // continuation to complex k
};

// Scalar Marchenko inversion of one ray: G(t) = sum_l b_l e^{-kappa_l t}
// + (1/2pi) int (R - u_hat) e^{ikt} dk.
RayInversion diagonal_marchenko(const std::vector<double>& kgrid, const std::vector<Complex>& R,
                                const std::vector<double>& kappa, const std::vector<double>& b,
                                Complex u_hat, const InverseOptions& options);

struct DispersionOptions {
  double virtual_error = 1e-4;
  double virtual_warning = 1e-2;
};

struct NormalizedDispersion {
  std::vector<Complex> M_hat;
  int virtual_order = 0;  // order of the zero of M at k = 0
  Diagnostics diagnostics;
};

// M_hat(k) = M(k) / (i^n (k+i)) prod_l [(k + i kappa_l)/(k - i kappa_l)]^{m_l}.
// A zero of M at k = 0 (virtual level) is detected from the small-|k| slope of |M|.
NormalizedDispersion normalized_dispersion(const std::vector<double>& kgrid,
                                           const std::vector<Complex>& M, int n,
                                           const std::vector<double>& kappa,
                                           const std::vector<int>& orders,
                                           const DispersionOptions& options = {});

// Order of the zero of |f| at k = 0 from the log-log slope at the two
// smallest positive nodes (0 when the slope is below 1/2).
int zero_order_at_origin(const std::vector<double>& kgrid, const std::vector<double>& modulus);

// -(1/pi) PV int f(k') / (k' - k) dk' on a uniform midpoint grid, by
// subtracting f(k) and integrating the remaining log term in closed form.
std::vector<double> hilbert_phase(const std::vector<double>& kgrid, const std::vector<double>& f);

struct ArgumentOptions {
  double tail_tolerance = 1e-2;
  bool tail_correction = true;  // add the a/k^2 tail of ln|M_hat| beyond the grid
};

// arg M from |M| with the zeros i kappa_l (orders m_l) and a zero of order
// `virtual_order` at k = 0, wrapped to (-pi, pi].
std::vector<double> argument_reconstruction(const std::vector<double>& kgrid,
                                            const std::vector<double>& modulus, int n,
                                            const std::vector<double>& kappa,
                                            const std::vector<int>& orders, int virtual_order,
                                            const ArgumentOptions& options = {});

struct StarRecoveryOptions {
  InverseOptions inverse;
  ArgumentOptions argument;
  double det_threshold = 1e-6;
  double completion_threshold = 1e-10;
  int threads = 1;
};

struct GraphRecoveryResult {
  MatrixPotential q_n;
  std::vector<MatrixPotential> q_given;
  std::vector<CMatrix> S_full;
  std::vector<Complex> M;
  std::vector<Complex> F_n, Fx_n;
  std::vector<double> b_n;  // normalisation entries of the last ray
  Diagnostics diagnostics;
};

// Recovers the last ray of a Kirchhoff star from R_1..R_{n-1}, kappa_l and
// b_{l,1..n-1}.
GraphRecoveryResult recover_last_ray(const RayScatteringData& partial,
                                     const StarRecoveryOptions& options);

}  // namespace halfline
