#include "halfline/forward_scattering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "halfline/linalg.hpp"
#include "halfline/parallel.hpp"

namespace halfline {

namespace {

// Integrates the first-order system for [psi; psi_x] (and optionally the Gram
// accumulator) from x_max to 0, starting from the free solution normalised to
// unit amplitude at x_max. The caller rescales by exp(i s k x_max).
CMatrix integrate_inward(const MatrixPotential& q, Complex k, double s, bool with_gram,
                         const ForwardOptions& options) {
  const Eigen::Index n = q.channels();
  const Complex k2 = k * k;
  const Eigen::Index rows = with_gram ? 3 * n : 2 * n;
  CMatrix y = CMatrix::Zero(rows, n);
  y.topRows(n) = CMatrix::Identity(n, n);
  y.middleRows(n, n) = (s * kI * k) * CMatrix::Identity(n, n);

  CMatrix qx(n, n);
  auto rhs = [&](double x, const CMatrix& state, CMatrix& d) {
    q.evaluate(x, qx);
    d.topRows(n) = state.middleRows(n, n);
    d.middleRows(n, n).noalias() = qx * state.topRows(n);
    d.middleRows(n, n) -= k2 * state.topRows(n);
    if (with_gram) d.bottomRows(n).noalias() = -state.topRows(n).adjoint() * state.topRows(n);
  };
  Dopri5<CMatrix> stepper(options.ode);
  double step = std::min(options.ode.initial_step, q.x_max());
  stepper.integrate(rhs, q.x_max(), 0.0, y, step);
  return y;
}

void fill_sign(const MatrixPotential& q, Complex k, JostSign sign, const ForwardOptions& options,
               JostFunctions& out) {
  const Eigen::Index n = q.channels();
  const double s = sign == JostSign::Plus ? 1.0 : -1.0;
  CMatrix f, fx;
  if (q.is_zero()) {
    f = CMatrix::Identity(n, n);
    fx = (s * kI * k) * CMatrix::Identity(n, n);
  } else {
    const CMatrix y = integrate_inward(q, k, s, false, options);
    const Complex phase = std::exp(s * kI * k * q.x_max());
    f = phase * y.topRows(n);
    fx = phase * y.bottomRows(n);
  }
  if (sign == JostSign::Plus) {
    out.F_plus = std::move(f);
    out.Fx_plus = std::move(fx);
    out.has_plus = true;
  } else {
    out.F_minus = std::move(f);
    out.Fx_minus = std::move(fx);
    out.has_minus = true;
  }
}

MCoefficients coefficients_from_conjugate_traces(Complex k, const JostFunctions& at_conj,
                                                 const BoundaryCondition& bc) {
  if (k == 0.0) throw Error(ErrorKind::ZeroWavenumber, "M coefficients are undefined at k = 0");
  if (!at_conj.has_plus || !at_conj.has_minus)
    throw Error(ErrorKind::BadParams, "both Jost signs are required");
  const Complex scale = 1.0 / (2.0 * kI * k);
  MCoefficients mc;
  mc.k = k;
  mc.M_plus = scale * (at_conj.F_plus.adjoint() * bc.B() - at_conj.Fx_plus.adjoint() * bc.A());
  mc.M_minus = -scale * (at_conj.F_minus.adjoint() * bc.B() - at_conj.Fx_minus.adjoint() * bc.A());
  return mc;
}

// Signed eigen-phase of U^* V_f closest to zero, where V_f is the unitary image
// of the Lagrange plane spanned by the decaying Jost solution at k = i kappa.
// It vanishes exactly when M-(i kappa) is rank deficient.
struct PhaseProbe {
  double theta = 0.0;
  CVector phases;
};

PhaseProbe probe_phase(const MatrixPotential& q, const BoundaryCondition& bc, double kappa,
                       const ForwardOptions& options) {
  JostFunctions jf;
  fill_sign(q, Complex(0.0, kappa), JostSign::Plus, options, jf);
  const CMatrix vf = (jf.F_plus - kI * jf.Fx_plus) * (jf.F_plus + kI * jf.Fx_plus).inverse();
  const CMatrix w = bc.U().adjoint() * vf;
  Eigen::ComplexEigenSolver<CMatrix> es(w, false);
  PhaseProbe p;
  p.phases = es.eigenvalues();
  double best = kPi + 1.0;
  for (Eigen::Index i = 0; i < p.phases.size(); ++i) {
    const double th = std::arg(p.phases(i));
    if (std::abs(th) < std::abs(best)) best = th;
  }
  p.theta = best;
  return p;
}

BoundState assemble_bound_state(const MatrixPotential& q, const BoundaryCondition& bc,
                                double kappa, int order, const ForwardOptions& options,
                                Diagnostics& diag) {
  const JostGram jg = jost_with_gram(q, Complex(0.0, kappa), options);
  const Eigen::Index n = q.channels();
  const CMatrix plus = jg.F + kI * jg.Fx;
  const CMatrix vf = (jg.F - kI * jg.Fx) * plus.inverse();
  Eigen::JacobiSVD<CMatrix> svd(vf - bc.U(), Eigen::ComputeFullV);
  // Null space of V_f - U: right singular vectors of the `order` smallest values.
  CMatrix w = svd.matrixV().rightCols(order);
  CMatrix coeff = plus.inverse() * w;  // f+ coeff spans the eigenspace
  const CMatrix overlap = coeff.adjoint() * jg.gram * coeff;
  BoundState bs;
  bs.kappa = kappa;
  bs.order = order;
  bs.C2 = hermitian_part(coeff * overlap.inverse() * coeff.adjoint());
  const double smallest = svd.singularValues()(n - 1);
  std::ostringstream key;
  key << "bound_state_null_residual[" << kappa << "]";
  diag.set(key.str(), smallest);
  return bs;
}

}  // namespace

JostFunctions compute_jost(const MatrixPotential& q, Complex k, JostSign sign,
                           const ForwardOptions& options) {
  JostFunctions jf;
  jf.k = k;
  fill_sign(q, k, sign, options, jf);
  return jf;
}

JostFunctions compute_jost_pair(const MatrixPotential& q, Complex k,
                                const ForwardOptions& options) {
  JostFunctions jf;
  jf.k = k;
  fill_sign(q, k, JostSign::Plus, options, jf);
  fill_sign(q, k, JostSign::Minus, options, jf);
  return jf;
}

JostGram jost_with_gram(const MatrixPotential& q, Complex k, const ForwardOptions& options) {
  if (!(k.imag() > 0.0))
    throw Error(ErrorKind::BadParams, "Gram matrix of f+ needs Im k > 0", k.imag());
  const Eigen::Index n = q.channels();
  const double x_max = q.x_max();
  const Complex phase = std::exp(kI * k * x_max);
  const double tail = std::exp(-2.0 * k.imag() * x_max) / (2.0 * k.imag());
  JostGram jg;
  if (q.is_zero()) {
    jg.F = CMatrix::Identity(n, n);
    jg.Fx = (kI * k) * CMatrix::Identity(n, n);
    jg.gram = (1.0 / (2.0 * k.imag())) * CMatrix::Identity(n, n);
    return jg;
  }
  const CMatrix y = integrate_inward(q, k, 1.0, true, options);
  jg.F = phase * y.topRows(n);
  jg.Fx = phase * y.middleRows(n, n);
  jg.gram = std::norm(phase) * y.bottomRows(n) + tail * CMatrix::Identity(n, n);
  jg.gram = hermitian_part(jg.gram);
  return jg;
}

MCoefficients m_coefficients(const JostFunctions& jf, const BoundaryCondition& bc) {
  if (jf.k.imag() != 0.0)
    throw Error(ErrorKind::BadParams,
                "Jost traces at complex k: use the potential overload to apply the involution");
  return coefficients_from_conjugate_traces(jf.k, jf, bc);
}

MCoefficients m_coefficients(const MatrixPotential& q, Complex k, const BoundaryCondition& bc,
                             const ForwardOptions& options) {
  if (k == 0.0) throw Error(ErrorKind::ZeroWavenumber, "M coefficients are undefined at k = 0");
  const JostFunctions at_conj = compute_jost_pair(q, std::conj(k), options);
  return coefficients_from_conjugate_traces(k, at_conj, bc);
}

CMatrix scattering_matrix(const MCoefficients& mc, double max_condition) {
  const double cond = condition_number(mc.M_minus);
  if (!(cond <= max_condition)) {
    std::ostringstream msg;
    msg << "cond(M-) = " << cond << " at k = " << mc.k
        << " (spectral singularity or k too close to 0)";
    throw Error(ErrorKind::SingularCoefficient, msg.str(), cond);
  }
  return mc.M_plus * mc.M_minus.partialPivLu().inverse();
}

double default_kappa_max(const MatrixPotential& q, const BoundaryCondition& bc) {
  double depth = 0.0;
  for (const auto& v : q.values()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(v, Eigen::EigenvaluesOnly);
    depth = std::max(depth, -es.eigenvalues()(0));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eh(bc.H(), Eigen::EigenvaluesOnly);
  const double robin = std::max(0.0, eh.eigenvalues()(eh.eigenvalues().size() - 1));
  return 1.05 * std::sqrt(robin * robin + depth) + 0.5;
}

BoundStateResult bound_states(const MatrixPotential& q, const BoundaryCondition& bc,
                              double kappa_max, const BoundStateOptions& options) {
  if (!(kappa_max > 0.0)) throw Error(ErrorKind::BadParams, "kappa_max must be > 0", kappa_max);
  if (q.channels() != bc.channels())
    throw Error(ErrorKind::ShapeMismatch, "potential and boundary condition sizes differ");
  BoundStateResult result;
  const double lo = options.kappa_min;
  if (kappa_max <= lo) return result;
  const int count = std::max(2, static_cast<int>(std::ceil((kappa_max - lo) * options.points_per_unit)) + 1);
  std::vector<double> grid(static_cast<std::size_t>(count));
  std::vector<double> theta(grid.size());
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (kappa_max - lo) * i / (count - 1);
    theta[static_cast<std::size_t>(i)] = probe_phase(q, bc, grid[static_cast<std::size_t>(i)], options.forward).theta;
  }

  if (std::abs(theta.front()) < options.virtual_threshold) {
    result.virtual_level = true;
    std::ostringstream msg;
    msg << "VirtualLevelWarning: M-(i kappa) nearly singular as kappa -> 0+ (phase "
        << theta.front() << " at kappa = " << lo << ")";
    result.diagnostics.warn(msg.str());
  }

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double ta = theta[i];
    const double tb = theta[i + 1];
    if (!(ta * tb < 0.0) || std::abs(ta) > 1.0 || std::abs(tb) > 1.0) continue;
    double a = grid[i];
    double b = grid[i + 1];
    double fa = ta;
    while (b - a > options.tolerance) {
      const double m = 0.5 * (a + b);
      const double fm = probe_phase(q, bc, m, options.forward).theta;
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    const double root = 0.5 * (a + b);
    const PhaseProbe at_root = probe_phase(q, bc, root, options.forward);
    if (std::abs(at_root.theta) > 1e-5) continue;  // eigen-phase swap, not a crossing
    int order = 0;
    for (Eigen::Index j = 0; j < at_root.phases.size(); ++j)
      if (std::abs(std::arg(at_root.phases(j))) < 1e-5) ++order;
    order = std::max(order, 1);
    result.states.push_back(
        assemble_bound_state(q, bc, root, order, options.forward, result.diagnostics));
  }
  std::sort(result.states.begin(), result.states.end(),
            [](const BoundState& x, const BoundState& y) { return x.kappa > y.kappa; });
  return result;
}

std::vector<double> symmetric_kgrid(double k_max, int per_side) {
  if (!(k_max > 0.0) || per_side < 1)
    throw Error(ErrorKind::BadParams, "symmetric k-grid needs k_max > 0 and per_side >= 1");
  const double dk = k_max / per_side;
  std::vector<double> grid;
  grid.reserve(2 * static_cast<std::size_t>(per_side));
  for (int j = per_side; j >= 1; --j) grid.push_back(-(j - 0.5) * dk);
  for (int j = 1; j <= per_side; ++j) grid.push_back((j - 0.5) * dk);
  return grid;
}

ScatteringData scattering_pipeline(const MatrixPotential& q, const BoundaryCondition& bc,
                                   const std::vector<double>& kgrid, double kappa_max,
                                   const PipelineOptions& options) {
  if (q.channels() != bc.channels())
    throw Error(ErrorKind::ShapeMismatch, "potential and boundary condition sizes differ");
  for (double k : kgrid)
    if (k == 0.0) throw Error(ErrorKind::ZeroWavenumber, "k = 0 must not be a grid node");
  ScatteringData data;
  data.kgrid = kgrid;
  data.U_hat = bc.U_hat();
  data.S.resize(kgrid.size());
  // f-(x,k) = f+(x,-k) on the real axis, so one pair of integrations serves
  // both k and its mirror node -k.
  const std::size_t count = kgrid.size();
  std::vector<std::size_t> tasks;
  std::vector<std::ptrdiff_t> mirror(count, -1);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = count - 1 - i;
    if (kgrid[j] == -kgrid[i]) mirror[i] = static_cast<std::ptrdiff_t>(j);
    if (mirror[i] < 0 || kgrid[i] > 0.0) tasks.push_back(i);
  }
  parallel_for(tasks.size(), options.threads, [&](std::size_t t) {
    const std::size_t i = tasks[t];
    JostFunctions jf = compute_jost_pair(q, kgrid[i], options.bound.forward);
    data.S[i] = scattering_matrix(m_coefficients(jf, bc));
    if (mirror[i] >= 0) {
      std::swap(jf.F_plus, jf.F_minus);
      std::swap(jf.Fx_plus, jf.Fx_minus);
      jf.k = -kgrid[i];
      data.S[static_cast<std::size_t>(mirror[i])] = scattering_matrix(m_coefficients(jf, bc));
    }
  });
  double worst = 0.0;
  for (const auto& s : data.S) worst = std::max(worst, unitarity_defect(s));
  data.diagnostics.set("max_unitarity_defect", worst);
  if (kappa_max > 0.0) {
    BoundStateResult bs = bound_states(q, bc, kappa_max, options.bound);
    data.bound_states = std::move(bs.states);
    data.diagnostics.merge(bs.diagnostics);
  }
  return data;
}

}  // namespace halfline
