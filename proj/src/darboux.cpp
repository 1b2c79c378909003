#include "halfline/darboux.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "halfline/finite_difference.hpp"
#include "halfline/linalg.hpp"

namespace halfline {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// True when every node of the stencil around i is usable and resolves V.
bool stencil_ok(const DarbouxFactor& v, std::size_t s, std::size_t width, double resolution) {
  double vmax = 0.0;
  for (std::size_t j = s; j < s + width; ++j) {
    if (v.singular[j]) return false;
    vmax = std::max(vmax, v.V[j].norm());
  }
  const double h = (v.grid[s + width - 1] - v.grid[s]) / static_cast<double>(width - 1);
  return h * vmax <= resolution;
}

}  // namespace

CMatrix choose_U0(const BoundaryCondition& bc, const std::optional<CMatrix>& override_u0) {
  if (!override_u0) return bc.U();
  const CMatrix& u0 = *override_u0;
  if (u0.rows() != bc.channels() || u0.cols() != bc.channels())
    throw Error(ErrorKind::ShapeMismatch, "U0 override has the wrong size");
  const double defect = unitarity_defect(u0);
  if (!(defect <= BoundaryCondition::kUnitaryTolerance))
    throw Error(ErrorKind::NotUnitary, "U0 override is not unitary", defect);
  const double residual = (bc.P() * (u0 - bc.U())).norm();
  if (!(residual <= 1e-10))
    throw Error(ErrorKind::ConstraintViolated, "U0 override must satisfy P U0 = P U", residual);
  return u0;
}

ZeroEnergyFrame zero_energy_frame(const MatrixPotential& q, const CMatrix& u0,
                                  const FrameOptions& options,
                                  std::optional<std::vector<double>> grid) {
  const Eigen::Index n = q.channels();
  if (u0.rows() != n || u0.cols() != n)
    throw Error(ErrorKind::ShapeMismatch, "U0 and potential sizes differ");
  ZeroEnergyFrame frame;
  frame.grid = grid ? std::move(*grid) : q.grid();
  if (frame.grid.empty() || frame.grid.front() != 0.0)
    throw Error(ErrorKind::BadParams, "frame grid must start at 0");
  if (q.grid().size() > 1) {
    const double jump = (q.values()[1] - q.values()[0]).norm();
    if (!(jump <= options.max_jump_near_origin))
      throw Error(ErrorKind::BadParams, "potential is not resolved near the origin", jump);
  }
  frame.U0 = u0;
  const CMatrix id = CMatrix::Identity(n, n);
  CMatrix y(2 * n, n);
  y.topRows(n) = 0.5 * (u0 + id);
  y.bottomRows(n) = (0.5 * kI) * (u0 - id);

  CMatrix qx(n, n);
  auto rhs = [&](double x, const CMatrix& s, CMatrix& d) {
    q.evaluate(x, qx);
    d.topRows(n) = s.bottomRows(n);
    d.bottomRows(n).noalias() = qx * s.topRows(n);
  };
  Dopri5<CMatrix> stepper(options.ode);
  double step = options.ode.initial_step;
  frame.Xi0.reserve(frame.grid.size());
  frame.Xi0x.reserve(frame.grid.size());
  double x = 0.0;
  for (double node : frame.grid) {
    stepper.integrate(rhs, x, node, y, step);
    x = node;
    frame.Xi0.push_back(y.topRows(n));
    frame.Xi0x.push_back(y.bottomRows(n));
  }
  return frame;
}

DarbouxFactor darboux_potential(const ZeroEnergyFrame& frame, const FrameOptions& options) {
  DarbouxFactor v;
  v.grid = frame.grid;
  const std::size_t m = frame.grid.size();
  v.V.resize(m);
  v.singular.assign(m, false);
  std::size_t usable = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const CMatrix& xi = frame.Xi0[i];
    if (!(condition_number(xi) <= options.singular_condition)) {
      v.singular[i] = true;
      v.singular_points.push_back(frame.grid[i]);
      v.V[i] = CMatrix::Constant(xi.rows(), xi.cols(), Complex(kNaN, kNaN));
      continue;
    }
    v.V[i] = frame.Xi0x[i] * xi.partialPivLu().inverse();
    ++usable;
  }
  if (usable == 0) throw Error(ErrorKind::AllSingular, "zero-energy frame is singular at every node");
  return v;
}

std::vector<double> riccati_residual(const DarbouxFactor& v, const MatrixPotential& q,
                                     const ResidualOptions& options) {
  const std::size_t m = v.grid.size();
  const std::size_t width = 2 * static_cast<std::size_t>(options.half_width) + 1;
  std::vector<double> out(m, kNaN);
  if (m < width) return out;
  std::vector<double> nodes(width);
  for (std::size_t i = options.half_width; i + options.half_width < m; ++i) {
    const std::size_t s = i - static_cast<std::size_t>(options.half_width);
    if (!stencil_ok(v, s, width, options.resolution)) continue;
    for (std::size_t j = 0; j < width; ++j) nodes[j] = v.grid[s + j];
    const auto w = derivative_weights(v.grid[i], nodes);
    CMatrix dv = CMatrix::Zero(v.V[i].rows(), v.V[i].cols());
    for (std::size_t j = 0; j < width; ++j) dv += w[j] * v.V[s + j];
    out[i] = (dv + v.V[i] * v.V[i] - q(v.grid[i])).norm();
  }
  return out;
}

double max_finite(const std::vector<double>& profile) {
  double r = 0.0;
  for (double x : profile)
    if (std::isfinite(x)) r = std::max(r, x);
  return r;
}

FactorizationReport factorization_check(const DarbouxFactor& v, const BoundaryCondition& bc,
                                        const MatrixPotential& q,
                                        const std::vector<TestFunction>& tests,
                                        const ResidualOptions& options,
                                        double domain_tolerance) {
  FactorizationReport report;
  const std::size_t m = v.grid.size();
  // With P = 0 (Dirichlet type) V(0) enters no condition and may be singular.
  const bool dirichlet = bc.P().norm() < 1e-12;
  if (v.singular.front() && !dirichlet)
    throw Error(ErrorKind::SingularAtOrigin, "V is singular at the origin");
  const Eigen::Index n = bc.channels();
  const CMatrix v0 = v.singular.front() ? CMatrix::Zero(n, n) : v.V.front();
  report.initial_condition = (bc.P() * v0 + bc.P() * bc.H()).norm();

  const std::size_t width = 2 * static_cast<std::size_t>(options.half_width) + 1;
  std::vector<double> nodes(width);
  for (std::size_t t = 0; t < tests.size(); ++t) {
    const auto& f = tests[t];
    const CVector psi0 = f.value(0.0);
    const CVector dpsi0 = f.derivative(0.0);
    const double in_domain = std::max((bc.P_perp() * psi0).norm(),
                                      (bc.P() * (dpsi0 - v0 * psi0)).norm());
    const double bc_residual = check_bc(bc, psi0, dpsi0);
    if (!(in_domain <= domain_tolerance) || !(bc_residual <= domain_tolerance)) {
      std::ostringstream msg;
      msg << "test function " << t << " violates the domain conditions at 0";
      throw Error(ErrorKind::DomainViolation, msg.str(), std::max(in_domain, bc_residual));
    }
    report.boundary = std::max(report.boundary, std::max(in_domain, bc_residual));

    std::vector<CVector> phi(m);
    for (std::size_t i = 0; i < m; ++i)
      if (!v.singular[i]) phi[i] = kI * (f.derivative(v.grid[i]) - v.V[i] * f.value(v.grid[i]));

    double worst = 0.0;
    for (std::size_t i = options.half_width; i + options.half_width < m; ++i) {
      const std::size_t s = i - static_cast<std::size_t>(options.half_width);
      if (!stencil_ok(v, s, width, options.resolution)) continue;
      for (std::size_t j = 0; j < width; ++j) nodes[j] = v.grid[s + j];
      const auto w = derivative_weights(v.grid[i], nodes);
      CVector dphi = CVector::Zero(phi[i].size());
      for (std::size_t j = 0; j < width; ++j) dphi += w[j] * phi[s + j];
      const CVector dstar = kI * (dphi + v.V[i] * phi[i]);
      const double x = v.grid[i];
      const CVector l = -f.second(x) + q(x) * f.value(x);
      worst = std::max(worst, (dstar - l).norm());
    }
    report.per_function.push_back(worst);
    report.interior = std::max(report.interior, worst);
  }
  return report;
}

PartnerOperator partner_operator(const DarbouxFactor& v, const BoundaryCondition& bc,
                                 const MatrixPotential& q, const ResidualOptions& options) {
  if (v.singular.front())
    throw Error(ErrorKind::SingularAtOrigin, "V is singular at the origin");
  for (std::size_t i = 0; i < v.grid.size(); ++i)
    if (v.singular[i])
      throw Error(ErrorKind::DomainViolation, "V is singular inside the grid", v.grid[i]);
  const auto dv = differentiate(v.grid, v.V, options.half_width);
  std::vector<CMatrix> qt(v.grid.size());
  for (std::size_t i = 0; i < v.grid.size(); ++i)
    qt[i] = hermitian_part(q(v.grid[i]) - 2.0 * dv[i]);

  const CMatrix h = hermitian_part(bc.P_perp() * v.V.front() * bc.P_perp());
  const CMatrix u = polar_unitary(unitary_from_robin(bc.P(), h));
  return PartnerOperator{MatrixPotential(v.grid, std::move(qt)), make_bc(u), h};
}

}  // namespace halfline
