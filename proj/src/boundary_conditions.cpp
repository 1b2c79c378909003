#include "halfline/boundary_conditions.hpp"

#include <cmath>
#include <sstream>

#include "halfline/linalg.hpp"

namespace halfline {

namespace {

bool is_minus_one(Complex z, double threshold) { return std::abs(z + 1.0) < threshold; }

}  // namespace

BoundaryCondition::BoundaryCondition(const CMatrix& u, double minus_one_threshold) : u_(u) {
  if (u.rows() == 0 || u.rows() != u.cols())
    throw Error(ErrorKind::ShapeMismatch, "boundary unitary must be square and non-empty");
  const double defect = unitarity_defect(u);
  if (!(defect <= kUnitaryTolerance)) {
    std::ostringstream msg;
    msg << "||U*U - I|| = " << defect << " exceeds " << kUnitaryTolerance;
    throw Error(ErrorKind::NotUnitary, msg.str(), defect);
  }
  const Eigen::Index n = u.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  a_ = 0.5 * (u_ + id);
  b_ = 0.5 * kI * (u_ - id);

  // One Schur decomposition serves U_hat and H.
  const NormalEigen eig = normal_eigen(u_);
  CVector hat(n), robin(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex z = eig.values(i);
    if (is_minus_one(z, minus_one_threshold)) {
      hat(i) = -1.0;
      robin(i) = 0.0;
    } else {
      hat(i) = 1.0;
      robin(i) = z.imag() / (1.0 + z.real());  // tan(phi/2)
    }
  }
  const CMatrix& z = eig.vectors;
  u_hat_ = hermitian_part(z * hat.asDiagonal() * z.adjoint());
  h_ = hermitian_part(z * robin.asDiagonal() * z.adjoint());
  p_ = 0.5 * (id + u_hat_);
  p_perp_ = 0.5 * (id - u_hat_);
}

BoundaryCondition make_bc(const CMatrix& u) { return BoundaryCondition(u); }

StandardKind parse_standard_kind(const std::string& name) {
  if (name == "dirichlet") return StandardKind::Dirichlet;
  if (name == "neumann") return StandardKind::Neumann;
  if (name == "kirchhoff") return StandardKind::Kirchhoff;
  if (name == "robin") return StandardKind::Robin;
  throw Error(ErrorKind::BadParams, "unknown boundary condition kind '" + name + "'");
}

BoundaryCondition standard_bc(StandardKind kind, int n, const std::vector<double>& phases) {
  if (n < 1) throw Error(ErrorKind::BadParams, "channel count must be >= 1");
  const CMatrix id = CMatrix::Identity(n, n);
  CMatrix u;
  std::string name;
  switch (kind) {
    case StandardKind::Dirichlet:
      u = -id;
      name = "dirichlet";
      break;
    case StandardKind::Neumann:
      u = id;
      name = "neumann";
      break;
    case StandardKind::Kirchhoff:
      u = (2.0 / n) * all_ones(n) - id;
      name = "kirchhoff";
      break;
    case StandardKind::Robin: {
      if (static_cast<int>(phases.size()) != n)
        throw Error(ErrorKind::BadParams, "robin needs exactly n phases");
      u = CMatrix::Zero(n, n);
      for (int j = 0; j < n; ++j) {
        const double phi = phases[static_cast<std::size_t>(j)];
        if (!(phi > -kPi && phi <= kPi))
          throw Error(ErrorKind::BadParams, "robin phase outside (-pi, pi]", phi);
        u(j, j) = std::polar(1.0, phi);
      }
      name = "robin";
      break;
    }
  }
  BoundaryCondition bc(u);
  bc.set_kind(name);
  return bc;
}

CMatrix high_energy_limit(const CMatrix& u, double minus_one_threshold) {
  const double defect = unitarity_defect(u);
  if (!(defect <= BoundaryCondition::kUnitaryTolerance))
    throw Error(ErrorKind::NotUnitary, "high_energy_limit needs a unitary input", defect);
  return hermitian_part(normal_matrix_function(u, [&](Complex z) {
    return is_minus_one(z, minus_one_threshold) ? Complex(-1.0) : Complex(1.0);
  }));
}

CMatrix robin_matrix(const BoundaryCondition& bc) { return bc.H(); }

CMatrix unitary_from_robin(const CMatrix& p_perp, const CMatrix& h) {
  const Eigen::Index n = h.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix cayley = (id + kI * h) * (id - kI * h).inverse();
  return cayley - 2.0 * p_perp;
}

double check_bc(const BoundaryCondition& bc, const CMatrix& psi0, const CMatrix& psix0) {
  const Eigen::Index n = bc.channels();
  if (psi0.rows() != n || psix0.rows() != n || psi0.cols() != psix0.cols())
    throw Error(ErrorKind::ShapeMismatch, "boundary values do not conform to the condition");
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix us = bc.U().adjoint();
  return (0.5 * kI * (us - id) * psi0 + 0.5 * (us + id) * psix0).norm();
}

}  // namespace halfline
